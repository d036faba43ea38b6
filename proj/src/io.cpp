#include "pcp/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>

namespace pcp {

namespace {

class LineReader {
 public:
  explicit LineReader(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw InputError(path + ": cannot open file");
  }

  // Next non-blank, non-comment line split into tokens; false at end of file.
  bool next(std::vector<std::string_view>& tokens) {
    while (std::getline(in_, line_)) {
      ++number_;
      tokens.clear();
      std::size_t i = 0;
      while (i < line_.size()) {
        while (i < line_.size() && std::isspace(static_cast<unsigned char>(line_[i]))) ++i;
        std::size_t j = i;
        while (j < line_.size() && !std::isspace(static_cast<unsigned char>(line_[j]))) ++j;
        if (j > i) tokens.emplace_back(line_.data() + i, j - i);
        i = j;
      }
      if (tokens.empty() || tokens.front().front() == '#') continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw InputError(path_ + ":" + std::to_string(number_) + ": " + message);
  }

  template <class T>
  T parse(std::string_view token, const char* what) const {
    T value{};
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      fail("cannot parse " + std::string(what) + " '" + std::string(token) + "'");
    }
    return value;
  }

  std::size_t line_number() const { return number_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::string line_;
  std::size_t number_ = 0;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError(path + ": cannot open file for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw InputError(path + ": write failed");
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

Graph read_graph(const std::string& path) {
  LineReader reader(path);
  std::vector<std::string_view> tok;
  if (!reader.next(tok)) reader.fail("missing 'V E' header");
  if (tok.size() != 2) reader.fail("header must be 'V E'");
  const auto nv = reader.parse<std::size_t>(tok[0], "vertex count");
  const auto ne = reader.parse<std::size_t>(tok[1], "edge count");
  std::vector<WeightedEdge> edges;
  edges.reserve(ne);
  while (reader.next(tok)) {
    if (tok.size() != 3) reader.fail("edge line must be 'u v w'");
    const auto u = reader.parse<std::size_t>(tok[0], "vertex id");
    const auto v = reader.parse<std::size_t>(tok[1], "vertex id");
    const auto w = reader.parse<double>(tok[2], "weight");
    if (u >= nv || v >= nv) reader.fail("vertex id out of range");
    if (u == v) reader.fail("self-loop");
    if (!(w >= 0.0) || !std::isfinite(w)) reader.fail("weight must be finite and nonnegative");
    if (edges.size() == ne) reader.fail("more edges than announced in the header");
    edges.push_back({static_cast<VertexId>(u), static_cast<VertexId>(v), w});
  }
  if (edges.size() != ne) {
    throw InputError(path + ": header announces " + std::to_string(ne) + " edges, found " +
                     std::to_string(edges.size()));
  }
  return Graph::build(nv, edges);
}

void write_graph(const std::string& path, const Graph& graph) {
  auto out = open_out(path);
  out << graph.num_vertices() << ' ' << graph.num_edges() << '\n';
  for (EdgeId e = 0; e < graph.num_edges(); ++e) {
    const Edge& ed = graph.endpoints(e);
    out << ed.u << ' ' << ed.v << ' ' << format_double(graph.weight(e)) << '\n';
  }
  finish(out, path);
}

NodeValues read_rows(const std::string& path, std::optional<std::size_t> expected_rows) {
  LineReader reader(path);
  std::vector<std::string_view> tok;
  std::vector<double> data;
  std::size_t width = 0;
  std::size_t rows = 0;
  while (reader.next(tok)) {
    if (rows == 0) width = tok.size();
    if (tok.size() != width) {
      reader.fail("expected " + std::to_string(width) + " values, found " + std::to_string(tok.size()));
    }
    for (auto t : tok) {
      const double v = reader.parse<double>(t, "value");
      if (!std::isfinite(v)) reader.fail("non-finite value");
      data.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw InputError(path + ": no rows");
  if (expected_rows && rows != *expected_rows) {
    throw InputError(path + ": expected " + std::to_string(*expected_rows) + " rows, found " + std::to_string(rows));
  }
  return NodeValues(width, std::move(data));
}

void write_rows(const std::string& path, const NodeValues& rows) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < rows.num_nodes(); ++i) {
    const auto r = rows.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k) out << ' ';
      out << format_double(r[k]);
    }
    out << '\n';
  }
  finish(out, path);
}

LeadField read_leadfield(const std::string& path) {
  LineReader reader(path);
  std::vector<std::string_view> tok;
  if (!reader.next(tok)) reader.fail("missing 'N V' header");
  if (tok.size() != 2) reader.fail("header must be 'N V'");
  LeadField phi;
  phi.rows = reader.parse<std::size_t>(tok[0], "row count");
  phi.cols = reader.parse<std::size_t>(tok[1], "column count");
  phi.data.reserve(phi.rows * phi.cols);
  std::size_t r = 0;
  while (reader.next(tok)) {
    if (r == phi.rows) reader.fail("more rows than announced in the header");
    if (tok.size() != phi.cols) {
      reader.fail("expected " + std::to_string(phi.cols) + " values, found " + std::to_string(tok.size()));
    }
    for (auto t : tok) {
      const double v = reader.parse<double>(t, "value");
      if (!std::isfinite(v)) reader.fail("non-finite value");
      phi.data.push_back(v);
    }
    ++r;
  }
  if (r != phi.rows) {
    throw InputError(path + ": header announces " + std::to_string(phi.rows) + " rows, found " + std::to_string(r));
  }
  return phi;
}

void write_leadfield(const std::string& path, const LeadField& phi) {
  auto out = open_out(path);
  out << phi.rows << ' ' << phi.cols << '\n';
  for (std::size_t i = 0; i < phi.rows; ++i) {
    for (std::size_t j = 0; j < phi.cols; ++j) {
      if (j) out << ' ';
      out << format_double(phi.at(i, j));
    }
    out << '\n';
  }
  finish(out, path);
}

}  // namespace pcp
