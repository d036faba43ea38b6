#include "pcp/generate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <utility>

#include "pcp/io.hpp"

namespace pcp {

namespace {

struct Layout {
  std::vector<WeightedEdge> edges;
  std::vector<std::size_t> blocks;
};

Layout make_layout(const GenOptions& o, std::mt19937_64& rng) {
  Layout out;
  const std::size_t B = o.blocks;
  if (o.graph == GraphKind::chain) {
    const std::size_t n = o.size;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      out.edges.push_back({static_cast<VertexId>(i), static_cast<VertexId>(i + 1), o.weight});
    }
    for (std::size_t i = 0; i < n; ++i) out.blocks.push_back(i * B / n);
  } else if (o.graph == GraphKind::grid) {
    const std::size_t rows = o.size;
    const std::size_t cols = o.width ? o.width : o.size;
    const std::size_t br = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(B))));
    const std::size_t bc = (B + br - 1) / br;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        const auto v = static_cast<VertexId>(i * cols + j);
        if (j + 1 < cols) out.edges.push_back({v, v + 1, o.weight});
        if (i + 1 < rows) out.edges.push_back({v, static_cast<VertexId>(v + cols), o.weight});
        out.blocks.push_back(std::min(B - 1, (i * br / rows) * bc + j * bc / cols));
      }
    }
  } else {
    const std::size_t n = o.size;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<double, double>> pts(n);
    for (auto& p : pts) {
      p.first = unit(rng);
      p.second = unit(rng);
    }
    std::set<std::pair<VertexId, VertexId>> seen;
    std::vector<std::pair<double, VertexId>> dist;
    const std::size_t k = std::min(o.neighbors, n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      dist.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double dx = pts[i].first - pts[j].first;
        const double dy = pts[i].second - pts[j].second;
        dist.emplace_back(dx * dx + dy * dy, static_cast<VertexId>(j));
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
      for (std::size_t r = 0; r < k; ++r) {
        const auto a = static_cast<VertexId>(std::min<std::size_t>(i, dist[r].second));
        const auto b = static_cast<VertexId>(std::max<std::size_t>(i, dist[r].second));
        if (seen.insert({a, b}).second) out.edges.push_back({a, b, o.weight});
      }
    }
    for (const auto& p : pts) {
      out.blocks.push_back(std::min(B - 1, static_cast<std::size_t>(p.first * static_cast<double>(B))));
    }
  }
  return out;
}

std::size_t vertex_count(const GenOptions& o) {
  return o.graph == GraphKind::grid ? o.size * (o.width ? o.width : o.size) : o.size;
}

void validate(const GenOptions& o) {
  if (o.size == 0 || o.blocks == 0) throw InputError("gen: sizes and block count must be at least 1");
  if (o.graph == GraphKind::knn_cloud && o.size < 2) throw InputError("gen: knn-cloud needs at least 2 points");
  if (!(o.noise >= 0.0) || !(o.weight >= 0.0)) throw InputError("gen: noise and weight must be nonnegative");
  if (o.problem == ProblemKind::kl && o.classes < 2) throw InputError("gen: kl needs at least 2 classes");
  if (o.problem == ProblemKind::lasso && o.sensors == 0) throw InputError("gen: lasso needs at least 1 sensor");
}

}  // namespace

GraphKind parse_graph_kind(const std::string& name) {
  if (name == "chain") return GraphKind::chain;
  if (name == "grid") return GraphKind::grid;
  if (name == "knn-cloud") return GraphKind::knn_cloud;
  throw InputError("unknown graph kind '" + name + "'");
}

ProblemKind parse_problem_kind(const std::string& name) {
  if (name == "quadratic") return ProblemKind::quadratic;
  if (name == "lasso") return ProblemKind::lasso;
  if (name == "kl") return ProblemKind::kl;
  throw InputError("unknown problem kind '" + name + "'");
}

std::string to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::chain: return "chain";
    case GraphKind::grid: return "grid";
    case GraphKind::knn_cloud: return "knn-cloud";
  }
  return "unknown";
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::quadratic: return "quadratic";
    case ProblemKind::lasso: return "lasso";
    case ProblemKind::kl: return "kl";
  }
  return "unknown";
}

std::vector<std::size_t> block_labels(const GenOptions& options) {
  validate(options);
  std::mt19937_64 rng(options.seed);
  return make_layout(options, rng).blocks;
}

Instance generate_instance(const GenOptions& o) {
  validate(o);
  std::mt19937_64 rng(o.seed);
  Layout layout = make_layout(o, rng);
  const std::size_t n = vertex_count(o);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Instance inst;
  if (o.problem == ProblemKind::quadratic) {
    inst.truth = NodeValues(n, 1);
    inst.observations = NodeValues(n, 1);
    for (std::size_t v = 0; v < n; ++v) {
      inst.truth.at(v, 0) = static_cast<double>(layout.blocks[v]);
      inst.observations.at(v, 0) = inst.truth.at(v, 0) + o.noise * gauss(rng);
    }
  } else if (o.problem == ProblemKind::lasso) {
    std::set<std::pair<VertexId, VertexId>> seen;
    for (const auto& e : layout.edges) seen.insert({e.u, e.v});
    const auto extra = static_cast<std::size_t>(std::llround(o.extra_edge_ratio * static_cast<double>(n)));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t added = 0, tries = 0; n > 1 && added < extra && tries < 100 * extra + 100; ++tries) {
      auto a = static_cast<VertexId>(pick(rng));
      auto b = static_cast<VertexId>(pick(rng));
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (!seen.insert({a, b}).second) continue;
      layout.edges.push_back({a, b, o.weight});
      ++added;
    }
    std::uniform_real_distribution<double> amp(0.5, 1.5);
    std::vector<double> level(o.blocks);
    for (std::size_t b = 0; b < o.blocks; ++b) level[b] = b % 2 == 1 ? amp(rng) : 0.0;
    inst.truth = NodeValues(n, 1);
    for (std::size_t v = 0; v < n; ++v) inst.truth.at(v, 0) = level[layout.blocks[v]];
    LeadField phi{o.sensors, n, std::vector<double>(o.sensors * n)};
    const double scale = 1.0 / std::sqrt(static_cast<double>(o.sensors));
    for (double& a : phi.data) a = scale * gauss(rng);
    inst.observations = NodeValues(o.sensors, 1);
    for (std::size_t i = 0; i < o.sensors; ++i) {
      double s = 0.0;
      for (std::size_t v = 0; v < n; ++v) s += phi.at(i, v) * inst.truth.at(v, 0);
      inst.observations.at(i, 0) = s + o.noise * gauss(rng);
    }
    inst.leadfield = std::move(phi);
    inst.lambda.assign(n, o.lambda);
  } else {
    const std::size_t K = o.classes;
    inst.truth = NodeValues(n, K, 0.0);
    inst.observations = NodeValues(n, K, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t cls = layout.blocks[v] % K;
      inst.truth.at(v, cls) = 1.0;
      auto row = inst.observations.row(v);
      for (std::size_t k = 0; k < K; ++k) row[k] = inst.truth.at(v, k) + o.noise * gauss(rng);
      project_simplex(row);
    }
  }
  inst.graph = Graph::build(n, layout.edges);
  return inst;
}

std::vector<std::string> write_instance(const std::string& prefix, const Instance& instance) {
  std::vector<std::string> paths{prefix + ".graph", prefix + ".obs", prefix + ".truth"};
  write_graph(paths[0], instance.graph);
  write_rows(paths[1], instance.observations);
  write_rows(paths[2], instance.truth);
  if (instance.leadfield) {
    paths.push_back(prefix + ".lambda");
    write_rows(paths.back(), NodeValues(1, instance.lambda));
    paths.push_back(prefix + ".leadfield");
    write_leadfield(paths.back(), *instance.leadfield);
  }
  return paths;
}

}  // namespace pcp
