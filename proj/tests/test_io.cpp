#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "pcp/generate.hpp"
#include "pcp/io.hpp"
#include "pcp/run.hpp"

using namespace pcp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pcp_test_io";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("graph round trip") {
  const Graph g = Graph::build(4, std::vector<WeightedEdge>{{0, 1, 0.1}, {1, 2, 1.0 / 3}, {0, 3, 2.5e-17}});
  const auto p = scratch("g.graph").string();
  write_graph(p, g);
  const Graph h = read_graph(p);
  CHECK(h.num_vertices() == 4);
  REQUIRE(h.num_edges() == 3);
  for (EdgeId e = 0; e < 3; ++e) {
    CHECK(h.endpoints(e) == g.endpoints(e));
    CHECK(h.weight(e) == g.weight(e));
  }
}

TEST_CASE("row and lead-field round trip") {
  const NodeValues rows(3, {0.1, -2.0, 1e-300, 4.0, 5.5, 1.0 / 7});
  const auto p = scratch("r.txt").string();
  write_rows(p, rows);
  CHECK(read_rows(p) == rows);
  CHECK(read_rows(p, 2) == rows);
  CHECK_THROWS_AS(read_rows(p, 3), InputError);

  const LeadField phi{2, 3, {1.0, 2.0, 3.0, -0.5, 1.0 / 3, 0.0}};
  const auto q = scratch("l.txt").string();
  write_leadfield(q, phi);
  const LeadField back = read_leadfield(q);
  CHECK(back.rows == 2);
  CHECK(back.cols == 3);
  CHECK(back.data == phi.data);
}

TEST_CASE("parse errors carry file and line") {
  const auto p = scratch("bad.graph");
  write_text(p, "3 2\n0 1 1.0\n1 x 2.0\n");
  CHECK(error_of([&] { read_graph(p.string()); }).find("bad.graph:3:") != std::string::npos);
  write_text(p, "3 2\n0 1 1.0\n1 5 2.0\n");
  CHECK(error_of([&] { read_graph(p.string()); }).find(":3: vertex id out of range") != std::string::npos);
  write_text(p, "3 2\n0 1 -1.0\n");
  CHECK(error_of([&] { read_graph(p.string()); }).find(":2:") != std::string::npos);
  write_text(p, "3 2\n0 1 1.0\n");
  CHECK(error_of([&] { read_graph(p.string()); }).find("found 1") != std::string::npos);
  write_text(p, "# comment\n\n2 1\n1 1 1.0\n");
  CHECK(error_of([&] { read_graph(p.string()); }).find(":4: self-loop") != std::string::npos);
  const auto r = scratch("bad.rows");
  write_text(r, "1 2\n3\n");
  CHECK(error_of([&] { read_rows(r.string()); }).find(":2: expected 2 values") != std::string::npos);
  CHECK(error_of([&] { read_rows(scratch("missing.rows").string()); }).find("cannot open") != std::string::npos);
}

TEST_CASE("generator examples") {
  SUBCASE("noise-free chain has two levels") {
    GenOptions o;
    o.size = 4;
    o.blocks = 2;
    o.noise = 0.0;
    o.seed = 7;
    const Instance inst = generate_instance(o);
    std::set<double> levels(inst.observations.flat().begin(), inst.observations.flat().end());
    CHECK(levels.size() == 2);
    CHECK(inst.observations == inst.truth);
  }
  SUBCASE("grid edge count") {
    GenOptions o;
    o.graph = GraphKind::grid;
    o.size = 16;
    CHECK(generate_instance(o).graph.num_edges() == 480);
  }
  SUBCASE("grid blocks are quadrants") {
    GenOptions o;
    o.graph = GraphKind::grid;
    o.size = 4;
    o.blocks = 4;
    CHECK(block_labels(o) == std::vector<std::size_t>{0, 0, 1, 1, 0, 0, 1, 1, 2, 2, 3, 3, 2, 2, 3, 3});
  }
  SUBCASE("kl rows lie in the simplex, lasso truth is nonnegative") {
    GenOptions o;
    o.problem = ProblemKind::kl;
    o.size = 50;
    o.classes = 4;
    o.noise = 0.5;
    const Instance kl = generate_instance(o);
    for (std::size_t v = 0; v < 50; ++v) CHECK(in_simplex(kl.observations.row(v)));
    o.problem = ProblemKind::lasso;
    o.sensors = 7;
    const Instance la = generate_instance(o);
    CHECK(la.observations.num_nodes() == 7);
    CHECK(la.leadfield->cols == 50);
    CHECK(la.graph.num_edges() > 49);
    for (double a : la.truth.flat()) CHECK(a >= 0.0);
  }
  SUBCASE("knn cloud is symmetric and deduplicated") {
    GenOptions o;
    o.graph = GraphKind::knn_cloud;
    o.size = 60;
    o.neighbors = 5;
    const Instance inst = generate_instance(o);
    for (VertexId v = 0; v < 60; ++v) CHECK(inst.graph.degree(v) >= 5);
  }
  SUBCASE("invalid sizes") {
    GenOptions o;
    o.size = 0;
    CHECK_THROWS_AS(generate_instance(o), InputError);
  }
}

TEST_CASE("generated files are deterministic and parse back") {
  for (auto problem : {ProblemKind::quadratic, ProblemKind::lasso, ProblemKind::kl}) {
    GenOptions o;
    o.graph = GraphKind::knn_cloud;
    o.problem = problem;
    o.size = 40;
    o.seed = 99;
    const Instance inst = generate_instance(o);
    const auto a = write_instance(scratch("a").string(), inst);
    const auto b = write_instance(scratch("b").string(), generate_instance(o));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(slurp(a[i]) == slurp(b[i]));

    const Graph g = read_graph(a[0]);
    REQUIRE(g.num_edges() == inst.graph.num_edges());
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      CHECK(g.endpoints(e) == inst.graph.endpoints(e));
      CHECK(g.weight(e) == inst.graph.weight(e));
    }
    CHECK(read_rows(a[1]) == inst.observations);
    CHECK(read_rows(a[2]) == inst.truth);
    if (inst.leadfield) CHECK(read_leadfield(a[4]).data == inst.leadfield->data);
  }
}

TEST_CASE("run specs and comparisons") {
  GenOptions o;
  o.size = 30;
  o.blocks = 3;
  o.noise = 0.2;
  o.weight = 0.3;
  const auto paths = write_instance(scratch("cmp").string(), generate_instance(o));
  RunSpec s;
  s.graph_path = paths[0];
  s.obs_path = paths[1];
  const Problem p = load_problem(s);

  s.solver = SolverKind::pcp;
  const RunOutcome a = run_solver(s, p);
  const RunOutcome b = run_solver(s, p);
  s.solver = SolverKind::baseline;
  s.tol = 1e-9;
  const RunOutcome c = run_solver(s, p);

  const Comparison cmp = compare_runs({a, b, c});
  for (const auto& row : cmp.rows) CHECK(row.gap >= 0.0);
  const std::size_t na = a.trace.rows.size();
  REQUIRE(b.trace.rows.size() == na);
  for (std::size_t i = 0; i < na; ++i) CHECK(cmp.rows[i].gap == cmp.rows[na + i].gap);
  CHECK(cmp.summaries.size() == 3);
  CHECK(std::abs(a.objective - c.objective) <= 1e-5 * std::abs(c.objective));

  RunOutcome other = c;
  other.instance = "different";
  CHECK_THROWS_AS(compare_runs({a, other}), InputError);
  CHECK_THROWS_AS(compare_runs({a}), InputError);

  RunSpec bad = s;
  bad.problem = ProblemKind::kl;
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad.beta = 1.5;
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad.problem = ProblemKind::lasso;
  CHECK_THROWS_AS(bad.validate(), InputError);
  CHECK(parse_solver_kind("pcp-balanced") == SolverKind::pcp_balanced);
  CHECK_THROWS_AS(parse_solver_kind("pfdr"), InputError);
}
