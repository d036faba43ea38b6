#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "pcp/primal_dual.hpp"

using namespace pcp;

namespace {

// f(x) = c * sum x^2 with a deliberately wrong curvature bound.
class Overconfident final : public Functional {
 public:
  explicit Overconfident(std::size_t n) : n_(n) {}
  std::size_t num_nodes() const override { return n_; }
  std::size_t dim() const override { return 1; }
  double eval_smooth(const NodeValues& x, int) const override {
    double s = 0.0;
    for (double a : x.flat()) s += 1e3 * a * a;
    return s;
  }
  void gradient_smooth(const NodeValues& x, NodeValues& g, int) const override {
    for (std::size_t i = 0; i < n_; ++i) g.flat()[i] = 2e3 * x.flat()[i];
  }
  double eval_nonsmooth(const NodeValues&, int) const override { return 0.0; }
  void prox_nonsmooth(NodeValues&, std::span<const double>, int) const override {}
  void make_feasible(NodeValues&) const override {}
  bool has_nonsmooth() const override { return false; }
  double directional_unary(std::size_t, std::span<const double>, std::span<const double> g,
                           std::span<const double> d) const override {
    return g[0] * d[0];
  }
  std::vector<double> lipschitz_diagonal() const override { return std::vector<double>(n_, 1e-3); }
  std::unique_ptr<Functional> reduce(const Partition&) const override { return nullptr; }

 private:
  std::size_t n_;
};

Graph pair_graph(double w) { return Graph::build(2, std::vector<WeightedEdge>{{0, 1, w}}); }

PrimalDualOptions tight() {
  PrimalDualOptions o;
  o.tol = 1e-13;
  o.max_iter = 200000;
  return o;
}

}  // namespace

TEST_CASE("single node, no edges: mean of the observations") {
  const QuadraticFidelity q(NodeValues(1, {1.0, 2.0, 6.0}));
  const auto red = q.reduce(Partition(3, {{0, 1, 2}}));
  const ReducedGraph rg{1, {}, {}, {3}};
  const auto r = solve_primal_dual(rg.topology(), *red, NodeValues(1, 1, 0.0), tight());
  CHECK(r.values.flat()[0] == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(kkt_residual(rg.topology(), *red, r.values, r.duals) <= 1e-9);
}

TEST_CASE("two-node fused pair") {
  const QuadraticFidelity q(NodeValues(1, {0.0, 2.0}));
  SUBCASE("gap larger than the weight: shrink by w/2") {
    const Graph g = pair_graph(1.0);
    const auto r = solve_primal_dual(g.topology(), q, NodeValues(2, 1, 0.0), tight());
    CHECK(r.values.flat()[0] == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(r.values.flat()[1] == doctest::Approx(1.5).epsilon(1e-7));
    CHECK(std::abs(r.duals.flat()[0]) <= 1.0);
  }
  SUBCASE("weight beyond the gap: fusion") {
    const Graph g = pair_graph(4.0);
    const auto r = solve_primal_dual(g.topology(), q, NodeValues(2, 1, 0.0), tight());
    CHECK(r.values.flat()[0] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(r.values.flat()[1] == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("kkt residual trends down and vanishes only at saddle points") {
  const QuadraticFidelity q(NodeValues(1, {0.0, 2.0}));
  const Graph g = pair_graph(1.0);
  double previous = 1e300;
  for (std::size_t iters : {5u, 20u, 80u, 320u}) {
    PrimalDualOptions o = tight();
    o.max_iter = iters;
    const auto r = solve_primal_dual(g.topology(), q, NodeValues(2, 1, 0.0), o);
    const double res = kkt_residual(g.topology(), q, r.values, r.duals);
    CHECK(res <= previous);
    previous = res;
  }
  CHECK(previous < 1e-6);
  const NodeValues p(1, std::vector<double>{0.3});
  CHECK(kkt_residual(g.topology(), q, NodeValues(1, {3.0, -1.0}), p) > 0.0);
}

TEST_CASE("objective never exceeds the initial one; iterates stay feasible") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<WeightedEdge> e;
  for (VertexId v = 0; v + 1 < 30; ++v) e.push_back({v, v + 1, 0.3});
  e.push_back({0, 15, 0.2});
  const Graph g = Graph::build(30, e);

  LeadField phi{10, 30, std::vector<double>(300)};
  for (double& a : phi.data) a = n(rng);
  std::vector<double> y(10), lambda(30, 0.1);
  for (double& a : y) a = n(rng);
  const WeightedLassoNonneg lasso(y, phi, lambda);
  NodeValues x0(30, 1);
  for (double& a : x0.flat()) a = std::abs(n(rng));
  const auto rl = solve_primal_dual(g.topology(), lasso, x0, {});
  CHECK(rl.objective <= eval_objective(lasso, g.topology(), x0));
  for (double a : rl.values.flat()) CHECK(a >= 0.0);

  NodeValues yk(30, 3);
  for (std::size_t v = 0; v < 30; ++v) {
    for (std::size_t k = 0; k < 3; ++k) yk.at(v, k) = std::abs(n(rng));
    project_simplex(yk.row(v));
  }
  const KLSimplex kl(yk, 0.1);
  const auto rk = solve_primal_dual(g.topology(), kl, NodeValues(30, 3, 1.0 / 3), {});
  CHECK(rk.objective <= eval_objective(kl, g.topology(), NodeValues(30, 3, 1.0 / 3)));
  for (std::size_t v = 0; v < 30; ++v) CHECK(in_simplex(rk.values.row(v)));
}

TEST_CASE("singleton reduction matches the full solve") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<WeightedEdge> e;
  for (VertexId v = 0; v + 1 < 40; ++v) e.push_back({v, v + 1, 0.4});
  const Graph g = Graph::build(40, e);
  NodeValues y(40, 1);
  for (double& a : y.flat()) a = n(rng);
  const QuadraticFidelity q(y);
  const Partition p = Partition::singletons(40);
  const ReducedGraph rg = build_reduced_graph(g, p);
  PrimalDualOptions o;
  o.tol = 1e-9;
  const auto full = solve_primal_dual(g.topology(), q, NodeValues(40, 1), o);
  const auto red = solve_primal_dual(rg.topology(), *q.reduce(p), NodeValues(40, 1), o);
  CHECK(std::abs(full.objective - red.objective) <= 2 * o.tol * std::abs(full.objective));
}

TEST_CASE("diverging steps are reported with the iteration index") {
  const Overconfident f(2);
  const Graph g = pair_graph(1.0);
  try {
    solve_primal_dual(g.topology(), f, NodeValues(1, {1.0, -1.0}), tight());
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("iteration") != std::string::npos);
  }
}

TEST_CASE("input validation") {
  const QuadraticFidelity q(NodeValues(1, {0.0, 2.0}));
  const Graph g = pair_graph(1.0);
  CHECK_THROWS_AS(solve_primal_dual(g.topology(), q, NodeValues(3, 1), {}), InputError);
  PrimalDualOptions o;
  o.tol = 0.0;
  CHECK_THROWS_AS(solve_primal_dual(g.topology(), q, NodeValues(2, 1), o), InputError);
}

TEST_CASE("results do not depend on the thread count") {
  const std::size_t side = 80;
  std::vector<WeightedEdge> e;
  for (VertexId i = 0; i < side; ++i)
    for (VertexId j = 0; j < side; ++j) {
      const VertexId v = i * side + j;
      if (j + 1 < side) e.push_back({v, v + 1, 0.5});
      if (i + 1 < side) e.push_back({v, VertexId(v + side), 0.5});
    }
  const Graph g = Graph::build(side * side, e);
  std::mt19937_64 rng(14);
  std::normal_distribution<double> n(0.0, 1.0);
  NodeValues y(side * side, 1);
  for (double& a : y.flat()) a = n(rng);
  const QuadraticFidelity q(y);
  PrimalDualOptions o;
  o.max_iter = 200;
  o.num_threads = 1;
  const auto a = solve_primal_dual(g.topology(), q, NodeValues(side * side, 1), o);
  o.num_threads = 4;
  const auto b = solve_primal_dual(g.topology(), q, NodeValues(side * side, 1), o);
  CHECK(a.values == b.values);
  CHECK(a.objective == b.objective);
}
