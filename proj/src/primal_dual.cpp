#include "pcp/primal_dual.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <string>

#include "pcp/parallel.hpp"

namespace pcp {

namespace {

// Node -> incident edges, with the sign of the node in (D x)_e = x_u - x_v.
struct Incidence {
  std::vector<std::size_t> offsets;
  std::vector<EdgeId> edges;
  std::vector<double> signs;

  explicit Incidence(const EdgeTopology& t) : offsets(t.num_nodes + 1, 0) {
    for (const Edge& e : t.edges) {
      ++offsets[e.u + 1];
      ++offsets[e.v + 1];
    }
    for (std::size_t v = 0; v < t.num_nodes; ++v) offsets[v + 1] += offsets[v];
    edges.resize(offsets.back());
    signs.resize(offsets.back());
    std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
    for (EdgeId e = 0; e < t.edges.size(); ++e) {
      edges[fill[t.edges[e].u]] = e;
      signs[fill[t.edges[e].u]++] = 1.0;
      edges[fill[t.edges[e].v]] = e;
      signs[fill[t.edges[e].v]++] = -1.0;
    }
  }
  std::size_t degree(std::size_t v) const { return offsets[v + 1] - offsets[v]; }
};

void project_ball(std::span<double> p, double radius) {
  if (p.size() == 1) {
    p[0] = std::clamp(p[0], -radius, radius);
    return;
  }
  double norm = 0.0;
  for (double a : p) norm += a * a;
  norm = std::sqrt(norm);
  if (norm > radius) {
    const double scale = norm > 0.0 ? radius / norm : 0.0;
    for (double& a : p) a *= scale;
  }
}

void check_topology(const EdgeTopology& topology, const Functional& functional, const NodeValues& x) {
  if (topology.num_nodes != functional.num_nodes() || x.num_nodes() != functional.num_nodes() ||
      x.dim() != functional.dim()) {
    throw InputError("primal-dual: graph, functional and initial values disagree on shape");
  }
  if (topology.weights.size() != topology.edges.size()) throw InputError("primal-dual: one weight per edge expected");
}

}  // namespace

PrimalDualResult solve_primal_dual(const EdgeTopology& topology, const Functional& functional,
                                   NodeValues init, const PrimalDualOptions& options) {
  check_topology(topology, functional, init);
  if (!(options.tol > 0.0)) throw InputError("primal-dual: tol must be positive");
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const int threads = std::max(1, options.num_threads);
  const std::size_t n = topology.num_nodes;
  const std::size_t m = topology.edges.size();
  const std::size_t dim = functional.dim();
  const Incidence inc(topology);

  // step sizes
  std::vector<double> lip = functional.lipschitz_diagonal();
  double lip_max = 0.0;
  for (double l : lip) lip_max = std::max(lip_max, l);
  for (double& l : lip) l = lip_max > 0.0 ? std::max(l, 1e-12 * lip_max) : 1.0;
  std::vector<double> sigma(m);
  for (std::size_t e = 0; e < m; ++e) {
    const auto [u, v] = topology.edges[e];
    sigma[e] = 0.25 * std::min(lip[u] / static_cast<double>(inc.degree(u)),
                               lip[v] / static_cast<double>(inc.degree(v)));
  }
  std::vector<double> tau(n);
  for (std::size_t v = 0; v < n; ++v) {
    double s = 0.0;
    for (std::size_t i = inc.offsets[v]; i < inc.offsets[v + 1]; ++i) s += sigma[inc.edges[i]];
    tau[v] = 1.0 / (lip[v] + 2.0 * s);
  }

  PrimalDualResult result;
  functional.make_feasible(init);
  NodeValues x = std::move(init);
  NodeValues x_bar = x;
  NodeValues x_old = x;
  NodeValues grad(n, dim);
  NodeValues p(std::max<std::size_t>(m, 1), dim, 0.0);
  if (m == 0) p = NodeValues();

  double objective = eval_objective(functional, topology, x, threads);
  if (!std::isfinite(objective)) throw SolverError("primal-dual: non-finite objective at the initial point");
  result.initial_objective = objective;
  const NodeValues x_init = x;
  if (options.record_trace) {
    result.trace_time_s.push_back(elapsed());
    result.trace_objective.push_back(objective);
  }

  std::deque<double> recent{objective};
  std::size_t it = 0;
  while (it < options.max_iter && n > 0) {
    ++it;
    parallel_for(m, threads, [&](std::size_t e) {
      const auto [u, v] = topology.edges[e];
      auto pe = p.row(e);
      for (std::size_t k = 0; k < dim; ++k) pe[k] += sigma[e] * (x_bar.at(u, k) - x_bar.at(v, k));
      project_ball(pe, topology.weights[e]);
    });

    functional.gradient_smooth(x, grad, threads);
    std::swap(x_old, x);
    parallel_for(n, threads, [&](std::size_t v) {
      for (std::size_t k = 0; k < dim; ++k) {
        double div = 0.0;
        for (std::size_t i = inc.offsets[v]; i < inc.offsets[v + 1]; ++i) {
          div += inc.signs[i] * p.at(inc.edges[i], k);
        }
        x.at(v, k) = x_old.at(v, k) - tau[v] * (grad.at(v, k) + div);
      }
    });
    functional.prox_nonsmooth(x, tau, threads);
    parallel_for(n * dim, threads, [&](std::size_t i) {
      x_bar.flat()[i] = 2.0 * x.flat()[i] - x_old.flat()[i];
    });

    objective = eval_objective(functional, topology, x, threads);
    if (!std::isfinite(objective)) {
      throw SolverError("primal-dual: non-finite objective at iteration " + std::to_string(it));
    }
    if (options.record_trace) {
      result.trace_time_s.push_back(elapsed());
      result.trace_objective.push_back(objective);
    }
    recent.push_back(objective);
    if (recent.size() > options.window + 1) recent.pop_front();
    if (recent.size() == options.window + 1) {
      const auto [lo, hi] = std::minmax_element(recent.begin(), recent.end());
      if (*hi - *lo <= options.tol * std::abs(objective)) {
        result.converged = true;
        break;
      }
    }
  }

  result.iterations = it;
  if (objective <= result.initial_objective) {
    result.values = std::move(x);
    result.objective = objective;
  } else {
    result.values = x_init;
    result.objective = result.initial_objective;
  }
  result.duals = std::move(p);
  return result;
}

double kkt_residual(const EdgeTopology& topology, const Functional& functional,
                    const NodeValues& x, const NodeValues& p) {
  check_topology(topology, functional, x);
  const std::size_t n = topology.num_nodes;
  const std::size_t m = topology.edges.size();
  const std::size_t dim = functional.dim();
  if (m > 0 && (p.num_nodes() != m || p.dim() != dim)) throw InputError("kkt_residual: one dual row per edge expected");
  const Incidence inc(topology);

  NodeValues grad(n, dim);
  functional.gradient_smooth(x, grad);
  NodeValues t(n, dim);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t k = 0; k < dim; ++k) {
      double div = 0.0;
      for (std::size_t i = inc.offsets[v]; i < inc.offsets[v + 1]; ++i) div += inc.signs[i] * p.at(inc.edges[i], k);
      t.at(v, k) = x.at(v, k) - grad.at(v, k) - div;
    }
  }
  functional.prox_nonsmooth(t, 1.0);
  double s = 0.0;
  for (std::size_t i = 0; i < n * dim; ++i) {
    const double r = x.flat()[i] - t.flat()[i];
    s += r * r;
  }
  std::vector<double> q(dim);
  for (std::size_t e = 0; e < m; ++e) {
    const auto [u, v] = topology.edges[e];
    for (std::size_t k = 0; k < dim; ++k) q[k] = p.at(e, k) + x.at(u, k) - x.at(v, k);
    project_ball(q, topology.weights[e]);
    for (std::size_t k = 0; k < dim; ++k) s += (p.at(e, k) - q[k]) * (p.at(e, k) - q[k]);
  }
  return std::sqrt(s);
}

}  // namespace pcp
