#pragma once

#include <cstddef>
#include <vector>

#include "pcp/functional.hpp"
#include "pcp/graph.hpp"

namespace pcp {

struct PrimalDualOptions {
  /// Stop when the objective varies by less than tol * |F| over `window`
  /// consecutive iterations.
  double tol = 1e-6;
  std::size_t max_iter = 100000;
  std::size_t window = 10;
  int num_threads = 1;
  bool record_trace = false;
};

struct PrimalDualResult {
  NodeValues values;
  NodeValues duals;  // one row per edge, ||p_e|| <= w_e
  std::size_t iterations = 0;
  double objective = 0.0;
  double initial_objective = 0.0;
  bool converged = false;
  std::vector<double> trace_time_s;  // index 0 is the initial point
  std::vector<double> trace_objective;
};

/// First-order primal-dual solver for
///   min_x f_smooth(x) + g(x) + sum_e w_e ||x_u - x_v||
/// with diagonal step sizes: per-edge dual steps and per-node primal steps
/// satisfying tau_v (M_v / 2 + 2 sum_{e ~ v} sigma_e) < 1, where M is the
/// functional's Lipschitz diagonal.
///
/// Each iteration projects the dual ascent onto the weight balls, takes a
/// forward step on the smooth part plus the dual divergence, applies the
/// nonsmooth prox and over-relaxes the primal for the next dual step.
/// The returned point never has a higher objective than `init` (after the
/// initial projection onto the nonsmooth domain).
///
/// Throws SolverError when the objective becomes non-finite.
PrimalDualResult solve_primal_dual(const EdgeTopology& topology, const Functional& functional,
                                   NodeValues init, const PrimalDualOptions& options = {});

/// Norm of the fixed-point residual of the unit-step primal-dual map; zero
/// exactly at saddle points.
double kkt_residual(const EdgeTopology& topology, const Functional& functional,
                    const NodeValues& x, const NodeValues& p);

}  // namespace pcp
