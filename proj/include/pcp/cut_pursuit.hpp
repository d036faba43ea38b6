#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcp/functional.hpp"
#include "pcp/graph.hpp"
#include "pcp/maxflow.hpp"

namespace pcp {

enum class DirectionMode { two_label, three_label, multidim };

std::string to_string(DirectionMode mode);

struct PcpConfig {
  /// Extra stop rule on the relative objective decrease; 0 disables it.
  double outer_tol = 0.0;
  std::size_t max_outer_iter = 1000;
  double reduced_tol = 1e-6;
  std::size_t reduced_max_iter = 100000;
  bool balance = false;
  double balance_cap_factor = 1.0;
  /// Only sets the balancing cap; the actual parallelism is num_threads.
  std::size_t worker_count = 1;
  /// 0 = OpenMP default.
  int num_threads = 0;
  /// Unset: two_label for scalar smooth problems, three_label for scalar
  /// problems with a nonsmooth part, multidim otherwise.
  std::optional<DirectionMode> direction_mode;
};

struct TraceRow {
  std::size_t iter = 0;
  double time_s = 0.0;
  double objective = 0.0;
  std::size_t components = 0;
  double split_value = 0.0;  // sum of the best F'_U found in this iteration
  bool balanced = false;
  double split_time_s = 0.0;
};

struct SolverTrace {
  std::vector<TraceRow> rows;

  double total_split_time() const;
  /// Header `iter,time_s,objective,components,balanced`.
  void write_csv(std::ostream& out) const;
};

struct PcpResult {
  NodeValues x;
  Partition partition;
  SolverTrace trace;
  /// Largest increase of F'_U across expansion sweeps seen in any split
  /// (0 when values never increased).
  double max_sweep_increase = 0.0;
};

PcpResult run_cut_pursuit(const Graph& graph, const Functional& functional, const PcpConfig& config);

DirectionMode default_direction_mode(const Functional& functional);

/// Candidate directions shared by the component whose current value is
/// `center`. Mode two_label gives {-1, +1}, three_label {-1, 0, +1}; multidim
/// gives the zero direction followed by the functional's shift directions,
/// with zero vectors and duplicates removed.
std::vector<std::vector<double>> choose_directions(const Functional& functional,
                                                   std::span<const double> center, DirectionMode mode);

/// Steepest-direction subproblem over a vertex set S (a component or a
/// balancing part of one), with candidates shared by S.
struct SplitProblem {
  std::vector<VertexId> vertices;                  // sorted, global ids
  std::vector<std::vector<double>> directions;     // D
  std::vector<double> unary;                       // |S| x |D|, may hold +inf
  std::vector<Edge> local_edges;                   // internal edges, local ids, u < v
  std::vector<double> edge_weights;
  std::vector<EdgeId> graph_edges;                 // matching global edge ids
  std::vector<double> direction_distance;          // |D| x |D|, ||d_a - d_b||

  std::size_t size() const { return vertices.size(); }
  std::size_t num_directions() const { return directions.size(); }
  double unary_at(std::size_t i, std::size_t d) const { return unary[i * directions.size() + d]; }
  double pair_cost(std::size_t a, std::size_t b) const { return direction_distance[a * directions.size() + b]; }
  /// F'_S of a labeling (one direction index per local vertex).
  double value(std::span<const std::uint32_t> labels) const;
};

/// Builds the split problem on `subset` of component `component`: each unary
/// combines the functional's directional derivative with the total-variation
/// terms of edges leaving `subset`'s component. Edges between different
/// components whose endpoints hold equal values contribute w ||d||.
/// `grad` is the smooth gradient at x.
SplitProblem build_split_problem(const Graph& graph, const Functional& functional, const NodeValues& x,
                                 const NodeValues& grad, std::span<const std::uint32_t> component_of,
                                 std::span<const VertexId> subset,
                                 std::vector<std::vector<double>> directions);

struct SplitLabels {
  std::vector<std::uint32_t> labels;   // per local vertex
  double value = 0.0;
  std::vector<double> sweep_values;    // value after the start and after each sweep
};

/// Exact single cut for two candidates, expansion moves otherwise (at most
/// five sweeps, moves accepted only when they strictly decrease the value).
/// Uses a private flow network.
SplitLabels solve_multilabel_split(const SplitProblem& split);

/// Same algorithm on a shared network whose node and edge ids are the
/// problem's global ids; `network` part tags must isolate the problem.
SplitLabels solve_multilabel_split(const SplitProblem& split, FlowNetwork& network);

/// Serial reference for one component: returns the new pieces of U (or {U}).
/// `parts` is an optional balancing decomposition of U.
std::vector<std::vector<VertexId>> split_component(
    const Graph& graph, const Functional& functional, const NodeValues& x,
    std::span<const std::uint32_t> component_of, std::span<const VertexId> component,
    const std::vector<std::vector<double>>& directions,
    std::span<const std::vector<VertexId>> parts = {});

struct SplitOutcome {
  std::vector<std::vector<std::vector<VertexId>>> pieces;  // per component
  std::vector<double> component_values;                    // best F'_U per component
  double max_sweep_increase = 0.0;
  bool balanced = false;
};

struct SplitSettings {
  DirectionMode mode = DirectionMode::two_label;
  /// 0 disables balancing; otherwise components larger than cap are cut
  /// per balancing part.
  std::size_t balance_cap = 0;
  int num_threads = 1;
};

/// Split phase over all components, run concurrently on one shared network.
SplitOutcome split_all_components(const Graph& graph, const Functional& functional, const NodeValues& x,
                                  const Partition& partition, const SplitSettings& settings);

/// Same result computed one component at a time with private networks.
SplitOutcome split_all_components_serial(const Graph& graph, const Functional& functional,
                                         const NodeValues& x, const Partition& partition,
                                         const SplitSettings& settings);

/// cap = ceil(factor * |V| / workers), at least 1.
std::size_t balance_cap(std::size_t num_vertices, double factor, std::size_t workers);

}  // namespace pcp
