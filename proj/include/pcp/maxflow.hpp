#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pcp/graph.hpp"

namespace pcp {

/// Cut side of a node: 0 = source side, 1 = sink side. A node on the source
/// side pays its sink capacity; a node on the sink side pays its source
/// capacity. In binary labeling terms, label 0 is the source side.
using CutLabel = std::uint8_t;

struct CutResult {
  std::vector<CutLabel> labeling;
  double cut_value = 0.0;
  double flow_value = 0.0;
};

/// Residual network for binary min-cut problems, with augmenting-path
/// (search-tree reuse) max-flow restricted to tagged node subsets.
///
/// Arcs mirror the adjacency of an undirected edge list: every edge (u, v)
/// owns one arc u->v and one arc v->u. Solver state is stored per node and
/// per arc, so disjoint parts can be solved concurrently on the same network
/// as long as part tags are assigned beforehand.
class FlowNetwork {
 public:
  FlowNetwork() = default;
  FlowNetwork(std::size_t num_nodes, std::span<const Edge> edges);
  explicit FlowNetwork(const Graph& graph);

  std::size_t num_nodes() const { return source_cap_.size(); }
  std::size_t num_edges() const { return edge_arc_.size(); }

  void set_terminal_caps(VertexId v, double source_cap, double sink_cap);
  double source_cap(VertexId v) const { return source_cap_[v]; }
  double sink_cap(VertexId v) const { return sink_cap_[v]; }

  /// Accumulates a unary term; call normalize_terminals before solving.
  void add_unary(VertexId v, double cost_label0, double cost_label1) {
    sink_cap_[v] += cost_label0;
    source_cap_[v] += cost_label1;
  }
  /// Sets both arc capacities of edge e = (u, v), u < v.
  void set_edge_caps(EdgeId e, double cap_uv, double cap_vu);
  double arc_cap(EdgeId e, bool forward) const {
    const std::size_t a = edge_arc_[e];
    return capacity_[forward ? a : arc_sister_[a]];
  }
  /// Adds a submodular pairwise term over the labels of (u, v), u < v:
  /// energies e00, e01, e10, e11 with e00 + e11 <= e01 + e10.
  void add_pairwise(EdgeId e, double e00, double e01, double e10, double e11);
  /// Moves the common part of each node's two terminal capacities into a
  /// returned constant. Throws SolverError if both are infinite.
  double normalize_terminals(std::span<const VertexId> nodes);
  /// Zeroes terminal capacities and every arc leaving the given nodes.
  void reset_nodes(std::span<const VertexId> nodes);

  /// Tags nodes with their part index; arcs between different tags are
  /// ignored by the solver. Must not run concurrently with solve_part.
  void assign_parts(std::span<const std::vector<VertexId>> parts);
  void assign_single_part();
  std::uint32_t part_of(VertexId v) const { return part_tag_[v]; }

  /// Max-flow on the subnetwork induced by `nodes` (all carrying the same
  /// tag). Writes cut sides for those nodes and returns the flow value.
  double solve_part(std::span<const VertexId> nodes);
  CutLabel side(VertexId v) const { return side_[v]; }

  /// Cut value of a labeling under the original capacities (all arcs).
  double evaluate_cut(std::span<const CutLabel> labeling) const;
  /// Same, ignoring arcs whose endpoints carry different part tags.
  double evaluate_cut_within_parts(std::span<const CutLabel> labeling) const;

 private:
  friend class BkSolver;

  std::vector<std::size_t> offsets_;
  std::vector<VertexId> arc_head_;
  std::vector<std::uint32_t> arc_sister_;
  std::vector<double> capacity_;
  std::vector<double> residual_;
  std::vector<std::uint32_t> edge_arc_;  // arc u->v of edge (u, v)

  std::vector<double> source_cap_;
  std::vector<double> sink_cap_;

  std::vector<double> terminal_residual_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> timestamp_;
  std::vector<std::uint32_t> dist_;
  std::vector<std::uint8_t> in_sink_tree_;
  std::vector<std::uint8_t> active_;
  std::vector<std::uint32_t> part_tag_;
  std::vector<CutLabel> side_;
};

CutResult solve_mincut(FlowNetwork& network);

/// Solves every part independently, border arcs between parts acting as
/// capacity 0. Parts must be disjoint and cover all nodes. The result does
/// not depend on `num_threads`.
CutResult solve_mincut_restricted(FlowNetwork& network,
                                  std::span<const std::vector<VertexId>> parts,
                                  int num_threads = 1);

struct UnaryCost {
  double label0;
  double label1;
};

struct BinaryCutNetwork {
  FlowNetwork network;
  double constant = 0.0;  // energy = cut value + constant
};

/// Standard reduction of sum_v unary_v(l_v) + sum_e w_e [l_u != l_v] to a
/// flow network. Throws InputError on negative weights or on nodes whose two
/// costs are both infinite.
BinaryCutNetwork build_binary_cut_network(std::span<const UnaryCost> unary_costs,
                                          std::span<const WeightedEdge> binary_weights);

double binary_energy(std::span<const UnaryCost> unary_costs,
                     std::span<const WeightedEdge> binary_weights,
                     std::span<const CutLabel> labeling);

struct BruteForceCut {
  std::vector<CutLabel> labeling;
  double value = 0.0;
};

inline constexpr std::size_t kBruteForceMaxNodes = 20;

/// Exhaustive minimum over all 2^n labelings (n <= 20); ties go to the
/// lexicographically smallest labeling.
BruteForceCut brute_force_mincut(std::span<const UnaryCost> unary_costs,
                                 std::span<const WeightedEdge> binary_weights);
BruteForceCut brute_force_mincut(const FlowNetwork& network);

}  // namespace pcp
