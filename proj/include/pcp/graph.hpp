#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pcp/node_values.hpp"

namespace pcp {

/// Undirected edge, stored with u < v.
struct Edge {
  VertexId u;
  VertexId v;
  bool operator==(const Edge&) const = default;
};

struct WeightedEdge {
  VertexId u;
  VertexId v;
  double w;
};

struct Neighbor {
  VertexId vertex;
  EdgeId edge;
};

/// Node count plus weighted edge list; the common input of the primal-dual
/// solver, built from either a Graph or a ReducedGraph.
struct EdgeTopology {
  std::size_t num_nodes = 0;
  std::span<const Edge> edges;
  std::span<const double> weights;
};

/// Immutable weighted undirected graph in compressed adjacency form.
///
/// Each edge id appears in the adjacency of both endpoints. Adjacency lists
/// keep the order in which edges were first seen in the input.
class Graph {
 public:
  Graph() = default;

  /// Builds the graph; duplicate pairs are merged by summing their weights.
  /// Throws InputError on out-of-range ids, negative weights, or self-loops.
  static Graph build(std::size_t num_vertices, std::span<const WeightedEdge> edges);

  std::size_t num_vertices() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const { return edges_.size(); }

  std::span<const Neighbor> neighbors(VertexId v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  std::size_t degree(VertexId v) const { return offsets_[v + 1] - offsets_[v]; }
  /// Index of the first adjacency slot of v (slots are numbered globally).
  std::size_t adjacency_offset(VertexId v) const { return offsets_[v]; }

  const Edge& endpoints(EdgeId e) const { return edges_[e]; }
  double weight(EdgeId e) const { return weights_[e]; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const double> weights() const { return weights_; }

  EdgeTopology topology() const { return {num_vertices(), edges_, weights_}; }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
  std::vector<Edge> edges_;
  std::vector<double> weights_;
};

/// Disjoint cover of the vertices by components, stored in both directions.
class Partition {
 public:
  Partition() = default;
  /// Throws InputError unless `components` is a disjoint cover of [0, n).
  Partition(std::size_t num_vertices, std::vector<std::vector<VertexId>> components);

  /// Connected components of the whole graph (the initial cut-pursuit
  /// partition when the graph is connected is the single set V).
  static Partition connected_components(const Graph& graph);
  static Partition singletons(std::size_t num_vertices);

  std::size_t num_vertices() const { return component_of_.size(); }
  std::size_t num_components() const { return components_.size(); }
  std::uint32_t component_of(VertexId v) const { return component_of_[v]; }
  std::span<const std::uint32_t> component_of() const { return component_of_; }
  std::span<const VertexId> component(std::size_t c) const { return components_[c]; }
  const std::vector<std::vector<VertexId>>& components() const { return components_; }

  bool operator==(const Partition& other) const { return components_ == other.components_; }

 private:
  std::vector<std::uint32_t> component_of_;
  std::vector<std::vector<VertexId>> components_;
};

/// Adjacency between components, with aggregated crossing weights.
struct ReducedGraph {
  std::size_t num_components = 0;
  std::vector<Edge> edges;  // (A, B) with A < B
  std::vector<double> weights;
  std::vector<std::size_t> component_sizes;

  EdgeTopology topology() const { return {num_components, edges, weights}; }
};

/// Maximal subsets of `subset` connected through edges whose endpoints both
/// lie in `subset` and carry equal labels. `labels` is indexed by vertex id.
/// Each returned set is sorted; sets are ordered by their first BFS root.
std::vector<std::vector<VertexId>> constant_connected_components(
    const Graph& graph, std::span<const VertexId> subset, std::span<const std::uint32_t> labels);

/// Same as above for every component of `partition` at once: pieces never
/// cross component borders. Returns, per component, its list of pieces.
std::vector<std::vector<std::vector<VertexId>>> constant_connected_components(
    const Graph& graph, const Partition& partition, std::span<const std::uint32_t> labels);

ReducedGraph build_reduced_graph(const Graph& graph, const Partition& partition);

/// Greedy breadth-first decomposition of a connected vertex set into
/// connected parts of at most `cap` vertices. Roots are taken as the lowest
/// unassigned id; neighbors are visited in adjacency order.
std::vector<std::vector<VertexId>> balance_decompose(const Graph& graph,
                                                     std::span<const VertexId> component,
                                                     std::size_t cap);

/// True when `subset` induces a connected subgraph (empty sets are connected).
bool is_connected_subset(const Graph& graph, std::span<const VertexId> subset);

}  // namespace pcp
