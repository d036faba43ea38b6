#include "pcp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

namespace pcp {

namespace {

constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();

std::uint64_t pair_key(VertexId u, VertexId v) {
  return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(v);
}

}  // namespace

Graph Graph::build(std::size_t num_vertices, std::span<const WeightedEdge> edges) {
  if (num_vertices >= std::numeric_limits<VertexId>::max()) {
    throw InputError("build_graph: too many vertices");
  }
  Graph g;
  std::unordered_map<std::uint64_t, EdgeId> seen;
  seen.reserve(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto [u, v, w] = edges[i];
    if (u >= num_vertices || v >= num_vertices) {
      throw InputError("build_graph: edge " + std::to_string(i) + " has a vertex id out of range");
    }
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InputError("build_graph: edge " + std::to_string(i) + " has a negative or non-finite weight");
    }
    if (u == v) throw InputError("build_graph: edge " + std::to_string(i) + " is a self-loop");
    if (u > v) std::swap(u, v);
    auto [it, inserted] = seen.try_emplace(pair_key(u, v), static_cast<EdgeId>(g.edges_.size()));
    if (inserted) {
      g.edges_.push_back({u, v});
      g.weights_.push_back(w);
    } else {
      g.weights_[it->second] += w;
    }
  }

  g.offsets_.assign(num_vertices + 1, 0);
  for (const Edge& e : g.edges_) {
    ++g.offsets_[e.u + 1];
    ++g.offsets_[e.v + 1];
  }
  for (std::size_t v = 0; v < num_vertices; ++v) g.offsets_[v + 1] += g.offsets_[v];
  g.adjacency_.resize(2 * g.edges_.size());
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (EdgeId e = 0; e < g.edges_.size(); ++e) {
    const Edge& ed = g.edges_[e];
    g.adjacency_[fill[ed.u]++] = {ed.v, e};
    g.adjacency_[fill[ed.v]++] = {ed.u, e};
  }
  return g;
}

Partition::Partition(std::size_t num_vertices, std::vector<std::vector<VertexId>> components)
    : component_of_(num_vertices, kUnassigned), components_(std::move(components)) {
  std::size_t covered = 0;
  for (std::uint32_t c = 0; c < components_.size(); ++c) {
    if (components_[c].empty()) throw InputError("Partition: empty component");
    for (VertexId v : components_[c]) {
      if (v >= num_vertices) throw InputError("Partition: vertex id out of range");
      if (component_of_[v] != kUnassigned) throw InputError("Partition: components overlap");
      component_of_[v] = c;
      ++covered;
    }
  }
  if (covered != num_vertices) throw InputError("Partition: components do not cover all vertices");
}

Partition Partition::connected_components(const Graph& graph) {
  const std::size_t n = graph.num_vertices();
  std::vector<VertexId> all(n);
  for (VertexId v = 0; v < n; ++v) all[v] = v;
  std::vector<std::uint32_t> zero(n, 0);
  return Partition(n, constant_connected_components(graph, all, zero));
}

Partition Partition::singletons(std::size_t num_vertices) {
  std::vector<std::vector<VertexId>> comps(num_vertices);
  for (VertexId v = 0; v < num_vertices; ++v) comps[v] = {v};
  return Partition(num_vertices, std::move(comps));
}

std::vector<std::vector<VertexId>> constant_connected_components(
    const Graph& graph, std::span<const VertexId> subset, std::span<const std::uint32_t> labels) {
  std::vector<std::vector<VertexId>> out;
  if (subset.empty()) return out;
  // 0: outside subset, 1: in subset and unvisited, 2: visited
  std::vector<std::uint8_t> state(graph.num_vertices(), 0);
  for (VertexId v : subset) state[v] = 1;
  std::vector<VertexId> queue;
  for (VertexId root : subset) {
    if (state[root] != 1) continue;
    queue.clear();
    queue.push_back(root);
    state[root] = 2;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const VertexId v = queue[head];
      for (const Neighbor& nb : graph.neighbors(v)) {
        if (state[nb.vertex] == 1 && labels[nb.vertex] == labels[v]) {
          state[nb.vertex] = 2;
          queue.push_back(nb.vertex);
        }
      }
    }
    std::sort(queue.begin(), queue.end());
    out.push_back(queue);
  }
  return out;
}

std::vector<std::vector<std::vector<VertexId>>> constant_connected_components(
    const Graph& graph, const Partition& partition, std::span<const std::uint32_t> labels) {
  std::vector<std::vector<std::vector<VertexId>>> out(partition.num_components());
  std::vector<std::uint8_t> visited(graph.num_vertices(), 0);
  std::vector<VertexId> queue;
  for (std::size_t c = 0; c < partition.num_components(); ++c) {
    for (VertexId root : partition.component(c)) {
      if (visited[root]) continue;
      queue.clear();
      queue.push_back(root);
      visited[root] = 1;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        const VertexId v = queue[head];
        for (const Neighbor& nb : graph.neighbors(v)) {
          const VertexId u = nb.vertex;
          if (!visited[u] && partition.component_of(u) == c && labels[u] == labels[v]) {
            visited[u] = 1;
            queue.push_back(u);
          }
        }
      }
      std::sort(queue.begin(), queue.end());
      out[c].push_back(queue);
    }
  }
  return out;
}

ReducedGraph build_reduced_graph(const Graph& graph, const Partition& partition) {
  ReducedGraph rg;
  const std::size_t nc = partition.num_components();
  rg.num_components = nc;
  rg.component_sizes.resize(nc);
  // slot[B] holds the index of reduced edge (A, B) while scanning component A
  std::vector<std::size_t> slot(nc, std::numeric_limits<std::size_t>::max());
  std::vector<std::uint32_t> touched;
  for (std::uint32_t a = 0; a < nc; ++a) {
    rg.component_sizes[a] = partition.component(a).size();
    touched.clear();
    for (VertexId v : partition.component(a)) {
      for (const Neighbor& nb : graph.neighbors(v)) {
        const std::uint32_t b = partition.component_of(nb.vertex);
        if (b <= a) continue;
        if (slot[b] == std::numeric_limits<std::size_t>::max()) {
          slot[b] = rg.edges.size();
          rg.edges.push_back({a, b});
          rg.weights.push_back(0.0);
          touched.push_back(b);
        }
        rg.weights[slot[b]] += graph.weight(nb.edge);
      }
    }
    for (std::uint32_t b : touched) slot[b] = std::numeric_limits<std::size_t>::max();
  }
  return rg;
}

std::vector<std::vector<VertexId>> balance_decompose(const Graph& graph,
                                                     std::span<const VertexId> component,
                                                     std::size_t cap) {
  if (cap == 0) throw InputError("balance_decompose: cap must be at least 1");
  std::vector<VertexId> order(component.begin(), component.end());
  std::sort(order.begin(), order.end());
  std::vector<std::uint8_t> state(graph.num_vertices(), 0);  // 1: free member, 2: taken
  for (VertexId v : order) state[v] = 1;

  std::vector<std::vector<VertexId>> parts;
  std::vector<VertexId> queue;
  for (VertexId root : order) {
    if (state[root] != 1) continue;
    queue.clear();
    queue.push_back(root);
    state[root] = 2;
    std::size_t head = 0;
    while (head < queue.size() && queue.size() < cap) {
      const VertexId v = queue[head++];
      for (const Neighbor& nb : graph.neighbors(v)) {
        if (queue.size() >= cap) break;
        if (state[nb.vertex] == 1) {
          state[nb.vertex] = 2;
          queue.push_back(nb.vertex);
        }
      }
    }
    std::sort(queue.begin(), queue.end());
    parts.push_back(queue);
  }
  return parts;
}

bool is_connected_subset(const Graph& graph, std::span<const VertexId> subset) {
  if (subset.empty()) return true;
  std::vector<std::uint32_t> zero(graph.num_vertices(), 0);
  return constant_connected_components(graph, subset, zero).size() == 1;
}

}  // namespace pcp
