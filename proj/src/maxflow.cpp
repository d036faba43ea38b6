#include "pcp/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <string>

#include "pcp/parallel.hpp"

namespace pcp {

namespace {

constexpr std::uint32_t kFree = std::numeric_limits<std::uint32_t>::max();
constexpr std::uint32_t kTerminal = kFree - 1;
constexpr std::uint32_t kOrphan = kFree - 2;
constexpr std::uint32_t kInfiniteDist = std::numeric_limits<std::uint32_t>::max();
constexpr VertexId kNone = std::numeric_limits<VertexId>::max();

// residuals at or below this fraction of the largest capacity count as saturated
constexpr double kSaturationTol = 1e-12;

}  // namespace

FlowNetwork::FlowNetwork(std::size_t num_nodes, std::span<const Edge> edges) {
  if (2 * edges.size() >= kOrphan) throw InputError("FlowNetwork: too many edges");
  offsets_.assign(num_nodes + 1, 0);
  for (const Edge& e : edges) {
    if (e.u >= num_nodes || e.v >= num_nodes || e.u == e.v) {
      throw InputError("FlowNetwork: invalid edge endpoints");
    }
    ++offsets_[e.u + 1];
    ++offsets_[e.v + 1];
  }
  for (std::size_t v = 0; v < num_nodes; ++v) offsets_[v + 1] += offsets_[v];
  const std::size_t num_arcs = 2 * edges.size();
  arc_head_.resize(num_arcs);
  arc_sister_.resize(num_arcs);
  edge_arc_.resize(edges.size());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::size_t fwd = fill[edges[e].u]++;
    const std::size_t bwd = fill[edges[e].v]++;
    arc_head_[fwd] = edges[e].v;
    arc_head_[bwd] = edges[e].u;
    arc_sister_[fwd] = static_cast<std::uint32_t>(bwd);
    arc_sister_[bwd] = static_cast<std::uint32_t>(fwd);
    edge_arc_[e] = static_cast<std::uint32_t>(fwd);
  }
  capacity_.assign(num_arcs, 0.0);
  residual_.assign(num_arcs, 0.0);
  source_cap_.assign(num_nodes, 0.0);
  sink_cap_.assign(num_nodes, 0.0);
  terminal_residual_.assign(num_nodes, 0.0);
  parent_.assign(num_nodes, kFree);
  timestamp_.assign(num_nodes, 0);
  dist_.assign(num_nodes, 0);
  in_sink_tree_.assign(num_nodes, 0);
  active_.assign(num_nodes, 0);
  part_tag_.assign(num_nodes, 0);
  side_.assign(num_nodes, 1);
}

FlowNetwork::FlowNetwork(const Graph& graph) : FlowNetwork(graph.num_vertices(), graph.edges()) {}

void FlowNetwork::set_terminal_caps(VertexId v, double source_cap, double sink_cap) {
  if (!(source_cap >= 0.0) || !(sink_cap >= 0.0)) {
    throw InputError("FlowNetwork: terminal capacities must be nonnegative");
  }
  source_cap_[v] = source_cap;
  sink_cap_[v] = sink_cap;
}

void FlowNetwork::set_edge_caps(EdgeId e, double cap_uv, double cap_vu) {
  if (!(cap_uv >= 0.0) || !(cap_vu >= 0.0)) {
    throw InputError("FlowNetwork: edge capacities must be nonnegative");
  }
  const std::uint32_t a = edge_arc_[e];
  capacity_[a] = cap_uv;
  capacity_[arc_sister_[a]] = cap_vu;
}

void FlowNetwork::add_pairwise(EdgeId e, double e00, double e01, double e10, double e11) {
  const std::uint32_t a = edge_arc_[e];
  const VertexId u = arc_head_[arc_sister_[a]];
  const VertexId v = arc_head_[a];
  add_unary(u, e00, e11);
  double b = e01 - e00;
  double c = e10 - e11;
  // rounding can make a metric term look slightly non-submodular
  if (b + c < 0.0) {
    if (b + c < -1e-9 * (std::abs(b) + std::abs(c))) {
      throw SolverError("FlowNetwork: pairwise term is not submodular");
    }
    c = -b;
  }
  if (b < 0.0) {
    add_unary(u, b, 0.0);
    add_unary(v, -b, 0.0);
    capacity_[arc_sister_[a]] += b + c;
  } else if (c < 0.0) {
    add_unary(u, -c, 0.0);
    add_unary(v, c, 0.0);
    capacity_[a] += b + c;
  } else {
    capacity_[a] += b;
    capacity_[arc_sister_[a]] += c;
  }
}

double FlowNetwork::normalize_terminals(std::span<const VertexId> nodes) {
  double constant = 0.0;
  for (VertexId v : nodes) {
    double& a = source_cap_[v];
    double& b = sink_cap_[v];
    if (std::isnan(a) || std::isnan(b) || (std::isinf(a) && std::isinf(b))) {
      throw SolverError("FlowNetwork: node " + std::to_string(v) + " has no finite label");
    }
    const double m = std::min(a, b);
    constant += m;
    a -= m;
    b -= m;
  }
  return constant;
}

void FlowNetwork::reset_nodes(std::span<const VertexId> nodes) {
  for (VertexId v : nodes) {
    source_cap_[v] = 0.0;
    sink_cap_[v] = 0.0;
    for (std::size_t a = offsets_[v]; a < offsets_[v + 1]; ++a) capacity_[a] = 0.0;
  }
}

void FlowNetwork::assign_parts(std::span<const std::vector<VertexId>> parts) {
  std::vector<std::uint8_t> seen(num_nodes(), 0);
  std::size_t covered = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    for (VertexId v : parts[p]) {
      if (v >= num_nodes()) throw InputError("assign_parts: node id out of range");
      if (seen[v]) throw InputError("assign_parts: parts overlap");
      seen[v] = 1;
      ++covered;
      part_tag_[v] = static_cast<std::uint32_t>(p);
    }
  }
  if (covered != num_nodes()) throw InputError("assign_parts: parts do not cover all nodes");
}

void FlowNetwork::assign_single_part() { std::fill(part_tag_.begin(), part_tag_.end(), 0u); }

double FlowNetwork::evaluate_cut(std::span<const CutLabel> labeling) const {
  double value = 0.0;
  for (VertexId v = 0; v < num_nodes(); ++v) {
    value += labeling[v] == 0 ? sink_cap_[v] : source_cap_[v];
    if (labeling[v] != 0) continue;
    for (std::size_t a = offsets_[v]; a < offsets_[v + 1]; ++a) {
      if (labeling[arc_head_[a]] == 1) value += capacity_[a];
    }
  }
  return value;
}

double FlowNetwork::evaluate_cut_within_parts(std::span<const CutLabel> labeling) const {
  double value = 0.0;
  for (VertexId v = 0; v < num_nodes(); ++v) {
    value += labeling[v] == 0 ? sink_cap_[v] : source_cap_[v];
    if (labeling[v] != 0) continue;
    for (std::size_t a = offsets_[v]; a < offsets_[v + 1]; ++a) {
      const VertexId w = arc_head_[a];
      if (labeling[w] == 1 && part_tag_[w] == part_tag_[v]) value += capacity_[a];
    }
  }
  return value;
}

/// Augmenting paths with two search trees reused across augmentations
/// (Boykov-Kolmogorov), confined to nodes sharing one part tag.
class BkSolver {
 public:
  BkSolver(FlowNetwork& net, std::span<const VertexId> nodes)
      : net_(net), nodes_(nodes), tag_(net.part_tag_[nodes.front()]) {}

  double run() {
    initialize();
    VertexId current = kNone;
    while (true) {
      VertexId i = kNone;
      if (current != kNone && net_.parent_[current] != kFree) {
        i = current;
      } else {
        current = kNone;
        i = next_active();
        if (i == kNone) break;
      }
      const std::uint32_t middle = grow(i);
      ++time_;
      if (middle != kFree) {
        current = i;
        augment(middle);
        adopt_orphans();
      } else {
        current = kNone;
      }
    }
    for (VertexId v : nodes_) {
      net_.side_[v] = (net_.parent_[v] != kFree && !net_.in_sink_tree_[v]) ? 0 : 1;
    }
    return flow_;
  }

 private:
  bool same_part(VertexId v) const { return net_.part_tag_[v] == tag_; }

  void saturate(double& r) const {
    if (r <= eps_) r = 0.0;
  }

  void initialize() {
    double scale = 0.0;
    for (VertexId v : nodes_) {
      for (double c : {net_.source_cap_[v], net_.sink_cap_[v]}) {
        if (std::isfinite(c)) scale = std::max(scale, c);
      }
      for (std::size_t a = net_.offsets_[v]; a < net_.offsets_[v + 1]; ++a) {
        if (same_part(net_.arc_head_[a])) scale = std::max(scale, net_.capacity_[a]);
      }
    }
    eps_ = kSaturationTol * scale;

    for (VertexId v : nodes_) {
      for (std::size_t a = net_.offsets_[v]; a < net_.offsets_[v + 1]; ++a) {
        net_.residual_[a] = net_.capacity_[a];
      }
      const double src = net_.source_cap_[v];
      const double snk = net_.sink_cap_[v];
      if (std::isinf(src) && std::isinf(snk)) {
        throw SolverError("max-flow: node " + std::to_string(v) + " is tied to both terminals with infinite capacity");
      }
      const double common = std::min(src, snk);
      flow_ += common;
      double tr = (src - common) - (snk - common);
      if (std::abs(tr) <= eps_) tr = 0.0;
      net_.terminal_residual_[v] = tr;
      net_.timestamp_[v] = 0;
      net_.active_[v] = 0;
      if (tr > 0.0) {
        net_.in_sink_tree_[v] = 0;
        net_.parent_[v] = kTerminal;
        net_.dist_[v] = 1;
        set_active(v);
      } else if (tr < 0.0) {
        net_.in_sink_tree_[v] = 1;
        net_.parent_[v] = kTerminal;
        net_.dist_[v] = 1;
        set_active(v);
      } else {
        net_.parent_[v] = kFree;
      }
    }
  }

  void set_active(VertexId v) {
    if (!net_.active_[v]) {
      net_.active_[v] = 1;
      active_.push_back(v);
    }
  }

  VertexId next_active() {
    while (!active_.empty()) {
      const VertexId v = active_.front();
      active_.pop_front();
      net_.active_[v] = 0;
      if (net_.parent_[v] != kFree) return v;
    }
    return kNone;
  }

  // Returns the arc from the source tree to the sink tree if one is found.
  std::uint32_t grow(VertexId i) {
    const auto& head = net_.arc_head_;
    const auto& sister = net_.arc_sister_;
    auto& res = net_.residual_;
    const bool sink_tree = net_.in_sink_tree_[i];
    for (std::size_t a = net_.offsets_[i]; a < net_.offsets_[i + 1]; ++a) {
      const VertexId j = head[a];
      if (!same_part(j)) continue;
      const double cap = sink_tree ? res[sister[a]] : res[a];
      if (cap <= 0.0) continue;
      if (net_.parent_[j] == kFree) {
        net_.in_sink_tree_[j] = sink_tree;
        net_.parent_[j] = sister[a];
        net_.timestamp_[j] = net_.timestamp_[i];
        net_.dist_[j] = net_.dist_[i] + 1;
        set_active(j);
      } else if (net_.in_sink_tree_[j] != sink_tree) {
        return sink_tree ? sister[a] : static_cast<std::uint32_t>(a);
      } else if (net_.timestamp_[j] <= net_.timestamp_[i] && net_.dist_[j] > net_.dist_[i]) {
        net_.parent_[j] = sister[a];
        net_.timestamp_[j] = net_.timestamp_[i];
        net_.dist_[j] = net_.dist_[i] + 1;
      }
    }
    return kFree;
  }

  void augment(std::uint32_t middle) {
    const auto& head = net_.arc_head_;
    const auto& sister = net_.arc_sister_;
    auto& res = net_.residual_;
    auto& tr = net_.terminal_residual_;

    double bottleneck = res[middle];
    VertexId i = head[sister[middle]];
    for (std::uint32_t a; (a = net_.parent_[i]) != kTerminal; i = head[a]) {
      bottleneck = std::min(bottleneck, res[sister[a]]);
    }
    bottleneck = std::min(bottleneck, tr[i]);
    i = head[middle];
    for (std::uint32_t a; (a = net_.parent_[i]) != kTerminal; i = head[a]) {
      bottleneck = std::min(bottleneck, res[a]);
    }
    bottleneck = std::min(bottleneck, -tr[i]);
    if (std::isinf(bottleneck)) {
      throw SolverError("max-flow: infinite-capacity path between terminals (no finite cut)");
    }

    res[sister[middle]] += bottleneck;
    res[middle] -= bottleneck;
    saturate(res[middle]);

    i = head[sister[middle]];
    for (std::uint32_t a; (a = net_.parent_[i]) != kTerminal; i = head[a]) {
      res[a] += bottleneck;
      res[sister[a]] -= bottleneck;
      saturate(res[sister[a]]);
      if (res[sister[a]] == 0.0) make_orphan_front(i);
    }
    tr[i] -= bottleneck;
    if (tr[i] <= eps_) {
      tr[i] = 0.0;
      make_orphan_front(i);
    }

    i = head[middle];
    for (std::uint32_t a; (a = net_.parent_[i]) != kTerminal; i = head[a]) {
      res[sister[a]] += bottleneck;
      res[a] -= bottleneck;
      saturate(res[a]);
      if (res[a] == 0.0) make_orphan_front(i);
    }
    tr[i] += bottleneck;
    if (tr[i] >= -eps_) {
      tr[i] = 0.0;
      make_orphan_front(i);
    }
    flow_ += bottleneck;
  }

  void make_orphan_front(VertexId v) {
    net_.parent_[v] = kOrphan;
    orphans_.push_front(v);
  }
  void make_orphan_rear(VertexId v) {
    net_.parent_[v] = kOrphan;
    orphans_.push_back(v);
  }

  void adopt_orphans() {
    while (!orphans_.empty()) {
      const VertexId v = orphans_.front();
      orphans_.pop_front();
      adopt(v);
    }
  }

  void adopt(VertexId i) {
    const auto& head = net_.arc_head_;
    const auto& sister = net_.arc_sister_;
    const auto& res = net_.residual_;
    const bool sink_tree = net_.in_sink_tree_[i];
    std::uint32_t best_arc = kFree;
    std::uint32_t best_dist = kInfiniteDist;

    for (std::size_t a0 = net_.offsets_[i]; a0 < net_.offsets_[i + 1]; ++a0) {
      VertexId j = head[a0];
      if (!same_part(j)) continue;
      // flow toward i in the source tree, away from i in the sink tree
      const double cap = sink_tree ? res[a0] : res[sister[a0]];
      if (cap <= 0.0) continue;
      if (net_.in_sink_tree_[j] != sink_tree || net_.parent_[j] == kFree) continue;

      std::uint32_t d = 0;
      while (true) {
        if (net_.timestamp_[j] == time_) {
          d += net_.dist_[j];
          break;
        }
        const std::uint32_t a = net_.parent_[j];
        ++d;
        if (a == kTerminal) {
          net_.timestamp_[j] = time_;
          net_.dist_[j] = 1;
          break;
        }
        if (a == kOrphan) {
          d = kInfiniteDist;
          break;
        }
        j = head[a];
      }
      if (d < kInfiniteDist) {
        if (d < best_dist) {
          best_arc = static_cast<std::uint32_t>(a0);
          best_dist = d;
        }
        for (j = head[a0]; net_.timestamp_[j] != time_; j = head[net_.parent_[j]]) {
          net_.timestamp_[j] = time_;
          net_.dist_[j] = d--;
        }
      }
    }

    net_.parent_[i] = best_arc;
    if (best_arc != kFree) {
      net_.timestamp_[i] = time_;
      net_.dist_[i] = best_dist + 1;
      return;
    }
    for (std::size_t a0 = net_.offsets_[i]; a0 < net_.offsets_[i + 1]; ++a0) {
      const VertexId j = head[a0];
      if (!same_part(j)) continue;
      const std::uint32_t a = net_.parent_[j];
      if (net_.in_sink_tree_[j] != sink_tree || a == kFree) continue;
      const double cap = sink_tree ? res[a0] : res[sister[a0]];
      if (cap > 0.0) set_active(j);
      if (a != kTerminal && a != kOrphan && head[a] == i) make_orphan_rear(j);
    }
  }

  FlowNetwork& net_;
  std::span<const VertexId> nodes_;
  std::uint32_t tag_;
  double eps_ = 0.0;
  double flow_ = 0.0;
  std::uint32_t time_ = 0;
  std::deque<VertexId> active_;
  std::deque<VertexId> orphans_;
};

double FlowNetwork::solve_part(std::span<const VertexId> nodes) {
  if (nodes.empty()) return 0.0;
  return BkSolver(*this, nodes).run();
}

CutResult solve_mincut(FlowNetwork& network) {
  network.assign_single_part();
  std::vector<VertexId> all(network.num_nodes());
  for (VertexId v = 0; v < all.size(); ++v) all[v] = v;
  CutResult result;
  result.flow_value = network.solve_part(all);
  result.labeling.resize(network.num_nodes());
  for (VertexId v = 0; v < all.size(); ++v) result.labeling[v] = network.side(v);
  result.cut_value = network.evaluate_cut(result.labeling);
  return result;
}

CutResult solve_mincut_restricted(FlowNetwork& network,
                                  std::span<const std::vector<VertexId>> parts,
                                  int num_threads) {
  network.assign_parts(parts);
  CutResult result;
  std::vector<double> flows(parts.size(), 0.0);
  const long long np = static_cast<long long>(parts.size());
  // exceptions cannot leave an OpenMP region; collect the first one
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, num_threads)) if (num_threads > 1)
  for (long long p = 0; p < np; ++p) {
    try {
      flows[static_cast<std::size_t>(p)] = network.solve_part(parts[static_cast<std::size_t>(p)]);
    } catch (...) {
#pragma omp critical(pcp_mincut_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  for (double f : flows) result.flow_value += f;
  result.labeling.resize(network.num_nodes());
  for (VertexId v = 0; v < network.num_nodes(); ++v) result.labeling[v] = network.side(v);
  result.cut_value = network.evaluate_cut_within_parts(result.labeling);
  return result;
}

BinaryCutNetwork build_binary_cut_network(std::span<const UnaryCost> unary_costs,
                                          std::span<const WeightedEdge> binary_weights) {
  std::vector<Edge> edges;
  edges.reserve(binary_weights.size());
  for (const WeightedEdge& e : binary_weights) {
    if (!(e.w >= 0.0)) throw InputError("build_binary_cut_network: negative binary weight");
    edges.push_back({std::min(e.u, e.v), std::max(e.u, e.v)});
  }
  BinaryCutNetwork out{FlowNetwork(unary_costs.size(), edges), 0.0};
  std::vector<VertexId> nodes(unary_costs.size());
  for (VertexId v = 0; v < unary_costs.size(); ++v) {
    const UnaryCost c = unary_costs[v];
    if (std::isnan(c.label0) || std::isnan(c.label1) || (std::isinf(c.label0) && std::isinf(c.label1))) {
      throw InputError("build_binary_cut_network: node " + std::to_string(v) + " has no finite label cost");
    }
    out.network.add_unary(v, c.label0, c.label1);
    nodes[v] = v;
  }
  for (EdgeId e = 0; e < binary_weights.size(); ++e) {
    out.network.set_edge_caps(e, binary_weights[e].w, binary_weights[e].w);
  }
  out.constant = out.network.normalize_terminals(nodes);
  return out;
}

double binary_energy(std::span<const UnaryCost> unary_costs,
                     std::span<const WeightedEdge> binary_weights,
                     std::span<const CutLabel> labeling) {
  double value = 0.0;
  for (std::size_t v = 0; v < unary_costs.size(); ++v) {
    value += labeling[v] == 0 ? unary_costs[v].label0 : unary_costs[v].label1;
  }
  for (const WeightedEdge& e : binary_weights) {
    if (labeling[e.u] != labeling[e.v]) value += e.w;
  }
  return value;
}

namespace {

template <class Eval>
BruteForceCut enumerate_labelings(std::size_t n, Eval&& eval) {
  if (n > kBruteForceMaxNodes) throw InputError("brute_force_mincut: too many nodes");
  BruteForceCut best;
  best.value = std::numeric_limits<double>::infinity();
  best.labeling.assign(n, 0);
  std::vector<CutLabel> labeling(n, 0);
  const std::uint64_t count = std::uint64_t{1} << n;
  // mask bit (n-1-i) is the label of node i: increasing masks are
  // lexicographically increasing labelings
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    for (std::size_t i = 0; i < n; ++i) labeling[i] = (mask >> (n - 1 - i)) & 1u;
    const double value = eval(labeling);
    if (value < best.value) {
      best.value = value;
      best.labeling = labeling;
    }
  }
  if (n == 0) best.value = 0.0;
  return best;
}

}  // namespace

BruteForceCut brute_force_mincut(std::span<const UnaryCost> unary_costs,
                                 std::span<const WeightedEdge> binary_weights) {
  return enumerate_labelings(unary_costs.size(), [&](std::span<const CutLabel> l) {
    return binary_energy(unary_costs, binary_weights, l);
  });
}

BruteForceCut brute_force_mincut(const FlowNetwork& network) {
  return enumerate_labelings(network.num_nodes(),
                             [&](std::span<const CutLabel> l) { return network.evaluate_cut(l); });
}

}  // namespace pcp
