#include "pcp/cut_pursuit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>

#include "pcp/parallel.hpp"
#include "pcp/primal_dual.hpp"

namespace pcp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxSweeps = 5;
// relative size below which a split value counts as zero
constexpr double kSplitEps = 1e-12;

double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

// Where the binary cuts of one split problem run.
struct CutTarget {
  FlowNetwork& network;
  std::span<const VertexId> nodes;
  std::span<const EdgeId> edges;
};

std::uint32_t initial_label(const SplitProblem& split) {
  const std::size_t nd = split.num_directions();
  for (std::size_t d = 0; d < nd; ++d) {
    if (norm(split.directions[d]) == 0.0) return static_cast<std::uint32_t>(d);
  }
  std::uint32_t best = 0;
  double best_value = kInf;
  for (std::size_t d = 0; d < nd; ++d) {
    double s = 0.0;
    for (std::size_t i = 0; i < split.size(); ++i) s += split.unary_at(i, d);
    if (s < best_value) {
      best_value = s;
      best = static_cast<std::uint32_t>(d);
    }
  }
  if (!(best_value < kInf)) throw SolverError("split: no candidate direction is feasible on the whole component");
  return best;
}

// One expansion move toward `alpha`: label 0 switches, label 1 keeps.
std::vector<std::uint32_t> expansion_move(const SplitProblem& split, CutTarget target,
                                          std::span<const std::uint32_t> labels, std::uint32_t alpha) {
  FlowNetwork& net = target.network;
  net.reset_nodes(target.nodes);
  for (std::size_t i = 0; i < split.size(); ++i) {
    const double keep = split.unary_at(i, labels[i]);
    const double go = labels[i] == alpha ? keep : split.unary_at(i, alpha);
    net.add_unary(target.nodes[i], go, keep);
  }
  for (std::size_t k = 0; k < split.local_edges.size(); ++k) {
    const auto [u, v] = split.local_edges[k];
    const double w = split.edge_weights[k];
    net.add_pairwise(target.edges[k], 0.0, w * split.pair_cost(alpha, labels[v]),
                     w * split.pair_cost(labels[u], alpha), w * split.pair_cost(labels[u], labels[v]));
  }
  net.normalize_terminals(target.nodes);
  net.solve_part(target.nodes);
  std::vector<std::uint32_t> next(labels.begin(), labels.end());
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (net.side(target.nodes[i]) == 0) next[i] = alpha;
  }
  return next;
}

SplitLabels run_expansion(const SplitProblem& split, CutTarget target) {
  if (split.num_directions() == 0) throw InputError("split: empty candidate set");
  SplitLabels out;
  out.labels.assign(split.size(), initial_label(split));
  out.value = split.value(out.labels);
  out.sweep_values.push_back(out.value);
  const std::size_t nd = split.num_directions();
  if (nd == 1 || split.size() == 0) return out;

  const auto try_move = [&](std::uint32_t alpha) {
    auto next = expansion_move(split, target, out.labels, alpha);
    const double v = split.value(next);
    if (v < out.value) {
      out.labels = std::move(next);
      out.value = v;
      return true;
    }
    return false;
  };

  if (nd == 2) {
    try_move(1u - out.labels[0]);
    out.sweep_values.push_back(out.value);
    return out;
  }
  for (std::size_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool changed = false;
    for (std::uint32_t alpha = 0; alpha < nd; ++alpha) changed = try_move(alpha) || changed;
    out.sweep_values.push_back(out.value);
    if (!changed) break;
  }
  return out;
}

// Magnitude against which split values are compared to zero.
double split_scale(const SplitProblem& split) {
  double s = 0.0;
  for (double u : split.unary) {
    if (std::isfinite(u)) s += std::abs(u);
  }
  double dmax = 0.0;
  for (double d : split.direction_distance) dmax = std::max(dmax, d);
  for (double w : split.edge_weights) s += w * dmax;
  return s;
}

double sweep_increase(const SplitLabels& r) {
  double worst = 0.0;
  for (std::size_t i = 1; i < r.sweep_values.size(); ++i) {
    worst = std::max(worst, r.sweep_values[i] - r.sweep_values[i - 1]);
  }
  return worst;
}

// One job of the split phase: a whole component or a balancing part of it.
struct Job {
  std::uint32_t component;
  std::vector<VertexId> vertices;
};

struct PhasePlan {
  std::vector<std::vector<std::vector<double>>> directions;  // per component
  std::vector<Job> jobs;
  std::vector<std::uint32_t> first_job;  // per component, into jobs; size C + 1
  bool balanced = false;
};

PhasePlan plan_phase(const Graph& graph, const Functional& functional, const NodeValues& x,
                     const Partition& partition, const SplitSettings& settings) {
  PhasePlan plan;
  const std::size_t nc = partition.num_components();
  plan.directions.resize(nc);
  plan.first_job.assign(nc + 1, 0);
  for (std::uint32_t c = 0; c < nc; ++c) {
    plan.first_job[c] = static_cast<std::uint32_t>(plan.jobs.size());
    const auto comp = partition.component(c);
    plan.directions[c] = choose_directions(functional, x.row(comp.front()), settings.mode);
    if (comp.size() < 2 || plan.directions[c].size() < 2) continue;
    if (settings.balance_cap > 0 && comp.size() > settings.balance_cap) {
      plan.balanced = true;
      for (auto& part : balance_decompose(graph, comp, settings.balance_cap)) {
        std::sort(part.begin(), part.end());
        plan.jobs.push_back({c, std::move(part)});
      }
    } else {
      plan.jobs.push_back({c, std::vector<VertexId>(comp.begin(), comp.end())});
    }
  }
  plan.first_job[nc] = static_cast<std::uint32_t>(plan.jobs.size());
  return plan;
}

// Combines job labels per component and decides which components split.
SplitOutcome finish_phase(const Graph& graph, const Partition& partition, const PhasePlan& plan,
                          const std::vector<SplitProblem>& problems, const std::vector<SplitLabels>& results) {
  const std::size_t nv = graph.num_vertices();
  const std::size_t nc = partition.num_components();
  std::vector<std::uint32_t> label_of(nv, 0);
  std::vector<std::uint32_t> job_of(nv, std::numeric_limits<std::uint32_t>::max());
  for (std::size_t j = 0; j < plan.jobs.size(); ++j) {
    for (std::size_t i = 0; i < problems[j].size(); ++i) {
      label_of[problems[j].vertices[i]] = results[j].labels[i];
      job_of[problems[j].vertices[i]] = static_cast<std::uint32_t>(j);
    }
  }

  SplitOutcome out;
  out.balanced = plan.balanced;
  out.pieces.resize(nc);
  out.component_values.assign(nc, 0.0);
  for (std::size_t j = 0; j < results.size(); ++j) {
    out.max_sweep_increase = std::max(out.max_sweep_increase, sweep_increase(results[j]));
  }
  for (std::uint32_t c = 0; c < nc; ++c) {
    const auto comp = partition.component(c);
    const std::uint32_t j0 = plan.first_job[c];
    const std::uint32_t j1 = plan.first_job[c + 1];
    if (j0 == j1) {
      out.pieces[c].emplace_back(comp.begin(), comp.end());
      continue;
    }
    double value = 0.0;
    double scale = 0.0;
    for (std::uint32_t j = j0; j < j1; ++j) {
      value += results[j].value;
      scale += split_scale(problems[j]);
    }
    if (j1 - j0 > 1) {
      // edges between balancing parts count in the true value
      const auto& dirs = plan.directions[c];
      for (VertexId v : comp) {
        for (const Neighbor& nb : graph.neighbors(v)) {
          const VertexId u = nb.vertex;
          if (u <= v || partition.component_of(u) != c || job_of[u] == job_of[v]) continue;
          const double w = graph.weight(nb.edge);
          const double d = distance(dirs[label_of[v]], dirs[label_of[u]]);
          value += w * d;
          scale += w * d;
        }
      }
    }
    out.component_values[c] = value;
    bool uniform = true;
    for (VertexId v : comp) uniform = uniform && label_of[v] == label_of[comp.front()];
    if (!uniform && value < -kSplitEps * scale) {
      out.pieces[c] = constant_connected_components(graph, comp, label_of);
    } else {
      out.pieces[c].emplace_back(comp.begin(), comp.end());
      out.component_values[c] = std::min(value, 0.0);
    }
  }
  return out;
}

}  // namespace

std::string to_string(DirectionMode mode) {
  switch (mode) {
    case DirectionMode::two_label: return "two_label";
    case DirectionMode::three_label: return "three_label";
    case DirectionMode::multidim: return "multidim";
  }
  return "unknown";
}

double SolverTrace::total_split_time() const {
  double s = 0.0;
  for (const auto& r : rows) s += r.split_time_s;
  return s;
}

void SolverTrace::write_csv(std::ostream& out) const {
  out << "iter,time_s,objective,components,balanced\n";
  const auto old_precision = out.precision(17);
  for (const auto& r : rows) {
    out << r.iter << ',' << r.time_s << ',' << r.objective << ',' << r.components << ','
        << (r.balanced ? 1 : 0) << '\n';
  }
  out.precision(old_precision);
}

double SplitProblem::value(std::span<const std::uint32_t> labels) const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += unary_at(i, labels[i]);
  for (std::size_t k = 0; k < local_edges.size(); ++k) {
    s += edge_weights[k] * pair_cost(labels[local_edges[k].u], labels[local_edges[k].v]);
  }
  return s;
}

DirectionMode default_direction_mode(const Functional& functional) {
  if (functional.dim() > 1) return DirectionMode::multidim;
  return functional.has_nonsmooth() ? DirectionMode::three_label : DirectionMode::two_label;
}

std::vector<std::vector<double>> choose_directions(const Functional& functional,
                                                   std::span<const double> center, DirectionMode mode) {
  const std::size_t dim = functional.dim();
  if (center.size() != dim) throw InputError("choose_directions: value has the wrong dimension");
  if (mode != DirectionMode::multidim && dim != 1) {
    throw InputError("choose_directions: " + to_string(mode) + " needs scalar values");
  }
  if (mode == DirectionMode::two_label) return {{-1.0}, {1.0}};
  if (mode == DirectionMode::three_label) return {{-1.0}, {0.0}, {1.0}};

  std::vector<std::vector<double>> out{std::vector<double>(dim, 0.0)};
  for (auto& d : functional.shift_directions(center)) {
    if (d.size() != dim) throw InputError("choose_directions: shift direction has the wrong dimension");
    const double n = norm(d);
    if (!(n > 1e-12)) continue;
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const auto& e) {
      return distance(e, d) <= 1e-12 * n;
    });
    if (!duplicate) out.push_back(std::move(d));
  }
  return out;
}

SplitProblem build_split_problem(const Graph& graph, const Functional& functional, const NodeValues& x,
                                 const NodeValues& grad, std::span<const std::uint32_t> component_of,
                                 std::span<const VertexId> subset,
                                 std::vector<std::vector<double>> directions) {
  SplitProblem sp;
  sp.vertices.assign(subset.begin(), subset.end());
  if (!std::is_sorted(sp.vertices.begin(), sp.vertices.end())) {
    throw InputError("build_split_problem: vertex set must be sorted");
  }
  sp.directions = std::move(directions);
  const std::size_t nd = sp.directions.size();
  const std::size_t dim = x.dim();
  sp.direction_distance.resize(nd * nd);
  for (std::size_t a = 0; a < nd; ++a) {
    for (std::size_t b = 0; b < nd; ++b) {
      sp.direction_distance[a * nd + b] = distance(sp.directions[a], sp.directions[b]);
    }
  }
  std::vector<double> dnorm(nd);
  for (std::size_t a = 0; a < nd; ++a) dnorm[a] = norm(sp.directions[a]);

  const auto local = [&](VertexId u) -> std::size_t {
    const auto it = std::lower_bound(sp.vertices.begin(), sp.vertices.end(), u);
    return it != sp.vertices.end() && *it == u ? static_cast<std::size_t>(it - sp.vertices.begin())
                                               : std::numeric_limits<std::size_t>::max();
  };

  sp.unary.assign(sp.size() * nd, 0.0);
  std::vector<double> unit(dim);
  for (std::size_t i = 0; i < sp.size(); ++i) {
    const VertexId v = sp.vertices[i];
    const auto xv = x.row(v);
    double* row = sp.unary.data() + i * nd;
    for (std::size_t a = 0; a < nd; ++a) row[a] = functional.directional_unary(v, xv, grad.row(v), sp.directions[a]);
    for (const Neighbor& nb : graph.neighbors(v)) {
      const VertexId u = nb.vertex;
      const double w = graph.weight(nb.edge);
      if (component_of[u] == component_of[v]) {
        const std::size_t j = local(u);
        if (j == std::numeric_limits<std::size_t>::max() || u < v) continue;  // other part, or seen from u
        sp.local_edges.push_back({static_cast<VertexId>(i), static_cast<VertexId>(j)});
        sp.edge_weights.push_back(w);
        sp.graph_edges.push_back(nb.edge);
        continue;
      }
      if (w == 0.0) continue;
      const auto xu = x.row(u);
      const double gap = distance(xv, xu);
      if (gap > 1e-12 * std::max(1.0, norm(xv))) {
        for (std::size_t k = 0; k < dim; ++k) unit[k] = (xv[k] - xu[k]) / gap;
        for (std::size_t a = 0; a < nd; ++a) {
          double dot = 0.0;
          for (std::size_t k = 0; k < dim; ++k) dot += unit[k] * sp.directions[a][k];
          row[a] += w * dot;
        }
      } else {
        for (std::size_t a = 0; a < nd; ++a) row[a] += w * dnorm[a];
      }
    }
  }
  return sp;
}

SplitLabels solve_multilabel_split(const SplitProblem& split) {
  FlowNetwork net(split.size(), split.local_edges);
  net.assign_single_part();
  std::vector<VertexId> nodes(split.size());
  std::iota(nodes.begin(), nodes.end(), 0u);
  std::vector<EdgeId> edges(split.local_edges.size());
  std::iota(edges.begin(), edges.end(), 0u);
  return run_expansion(split, {net, nodes, edges});
}

SplitLabels solve_multilabel_split(const SplitProblem& split, FlowNetwork& network) {
  return run_expansion(split, {network, split.vertices, split.graph_edges});
}

std::vector<std::vector<VertexId>> split_component(const Graph& graph, const Functional& functional,
                                                   const NodeValues& x,
                                                   std::span<const std::uint32_t> component_of,
                                                   std::span<const VertexId> component,
                                                   const std::vector<std::vector<double>>& directions,
                                                   std::span<const std::vector<VertexId>> parts) {
  if (directions.empty()) throw InputError("split_component: empty candidate set");
  std::vector<VertexId> comp(component.begin(), component.end());
  std::sort(comp.begin(), comp.end());
  if (comp.size() < 2 || directions.size() < 2) return {comp};

  // Reuse the phase machinery on a one-component view.
  std::vector<std::vector<VertexId>> groups;
  std::vector<std::uint32_t> local_component(graph.num_vertices());
  const std::uint32_t cu = component_of[comp.front()];
  for (std::size_t v = 0; v < graph.num_vertices(); ++v) local_component[v] = component_of[v] == cu ? 0u : 1u;

  NodeValues grad(x.num_nodes(), x.dim());
  functional.gradient_smooth(x, grad);

  PhasePlan plan;
  plan.directions = {directions};
  plan.first_job = {0u, 0u};
  if (parts.empty()) {
    plan.jobs.push_back({0, comp});
  } else {
    plan.balanced = parts.size() > 1;
    for (const auto& p : parts) {
      std::vector<VertexId> s(p.begin(), p.end());
      std::sort(s.begin(), s.end());
      plan.jobs.push_back({0, std::move(s)});
    }
  }
  plan.first_job[1] = static_cast<std::uint32_t>(plan.jobs.size());
  std::vector<SplitProblem> problems;
  std::vector<SplitLabels> results;
  for (const Job& job : plan.jobs) {
    problems.push_back(build_split_problem(graph, functional, x, grad, local_component, job.vertices, directions));
    results.push_back(solve_multilabel_split(problems.back()));
  }
  // One-component partition: U plus everything else as a second set.
  std::vector<VertexId> rest;
  for (std::size_t v = 0; v < graph.num_vertices(); ++v) {
    if (local_component[v] != 0) rest.push_back(static_cast<VertexId>(v));
  }
  std::vector<std::vector<VertexId>> sets{comp};
  if (!rest.empty()) sets.push_back(std::move(rest));
  const Partition view(graph.num_vertices(), std::move(sets));
  plan.directions.resize(view.num_components());
  plan.first_job.push_back(plan.first_job[1]);
  auto outcome = finish_phase(graph, view, plan, problems, results);
  return std::move(outcome.pieces[0]);
}

SplitOutcome split_all_components(const Graph& graph, const Functional& functional, const NodeValues& x,
                                  const Partition& partition, const SplitSettings& settings) {
  const int threads = std::max(1, settings.num_threads);
  NodeValues grad(x.num_nodes(), x.dim());
  functional.gradient_smooth(x, grad, threads);
  const PhasePlan plan = plan_phase(graph, functional, x, partition, settings);
  const std::size_t nj = plan.jobs.size();

  // tags: one per job, then one per untouched component
  FlowNetwork net(graph);
  {
    std::vector<std::vector<VertexId>> tags;
    tags.reserve(nj + partition.num_components());
    for (const Job& job : plan.jobs) tags.push_back(job.vertices);
    for (std::uint32_t c = 0; c < partition.num_components(); ++c) {
      if (plan.first_job[c] == plan.first_job[c + 1]) {
        const auto comp = partition.component(c);
        tags.emplace_back(comp.begin(), comp.end());
      }
    }
    net.assign_parts(tags);
  }

  std::vector<std::size_t> order(nj);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return plan.jobs[a].vertices.size() > plan.jobs[b].vertices.size();
  });

  std::vector<SplitProblem> problems(nj);
  std::vector<SplitLabels> results(nj);
  std::exception_ptr error;
  const long long count = static_cast<long long>(nj);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (threads > 1 && nj > 1)
  for (long long t = 0; t < count; ++t) {
    const std::size_t j = order[static_cast<std::size_t>(t)];
    try {
      const Job& job = plan.jobs[j];
      problems[j] = build_split_problem(graph, functional, x, grad, partition.component_of(), job.vertices,
                                        plan.directions[job.component]);
      results[j] = solve_multilabel_split(problems[j], net);
    } catch (...) {
#pragma omp critical(pcp_split_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return finish_phase(graph, partition, plan, problems, results);
}

SplitOutcome split_all_components_serial(const Graph& graph, const Functional& functional,
                                         const NodeValues& x, const Partition& partition,
                                         const SplitSettings& settings) {
  NodeValues grad(x.num_nodes(), x.dim());
  functional.gradient_smooth(x, grad);
  const PhasePlan plan = plan_phase(graph, functional, x, partition, settings);
  std::vector<SplitProblem> problems;
  std::vector<SplitLabels> results;
  for (const Job& job : plan.jobs) {
    problems.push_back(build_split_problem(graph, functional, x, grad, partition.component_of(), job.vertices,
                                           plan.directions[job.component]));
    results.push_back(solve_multilabel_split(problems.back()));
  }
  return finish_phase(graph, partition, plan, problems, results);
}

std::size_t balance_cap(std::size_t num_vertices, double factor, std::size_t workers) {
  if (!(factor > 0.0) || workers == 0) throw InputError("balance_cap: factor and worker count must be positive");
  const double cap = std::ceil(factor * static_cast<double>(num_vertices) / static_cast<double>(workers));
  return std::max<std::size_t>(1, static_cast<std::size_t>(cap));
}

PcpResult run_cut_pursuit(const Graph& graph, const Functional& functional, const PcpConfig& config) {
  if (functional.num_nodes() != graph.num_vertices()) {
    throw InputError("cut pursuit: functional and graph sizes differ");
  }
  if (!(config.reduced_tol > 0.0) || !(config.outer_tol >= 0.0)) {
    throw InputError("cut pursuit: tolerances must be positive");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto since = [](auto t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  const int threads = resolve_threads(config.num_threads);
  const std::size_t nv = graph.num_vertices();
  const std::size_t dim = functional.dim();

  SplitSettings settings;
  settings.mode = config.direction_mode.value_or(default_direction_mode(functional));
  settings.balance_cap = config.balance ? balance_cap(nv, config.balance_cap_factor, config.worker_count) : 0;
  settings.num_threads = threads;

  PcpResult result;
  Partition partition = Partition::connected_components(graph);
  NodeValues xi(partition.num_components(), dim, 0.0);
  double previous = kInf;

  for (std::size_t iter = 1; nv > 0; ++iter) {
    const ReducedGraph rg = build_reduced_graph(graph, partition);
    const auto reduced = functional.reduce(partition);
    PrimalDualOptions pd;
    pd.tol = config.reduced_tol;
    pd.max_iter = config.reduced_max_iter;
    pd.num_threads = threads;
    auto solved = solve_primal_dual(rg.topology(), *reduced, std::move(xi), pd);
    xi = std::move(solved.values);
    result.x = lift(partition, xi);
    const double objective = eval_objective(functional, graph.topology(), result.x, threads);

    TraceRow row;
    row.iter = iter;
    row.time_s = since(start);
    row.objective = objective;
    row.components = partition.num_components();

    const bool exhausted = iter >= config.max_outer_iter;
    const bool stalled = config.outer_tol > 0.0 && previous - objective < config.outer_tol * std::abs(objective);
    if (exhausted || stalled) {
      result.trace.rows.push_back(row);
      break;
    }
    const auto split_start = std::chrono::steady_clock::now();
    SplitOutcome outcome = split_all_components(graph, functional, result.x, partition, settings);
    row.split_time_s = since(split_start);
    row.balanced = outcome.balanced;
    for (double v : outcome.component_values) row.split_value += v;
    result.max_sweep_increase = std::max(result.max_sweep_increase, outcome.max_sweep_increase);
    result.trace.rows.push_back(row);

    std::vector<std::vector<VertexId>> next;
    std::vector<std::uint32_t> parent;
    for (std::uint32_t c = 0; c < outcome.pieces.size(); ++c) {
      for (auto& piece : outcome.pieces[c]) {
        next.push_back(std::move(piece));
        parent.push_back(c);
      }
    }
    if (next.size() == partition.num_components()) break;

    NodeValues warm(next.size(), dim);
    for (std::size_t c = 0; c < next.size(); ++c) {
      const auto src = xi.row(parent[c]);
      std::copy(src.begin(), src.end(), warm.row(c).begin());
    }
    partition = Partition(nv, std::move(next));
    xi = std::move(warm);
    previous = objective;
  }
  result.partition = std::move(partition);
  if (nv == 0) result.x = NodeValues(0, dim);
  return result;
}

}  // namespace pcp
