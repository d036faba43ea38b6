#include "pcp/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "pcp/io.hpp"
#include "pcp/parallel.hpp"
#include "pcp/primal_dual.hpp"

namespace pcp {

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "pcp") return SolverKind::pcp;
  if (name == "pcp-balanced") return SolverKind::pcp_balanced;
  if (name == "cp") return SolverKind::cp;
  if (name == "baseline") return SolverKind::baseline;
  throw InputError("unknown solver '" + name + "'");
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::pcp: return "pcp";
    case SolverKind::pcp_balanced: return "pcp-balanced";
    case SolverKind::cp: return "cp";
    case SolverKind::baseline: return "baseline";
  }
  return "unknown";
}

void RunSpec::validate() const {
  if (graph_path.empty()) throw InputError("--graph is required");
  if (obs_path.empty()) throw InputError("--obs is required");
  if (!(tol > 0.0)) throw InputError("--tol must be positive");
  if (max_iter && *max_iter == 0) throw InputError("--max-iter must be positive");
  if (balance_workers == 0) throw InputError("--balance-workers must be positive");
  if (problem == ProblemKind::lasso && (!lambda_path || !leadfield_path)) {
    throw InputError("lasso needs --lambda-file and --leadfield-file");
  }
  if (problem == ProblemKind::kl) {
    if (!beta) throw InputError("kl needs --beta");
    if (!(*beta > 0.0 && *beta < 1.0)) throw InputError("--beta must lie in (0, 1)");
  }
}

std::string RunSpec::instance_id() const {
  std::string id = to_string(problem) + "|" + graph_path + "|" + obs_path;
  if (lambda_path) id += "|" + *lambda_path;
  if (leadfield_path) id += "|" + *leadfield_path;
  if (beta) id += "|beta=" + format_double(*beta);
  return id;
}

Problem load_problem(const RunSpec& spec) {
  spec.validate();
  Problem p;
  p.graph = read_graph(spec.graph_path);
  const std::size_t nv = p.graph.num_vertices();
  switch (spec.problem) {
    case ProblemKind::quadratic:
      p.functional = std::make_unique<QuadraticFidelity>(read_rows(spec.obs_path, nv));
      break;
    case ProblemKind::lasso: {
      LeadField phi = read_leadfield(*spec.leadfield_path);
      if (phi.cols != nv) throw InputError(*spec.leadfield_path + ": column count differs from the vertex count");
      NodeValues y = read_rows(spec.obs_path, phi.rows);
      if (y.dim() != 1) throw InputError(spec.obs_path + ": lasso observations must have one value per line");
      NodeValues lambda = read_rows(*spec.lambda_path, nv);
      if (lambda.dim() != 1) throw InputError(*spec.lambda_path + ": one value per line expected");
      std::vector<double> yv(y.flat().begin(), y.flat().end());
      std::vector<double> lv(lambda.flat().begin(), lambda.flat().end());
      p.functional = std::make_unique<WeightedLassoNonneg>(std::move(yv), std::move(phi), std::move(lv));
      break;
    }
    case ProblemKind::kl:
      p.functional = std::make_unique<KLSimplex>(read_rows(spec.obs_path, nv), *spec.beta);
      break;
  }
  return p;
}

RunOutcome run_solver(const RunSpec& spec, const Problem& problem) {
  spec.validate();
  const int threads = resolve_threads(spec.threads);
  RunOutcome out;
  out.solver = to_string(spec.solver);
  out.instance = spec.instance_id();
  const auto start = std::chrono::steady_clock::now();

  if (spec.solver == SolverKind::baseline) {
    PrimalDualOptions o;
    o.tol = spec.tol;
    o.max_iter = spec.max_iter.value_or(o.max_iter);
    o.num_threads = threads;
    o.record_trace = true;
    NodeValues init(problem.graph.num_vertices(), problem.functional->dim(), 0.0);
    auto r = solve_primal_dual(problem.graph.topology(), *problem.functional, std::move(init), o);
    for (std::size_t i = 0; i < r.trace_objective.size(); ++i) {
      TraceRow row;
      row.iter = i;
      row.time_s = r.trace_time_s[i];
      row.objective = r.trace_objective[i];
      row.components = problem.graph.num_vertices();
      out.trace.rows.push_back(row);
    }
    out.x = std::move(r.values);
    out.objective = r.objective;
    out.components = problem.graph.num_vertices();  // one free value per vertex
  } else {
    PcpConfig c;
    c.reduced_tol = spec.tol;
    c.max_outer_iter = spec.max_iter.value_or(c.max_outer_iter);
    c.num_threads = threads;
    c.balance = spec.solver == SolverKind::pcp_balanced;
    c.worker_count = spec.solver == SolverKind::pcp_balanced ? spec.balance_workers : 1;
    auto r = run_cut_pursuit(problem.graph, *problem.functional, c);
    out.x = std::move(r.x);
    out.trace = std::move(r.trace);
    out.objective = eval_objective(*problem.functional, problem.graph.topology(), out.x, threads);
    out.components = r.partition.num_components();
  }
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (spec.solution_out) write_rows(*spec.solution_out, out.x);
  if (spec.trace_out) {
    std::ofstream f(*spec.trace_out);
    if (!f) throw InputError(*spec.trace_out + ": cannot open file for writing");
    out.trace.write_csv(f);
  }
  return out;
}

Comparison compare_runs(const std::vector<RunOutcome>& runs, double target_gap) {
  if (runs.size() < 2) throw InputError("bench: at least two runs are needed");
  for (const auto& r : runs) {
    if (r.instance != runs.front().instance) {
      throw InputError("bench: runs use different instances ('" + runs.front().instance + "' vs '" + r.instance + "')");
    }
  }
  Comparison cmp;
  cmp.f_inf = std::numeric_limits<double>::infinity();
  for (const auto& r : runs) {
    for (const auto& row : r.trace.rows) cmp.f_inf = std::min(cmp.f_inf, row.objective);
    cmp.f_inf = std::min(cmp.f_inf, r.objective);
  }
  // absolute gaps when the optimum is zero
  const double denom = cmp.f_inf != 0.0 ? std::abs(cmp.f_inf) : 1.0;
  for (const auto& r : runs) {
    SolverSummary s;
    s.solver = r.solver;
    s.final_objective = r.objective;
    s.final_gap = (r.objective - cmp.f_inf) / denom;
    for (const auto& row : r.trace.rows) {
      const double gap = (row.objective - cmp.f_inf) / denom;
      cmp.rows.push_back({r.solver, row.iter, row.time_s, row.objective, gap});
      if (!s.time_to_target_s && gap <= target_gap) s.time_to_target_s = row.time_s;
    }
    cmp.summaries.push_back(s);
  }
  return cmp;
}

void write_gap_csv(std::ostream& out, const Comparison& comparison) {
  out << "solver,iter,time_s,objective,gap\n";
  for (const auto& r : comparison.rows) {
    out << r.solver << ',' << r.iter << ',' << format_double(r.time_s) << ',' << format_double(r.objective) << ','
        << format_double(r.gap) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const Comparison& comparison) {
  out << "solver,final_objective,final_gap,time_to_target_s\n";
  for (const auto& s : comparison.summaries) {
    out << s.solver << ',' << format_double(s.final_objective) << ',' << format_double(s.final_gap) << ','
        << (s.time_to_target_s ? format_double(*s.time_to_target_s) : std::string("NA")) << '\n';
  }
}

}  // namespace pcp
