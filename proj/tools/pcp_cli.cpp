// Command-line front end: instance generation, solving, benchmarking.
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcp/generate.hpp"
#include "pcp/io.hpp"
#include "pcp/run.hpp"

namespace {

struct SolveFlags {
  std::string problem = "quadratic";
  std::string graph;
  std::string obs;
  std::string lambda_file;
  std::string leadfield_file;
  double beta = -1.0;
  std::vector<std::string> solvers{"pcp"};
  int threads = 0;
  bool balance = false;
  std::size_t balance_workers = 4;
  double tol = 1e-6;
  std::size_t max_iter = 0;
  std::uint64_t seed = 1;
  std::string solution_out;
  std::string trace_out;
};

void add_solve_flags(CLI::App* cmd, SolveFlags& f, bool many_solvers) {
  cmd->add_option("--problem", f.problem, "quadratic | lasso | kl")->capture_default_str();
  cmd->add_option("--graph", f.graph, "graph file")->required();
  cmd->add_option("--obs", f.obs, "observation file")->required();
  cmd->add_option("--lambda-file", f.lambda_file, "per-vertex lasso weights");
  cmd->add_option("--leadfield-file", f.leadfield_file, "lasso operator");
  cmd->add_option("--beta", f.beta, "kl smoothing constant in (0, 1)");
  auto* s = cmd->add_option("--solver", f.solvers, "pcp | pcp-balanced | cp | baseline")->capture_default_str();
  if (many_solvers) {
    s->delimiter(',');
  } else {
    s->expected(1);
  }
  cmd->add_option("--threads", f.threads, "worker threads (0 = OpenMP default)")->capture_default_str();
  cmd->add_flag("--balance", f.balance, "turn pcp into pcp-balanced");
  cmd->add_option("--balance-workers", f.balance_workers, "worker count that sets the balancing cap")
      ->capture_default_str();
  cmd->add_option("--tol", f.tol, "reduced-problem tolerance (baseline: solver tolerance)")->capture_default_str();
  cmd->add_option("--max-iter", f.max_iter, "outer iterations (baseline: solver iterations)");
  cmd->add_option("--seed", f.seed, "recorded for bookkeeping; solvers are deterministic")->capture_default_str();
  cmd->add_option("--solution-out", f.solution_out, "solution rows");
  cmd->add_option("--trace-out", f.trace_out, many_solvers ? "gap CSV" : "trace CSV");
}

pcp::RunSpec make_spec(const SolveFlags& f, const std::string& solver) {
  pcp::RunSpec s;
  s.problem = pcp::parse_problem_kind(f.problem);
  s.graph_path = f.graph;
  s.obs_path = f.obs;
  if (!f.lambda_file.empty()) s.lambda_path = f.lambda_file;
  if (!f.leadfield_file.empty()) s.leadfield_path = f.leadfield_file;
  if (f.beta >= 0.0) s.beta = f.beta;
  s.solver = pcp::parse_solver_kind(solver);
  if (f.balance && s.solver == pcp::SolverKind::pcp) s.solver = pcp::SolverKind::pcp_balanced;
  s.threads = f.threads;
  s.tol = f.tol;
  if (f.max_iter > 0) s.max_iter = f.max_iter;
  s.seed = f.seed;
  s.balance_workers = f.balance_workers;
  return s;
}

int run_gen(const pcp::GenOptions& o, const std::string& kind, const std::string& problem, const std::string& out) {
  pcp::GenOptions opts = o;
  opts.graph = pcp::parse_graph_kind(kind);
  opts.problem = pcp::parse_problem_kind(problem);
  const auto inst = pcp::generate_instance(opts);
  for (const auto& p : pcp::write_instance(out, inst)) std::cout << p << '\n';
  return 0;
}

int run_solve(const SolveFlags& f) {
  if (f.solvers.size() != 1) throw pcp::InputError("solve takes exactly one --solver");
  pcp::RunSpec spec = make_spec(f, f.solvers.front());
  if (!f.solution_out.empty()) spec.solution_out = f.solution_out;
  if (!f.trace_out.empty()) spec.trace_out = f.trace_out;
  const auto problem = pcp::load_problem(spec);
  const auto out = pcp::run_solver(spec, problem);
  std::cout << "objective " << pcp::format_double(out.objective) << '\n'
            << "components " << out.components << '\n'
            << "time_s " << out.wall_time_s << '\n';
  return 0;
}

int run_bench(const SolveFlags& f, double target_gap) {
  std::vector<pcp::RunOutcome> runs;
  std::optional<pcp::Problem> problem;
  for (const auto& name : f.solvers) {
    const pcp::RunSpec spec = make_spec(f, name);
    if (!problem) problem = pcp::load_problem(spec);
    runs.push_back(pcp::run_solver(spec, *problem));
  }
  const auto cmp = pcp::compare_runs(runs, target_gap);
  if (!f.trace_out.empty()) {
    std::ofstream out(f.trace_out);
    if (!out) throw pcp::InputError(f.trace_out + ": cannot open file for writing");
    pcp::write_gap_csv(out, cmp);
  }
  std::cout << "f_inf " << pcp::format_double(cmp.f_inf) << '\n';
  pcp::write_summary_csv(std::cout, cmp);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel cut pursuit for graph total-variation problems"};
  app.require_subcommand(1);

  pcp::GenOptions gen;
  std::string gen_kind = "chain";
  std::string gen_problem = "quadratic";
  std::string gen_out;
  auto* g = app.add_subcommand("gen", "write a synthetic instance");
  g->add_option("--kind", gen_kind, "chain | grid | knn-cloud")->capture_default_str();
  g->add_option("--problem", gen_problem, "quadratic | lasso | kl")->capture_default_str();
  g->add_option("--size", gen.size, "chain length, grid rows, or cloud points")->capture_default_str();
  g->add_option("--width", gen.width, "grid columns (default: --size)");
  g->add_option("--blocks", gen.blocks, "ground-truth pieces")->capture_default_str();
  g->add_option("--noise", gen.noise, "noise standard deviation")->capture_default_str();
  g->add_option("--weight", gen.weight, "uniform edge weight")->capture_default_str();
  g->add_option("--neighbors", gen.neighbors, "knn-cloud neighbor count")->capture_default_str();
  g->add_option("--classes", gen.classes, "kl class count")->capture_default_str();
  g->add_option("--sensors", gen.sensors, "lasso operator rows")->capture_default_str();
  g->add_option("--extra-edges", gen.extra_edge_ratio, "lasso random edges per vertex")->capture_default_str();
  g->add_option("--lambda", gen.lambda, "lasso sparsity weight")->capture_default_str();
  g->add_option("--seed", gen.seed, "random seed")->capture_default_str();
  g->add_option("--out", gen_out, "output prefix")->required();

  SolveFlags solve;
  add_solve_flags(app.add_subcommand("solve", "solve one instance"), solve, false);
  SolveFlags bench;
  double target_gap = 1e-4;
  auto* b = app.add_subcommand("bench", "run several solvers on one instance and compare");
  add_solve_flags(b, bench, true);
  b->add_option("--target-gap", target_gap, "relative gap for time-to-target")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand("gen")) return run_gen(gen, gen_kind, gen_problem, gen_out);
    if (app.got_subcommand("solve")) return run_solve(solve);
    return run_bench(bench, target_gap);
  } catch (const pcp::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const pcp::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 2;
  }
}
