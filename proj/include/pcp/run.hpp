#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pcp/cut_pursuit.hpp"
#include "pcp/functional.hpp"
#include "pcp/generate.hpp"
#include "pcp/graph.hpp"

namespace pcp {

enum class SolverKind { pcp, pcp_balanced, cp, baseline };

SolverKind parse_solver_kind(const std::string& name);
std::string to_string(SolverKind kind);

struct RunSpec {
  ProblemKind problem = ProblemKind::quadratic;
  std::string graph_path;
  std::string obs_path;
  std::optional<std::string> lambda_path;
  std::optional<std::string> leadfield_path;
  std::optional<double> beta;
  SolverKind solver = SolverKind::pcp;
  int threads = 0;
  double tol = 1e-6;
  std::optional<std::size_t> max_iter;
  std::uint64_t seed = 1;  // recorded only; every solver is deterministic
  std::size_t balance_workers = 4;
  std::optional<std::string> solution_out;
  std::optional<std::string> trace_out;

  /// Throws InputError when inputs required by the problem kind are missing.
  void validate() const;
  /// Identifies the instance (problem kind and input files).
  std::string instance_id() const;
};

struct Problem {
  Graph graph;
  std::unique_ptr<Functional> functional;
};

Problem load_problem(const RunSpec& spec);

struct RunOutcome {
  std::string solver;
  std::string instance;
  NodeValues x;
  SolverTrace trace;
  double objective = 0.0;
  std::size_t components = 0;
  double wall_time_s = 0.0;
};

/// Runs the requested solver. The baseline is the primal-dual solver on the
/// full graph; its trace has one row per iteration.
RunOutcome run_solver(const RunSpec& spec, const Problem& problem);

struct GapRow {
  std::string solver;
  std::size_t iter = 0;
  double time_s = 0.0;
  double objective = 0.0;
  double gap = 0.0;
};

struct SolverSummary {
  std::string solver;
  double final_objective = 0.0;
  double final_gap = 0.0;
  std::optional<double> time_to_target_s;
};

struct Comparison {
  double f_inf = 0.0;
  std::vector<GapRow> rows;
  std::vector<SolverSummary> summaries;
};

/// F_inf is the smallest objective seen in any trace; gaps are
/// (F_t - F_inf) / |F_inf|. Throws InputError on fewer than two runs or on
/// runs of different instances.
Comparison compare_runs(const std::vector<RunOutcome>& runs, double target_gap = 1e-4);

void write_gap_csv(std::ostream& out, const Comparison& comparison);
void write_summary_csv(std::ostream& out, const Comparison& comparison);

}  // namespace pcp
