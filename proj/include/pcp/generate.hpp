#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcp/functional.hpp"
#include "pcp/graph.hpp"

namespace pcp {

enum class GraphKind { chain, grid, knn_cloud };
enum class ProblemKind { quadratic, lasso, kl };

GraphKind parse_graph_kind(const std::string& name);
ProblemKind parse_problem_kind(const std::string& name);
std::string to_string(GraphKind kind);
std::string to_string(ProblemKind kind);

struct GenOptions {
  GraphKind graph = GraphKind::chain;
  ProblemKind problem = ProblemKind::quadratic;
  std::size_t size = 16;    // chain length, grid rows, or cloud points
  std::size_t width = 0;    // grid columns; 0 = same as size
  std::size_t blocks = 2;   // pieces of the ground truth
  double noise = 0.1;       // Gaussian standard deviation
  double weight = 1.0;      // uniform edge weight
  std::size_t neighbors = 5;   // knn-cloud
  std::size_t classes = 4;     // kl
  std::size_t sensors = 40;    // lasso operator rows
  double extra_edge_ratio = 0.1;  // lasso: random extra edges per vertex
  double lambda = 0.05;           // lasso sparsity weight
  std::uint64_t seed = 1;
};

struct Instance {
  Graph graph;
  NodeValues observations;   // per vertex, or the N sensor values (lasso)
  NodeValues truth;          // per vertex
  std::optional<LeadField> leadfield;
  std::vector<double> lambda;  // lasso only
};

/// Deterministic synthetic instance. Throws InputError on empty sizes.
Instance generate_instance(const GenOptions& options);

/// Block index of every vertex for the chosen graph layout.
std::vector<std::size_t> block_labels(const GenOptions& options);

/// Writes prefix.graph, prefix.obs, prefix.truth and, for lasso,
/// prefix.lambda and prefix.leadfield. Returns the written paths.
std::vector<std::string> write_instance(const std::string& prefix, const Instance& instance);

}  // namespace pcp
