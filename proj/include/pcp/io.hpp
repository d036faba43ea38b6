#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pcp/functional.hpp"
#include "pcp/graph.hpp"

namespace pcp {

/// Text graph: header `V E`, then E lines `u v w` (0-based ids, u != v).
/// Blank lines and lines starting with '#' are skipped. Parse errors throw
/// InputError as `path:line: message`.
Graph read_graph(const std::string& path);
void write_graph(const std::string& path, const Graph& graph);

/// One row per line, whitespace-separated decimals; all rows have the same
/// width. `expected_rows` is checked when given.
NodeValues read_rows(const std::string& path, std::optional<std::size_t> expected_rows = std::nullopt);
void write_rows(const std::string& path, const NodeValues& rows);

/// Header `N V`, then N rows of V decimals.
LeadField read_leadfield(const std::string& path);
void write_leadfield(const std::string& path, const LeadField& phi);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace pcp
