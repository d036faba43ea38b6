#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcp {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

/// Malformed or inconsistent user input (files, flags, shapes).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure inside a solver (divergence, infeasible subproblem).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major block holding one `dim`-vector per node.
class NodeValues {
 public:
  NodeValues() = default;
  NodeValues(std::size_t num_nodes, std::size_t dim, double fill = 0.0)
      : dim_(dim), data_(num_nodes * dim, fill) {
    if (dim == 0) throw InputError("NodeValues: dimension must be positive");
  }
  NodeValues(std::size_t dim, std::vector<double> data) : dim_(dim), data_(std::move(data)) {
    if (dim == 0 || data_.size() % dim != 0) {
      throw InputError("NodeValues: data size is not a multiple of the dimension");
    }
  }

  std::size_t num_nodes() const { return dim_ ? data_.size() / dim_ : 0; }
  std::size_t dim() const { return dim_; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  double& at(std::size_t i, std::size_t k) { return data_[i * dim_ + k]; }
  double at(std::size_t i, std::size_t k) const { return data_[i * dim_ + k]; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  bool operator==(const NodeValues&) const = default;

 private:
  std::size_t dim_ = 1;
  std::vector<double> data_;
};

}  // namespace pcp
