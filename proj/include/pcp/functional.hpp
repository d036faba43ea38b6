#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "pcp/graph.hpp"
#include "pcp/node_values.hpp"

namespace pcp {

/// Problem term f = smooth part + vertex-separable nonsmooth part.
///
/// A functional is defined over a fixed number of nodes (graph vertices, or
/// partition components after `reduce`) and a value dimension. All bulk
/// operations are pure and thread-count independent.
class Functional {
 public:
  virtual ~Functional() = default;

  virtual std::size_t num_nodes() const = 0;
  virtual std::size_t dim() const = 0;

  virtual double eval_smooth(const NodeValues& x, int threads = 1) const = 0;
  virtual void gradient_smooth(const NodeValues& x, NodeValues& grad, int threads = 1) const = 0;
  /// Sum of the separable nonsmooth terms; +infinity outside their domain.
  virtual double eval_nonsmooth(const NodeValues& x, int threads = 1) const = 0;
  /// In-place proximity operator with one step size per node.
  virtual void prox_nonsmooth(NodeValues& t, std::span<const double> steps, int threads = 1) const = 0;
  /// Projects onto the domain of the nonsmooth part.
  virtual void make_feasible(NodeValues& x) const = 0;
  virtual bool has_nonsmooth() const = 0;

  /// One-sided directional derivative of node v's terms at x_v along d, given
  /// the smooth gradient at that node. May be +infinity.
  virtual double directional_unary(std::size_t v, std::span<const double> x_v,
                                   std::span<const double> grad_v,
                                   std::span<const double> d) const = 0;

  /// Per-node bounds M_v such that the smooth gradient is cocoercive with
  /// respect to diag(M).
  virtual std::vector<double> lipschitz_diagonal() const = 0;

  /// Candidate nonzero directions for vector-valued nodes, shared by every
  /// vertex of a component whose current value is `center`.
  virtual std::vector<std::vector<double>> shift_directions(std::span<const double> center) const;

  /// Functional of the per-component values: eval(xi) = eval(lift(xi)).
  virtual std::unique_ptr<Functional> reduce(const Partition& partition) const = 0;

  double eval(const NodeValues& x, int threads = 1) const {
    return eval_smooth(x, threads) + eval_nonsmooth(x, threads);
  }
  void prox_nonsmooth(NodeValues& t, double step, int threads = 1) const {
    std::vector<double> steps(num_nodes(), step);
    prox_nonsmooth(t, steps, threads);
  }
};

/// f(x) = sum_v ||x_v - y_v||^2.
///
/// Stored as sum_v c_v ||x_v - m_v||^2 + r_v so that aggregation over
/// components stays in the same family (c: multiplicity, m: mean, r: spread).
class QuadraticFidelity final : public Functional {
 public:
  using Functional::prox_nonsmooth;
  explicit QuadraticFidelity(NodeValues observations);

  std::size_t num_nodes() const override { return weight_.size(); }
  std::size_t dim() const override { return mean_.dim(); }
  double eval_smooth(const NodeValues& x, int threads = 1) const override;
  void gradient_smooth(const NodeValues& x, NodeValues& grad, int threads = 1) const override;
  double eval_nonsmooth(const NodeValues&, int = 1) const override { return 0.0; }
  void prox_nonsmooth(NodeValues&, std::span<const double>, int = 1) const override {}
  void make_feasible(NodeValues&) const override {}
  bool has_nonsmooth() const override { return false; }
  double directional_unary(std::size_t v, std::span<const double> x_v,
                           std::span<const double> grad_v,
                           std::span<const double> d) const override;
  std::vector<double> lipschitz_diagonal() const override;
  std::unique_ptr<Functional> reduce(const Partition& partition) const override;

  const NodeValues& means() const { return mean_; }
  std::span<const double> multiplicities() const { return weight_; }

 private:
  QuadraticFidelity(std::vector<double> weight, NodeValues mean, std::vector<double> spread);

  std::vector<double> weight_;
  NodeValues mean_;
  std::vector<double> spread_;
};

/// Dense row-major N x V linear operator.
struct LeadField {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// f(x) = 1/2 ||y - phi x||^2 + sum_v (lambda_v |x_v| + indicator(x_v >= 0)).
class WeightedLassoNonneg final : public Functional {
 public:
  using Functional::prox_nonsmooth;
  WeightedLassoNonneg(std::vector<double> observations, LeadField phi, std::vector<double> lambda);

  std::size_t num_nodes() const override { return lambda_.size(); }
  std::size_t dim() const override { return 1; }
  double eval_smooth(const NodeValues& x, int threads = 1) const override;
  void gradient_smooth(const NodeValues& x, NodeValues& grad, int threads = 1) const override;
  double eval_nonsmooth(const NodeValues& x, int threads = 1) const override;
  void prox_nonsmooth(NodeValues& t, std::span<const double> steps, int threads = 1) const override;
  void make_feasible(NodeValues& x) const override;
  bool has_nonsmooth() const override { return true; }
  double directional_unary(std::size_t v, std::span<const double> x_v,
                           std::span<const double> grad_v,
                           std::span<const double> d) const override;
  std::vector<double> lipschitz_diagonal() const override;
  std::unique_ptr<Functional> reduce(const Partition& partition) const override;

  const LeadField& operator_matrix() const { return phi_; }
  std::span<const double> lambda() const { return lambda_; }

 private:
  std::vector<double> residual(const NodeValues& x, int threads) const;

  std::vector<double> y_;
  LeadField phi_;
  std::vector<double> lambda_;
  double lipschitz_;
};

/// f(x) = sum_v KL(beta u + (1 - beta) y_v || beta u + (1 - beta) x_v)
///        + sum_v indicator(x_v in simplex), u uniform over K classes.
///
/// Per node and class the KL term is C_vk - A_vk log(beta u_k + (1-beta) x_vk)
/// with A = smoothed target mass and C = sum of A log A, both additive over
/// components.
class KLSimplex final : public Functional {
 public:
  using Functional::prox_nonsmooth;
  static constexpr double kMinBeta = 1e-6;

  KLSimplex(const NodeValues& observations, double beta);

  std::size_t num_nodes() const override { return mass_.num_nodes(); }
  std::size_t dim() const override { return mass_.dim(); }
  double eval_smooth(const NodeValues& x, int threads = 1) const override;
  void gradient_smooth(const NodeValues& x, NodeValues& grad, int threads = 1) const override;
  double eval_nonsmooth(const NodeValues& x, int threads = 1) const override;
  void prox_nonsmooth(NodeValues& t, std::span<const double> steps, int threads = 1) const override;
  void make_feasible(NodeValues& x) const override;
  bool has_nonsmooth() const override { return true; }
  double directional_unary(std::size_t v, std::span<const double> x_v,
                           std::span<const double> grad_v,
                           std::span<const double> d) const override;
  std::vector<double> lipschitz_diagonal() const override;
  std::vector<std::vector<double>> shift_directions(std::span<const double> center) const override;
  std::unique_ptr<Functional> reduce(const Partition& partition) const override;

  double beta() const { return beta_; }

 private:
  KLSimplex(double beta, NodeValues mass, NodeValues entropy);

  double beta_;
  NodeValues mass_;     // A
  NodeValues entropy_;  // C
};

/// Simplex membership tolerance used by the indicator and by feasibility checks.
inline constexpr double kSimplexTol = 1e-9;

/// Euclidean projection onto the standard simplex (sort-based, exact).
void project_simplex(std::span<double> x);
bool in_simplex(std::span<const double> x, double tol = kSimplexTol);

/// F(x) = f(x) + sum_edges w_uv ||x_u - x_v||.
double total_variation(const EdgeTopology& topology, const NodeValues& x, int threads = 1);
double eval_objective(const Functional& functional, const EdgeTopology& topology,
                      const NodeValues& x, int threads = 1);

/// x_v = xi_{component(v)}.
NodeValues lift(const Partition& partition, const NodeValues& xi);

}  // namespace pcp
