#include "pcp/functional.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "pcp/parallel.hpp"

namespace pcp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_shape(const Functional& f, const NodeValues& x, const char* what) {
  if (x.num_nodes() != f.num_nodes() || x.dim() != f.dim()) {
    throw InputError(std::string(what) + ": expected " + std::to_string(f.num_nodes()) + " x " +
                     std::to_string(f.dim()) + " values, got " + std::to_string(x.num_nodes()) +
                     " x " + std::to_string(x.dim()));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

std::vector<std::vector<double>> Functional::shift_directions(std::span<const double> center) const {
  std::vector<std::vector<double>> dirs;
  for (std::size_t k = 0; k < center.size(); ++k) {
    for (double sign : {-1.0, 1.0}) {
      std::vector<double> d(center.size(), 0.0);
      d[k] = sign;
      dirs.push_back(std::move(d));
    }
  }
  return dirs;
}

// ---------------------------------------------------------------- quadratic

QuadraticFidelity::QuadraticFidelity(NodeValues observations)
    : weight_(observations.num_nodes(), 1.0),
      mean_(std::move(observations)),
      spread_(mean_.num_nodes(), 0.0) {
  for (double y : mean_.flat()) {
    if (!std::isfinite(y)) throw InputError("QuadraticFidelity: non-finite observation");
  }
}

QuadraticFidelity::QuadraticFidelity(std::vector<double> weight, NodeValues mean,
                                     std::vector<double> spread)
    : weight_(std::move(weight)), mean_(std::move(mean)), spread_(std::move(spread)) {}

double QuadraticFidelity::eval_smooth(const NodeValues& x, int threads) const {
  check_shape(*this, x, "QuadraticFidelity");
  return deterministic_sum(num_nodes(), threads, [&](std::size_t v) {
    const auto xv = x.row(v);
    const auto mv = mean_.row(v);
    double s = 0.0;
    for (std::size_t k = 0; k < xv.size(); ++k) s += (xv[k] - mv[k]) * (xv[k] - mv[k]);
    return weight_[v] * s + spread_[v];
  });
}

void QuadraticFidelity::gradient_smooth(const NodeValues& x, NodeValues& grad, int threads) const {
  check_shape(*this, x, "QuadraticFidelity");
  if (grad.num_nodes() != x.num_nodes() || grad.dim() != x.dim()) grad = NodeValues(x.num_nodes(), x.dim());
  const std::size_t n = dim();
  parallel_for(num_nodes(), threads, [&](std::size_t v) {
    for (std::size_t k = 0; k < n; ++k) grad.at(v, k) = 2.0 * weight_[v] * (x.at(v, k) - mean_.at(v, k));
  });
}

double QuadraticFidelity::directional_unary(std::size_t, std::span<const double>,
                                            std::span<const double> grad_v,
                                            std::span<const double> d) const {
  return dot(grad_v, d);
}

std::vector<double> QuadraticFidelity::lipschitz_diagonal() const {
  std::vector<double> out(weight_.size());
  for (std::size_t v = 0; v < weight_.size(); ++v) out[v] = 2.0 * weight_[v];
  return out;
}

std::unique_ptr<Functional> QuadraticFidelity::reduce(const Partition& partition) const {
  if (partition.num_vertices() != num_nodes()) throw InputError("QuadraticFidelity::reduce: partition size mismatch");
  const std::size_t nc = partition.num_components();
  const std::size_t n = dim();
  std::vector<double> weight(nc, 0.0), spread(nc, 0.0);
  NodeValues mean(nc, n, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto comp = partition.component(c);
    for (VertexId v : comp) {
      weight[c] += weight_[v];
      for (std::size_t k = 0; k < n; ++k) mean.at(c, k) += weight_[v] * mean_.at(v, k);
    }
    for (std::size_t k = 0; k < n; ++k) mean.at(c, k) /= weight[c];
    // second pass keeps the spread accurate when the mean is large
    for (VertexId v : comp) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double diff = mean_.at(v, k) - mean.at(c, k);
        s += diff * diff;
      }
      spread[c] += spread_[v] + weight_[v] * s;
    }
  }
  return std::unique_ptr<Functional>(new QuadraticFidelity(std::move(weight), std::move(mean), std::move(spread)));
}

// -------------------------------------------------------------------- lasso

namespace {

double estimate_lipschitz(const LeadField& phi) {
  if (phi.rows == 0 || phi.cols == 0) return 0.0;
  double frobenius2 = 0.0;
  for (double a : phi.data) frobenius2 += a * a;
  std::vector<double> v(phi.cols, 1.0 / std::sqrt(static_cast<double>(phi.cols)));
  std::vector<double> r(phi.rows), w(phi.cols);
  double estimate = 0.0;
  for (int it = 0; it < 50; ++it) {
    for (std::size_t i = 0; i < phi.rows; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < phi.cols; ++j) s += phi.at(i, j) * v[j];
      r[i] = s;
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < phi.rows; ++i) {
      for (std::size_t j = 0; j < phi.cols; ++j) w[j] += phi.at(i, j) * r[i];
    }
    double norm = 0.0;
    for (double a : w) norm += a * a;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    estimate = norm;
    for (std::size_t j = 0; j < phi.cols; ++j) v[j] = w[j] / norm;
  }
  // power iteration approaches the top eigenvalue from below
  return std::min(1.05 * estimate, frobenius2);
}

}  // namespace

WeightedLassoNonneg::WeightedLassoNonneg(std::vector<double> observations, LeadField phi,
                                         std::vector<double> lambda)
    : y_(std::move(observations)), phi_(std::move(phi)), lambda_(std::move(lambda)) {
  if (phi_.data.size() != phi_.rows * phi_.cols) throw InputError("WeightedLassoNonneg: operator data size mismatch");
  if (phi_.rows != y_.size()) {
    throw InputError("WeightedLassoNonneg: operator has " + std::to_string(phi_.rows) +
                     " rows but there are " + std::to_string(y_.size()) + " observations");
  }
  if (phi_.cols != lambda_.size()) {
    throw InputError("WeightedLassoNonneg: operator has " + std::to_string(phi_.cols) +
                     " columns but there are " + std::to_string(lambda_.size()) + " lambda values");
  }
  for (double l : lambda_) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw InputError("WeightedLassoNonneg: lambda must be finite and nonnegative");
  }
  lipschitz_ = estimate_lipschitz(phi_);
}

std::vector<double> WeightedLassoNonneg::residual(const NodeValues& x, int threads) const {
  check_shape(*this, x, "WeightedLassoNonneg");
  std::vector<double> r(phi_.rows);
  const auto xs = x.flat();
  parallel_for(phi_.rows, threads, [&](std::size_t i) {
    double s = -y_[i];
    const double* row = phi_.data.data() + i * phi_.cols;
    for (std::size_t j = 0; j < phi_.cols; ++j) s += row[j] * xs[j];
    r[i] = s;
  }, 16);
  return r;
}

double WeightedLassoNonneg::eval_smooth(const NodeValues& x, int threads) const {
  const auto r = residual(x, threads);
  double s = 0.0;
  for (double a : r) s += a * a;
  return 0.5 * s;
}

void WeightedLassoNonneg::gradient_smooth(const NodeValues& x, NodeValues& grad, int threads) const {
  const auto r = residual(x, threads);
  if (grad.num_nodes() != num_nodes() || grad.dim() != 1) grad = NodeValues(num_nodes(), 1);
  auto g = grad.flat();
  parallel_for(phi_.cols, threads, [&](std::size_t j) {
    double s = 0.0;
    for (std::size_t i = 0; i < phi_.rows; ++i) s += phi_.data[i * phi_.cols + j] * r[i];
    g[j] = s;
  }, 64);
}

double WeightedLassoNonneg::eval_nonsmooth(const NodeValues& x, int threads) const {
  check_shape(*this, x, "WeightedLassoNonneg");
  const auto xs = x.flat();
  return deterministic_sum(num_nodes(), threads, [&](std::size_t v) {
    return xs[v] < 0.0 ? kInf : lambda_[v] * xs[v];
  });
}

void WeightedLassoNonneg::prox_nonsmooth(NodeValues& t, std::span<const double> steps, int threads) const {
  auto ts = t.flat();
  parallel_for(num_nodes(), threads, [&](std::size_t v) {
    ts[v] = std::max(0.0, ts[v] - steps[v] * lambda_[v]);
  });
}

void WeightedLassoNonneg::make_feasible(NodeValues& x) const {
  for (double& a : x.flat()) a = std::max(0.0, a);
}

double WeightedLassoNonneg::directional_unary(std::size_t v, std::span<const double> x_v,
                                              std::span<const double> grad_v,
                                              std::span<const double> d) const {
  const double dv = d[0];
  if (dv == 0.0) return 0.0;
  if (x_v[0] <= 0.0 && dv < 0.0) return kInf;
  return (grad_v[0] + lambda_[v]) * dv;
}

std::vector<double> WeightedLassoNonneg::lipschitz_diagonal() const {
  return std::vector<double>(num_nodes(), lipschitz_);
}

std::unique_ptr<Functional> WeightedLassoNonneg::reduce(const Partition& partition) const {
  if (partition.num_vertices() != num_nodes()) throw InputError("WeightedLassoNonneg::reduce: partition size mismatch");
  const std::size_t nc = partition.num_components();
  LeadField reduced{phi_.rows, nc, std::vector<double>(phi_.rows * nc, 0.0)};
  std::vector<double> lambda(nc, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    for (VertexId v : partition.component(c)) {
      lambda[c] += lambda_[v];
      for (std::size_t i = 0; i < phi_.rows; ++i) reduced.data[i * nc + c] += phi_.at(i, v);
    }
  }
  return std::make_unique<WeightedLassoNonneg>(y_, std::move(reduced), std::move(lambda));
}

// ----------------------------------------------------------- KL + simplex

KLSimplex::KLSimplex(const NodeValues& observations, double beta)
    : beta_(beta),
      mass_(observations.num_nodes(), observations.dim()),
      entropy_(observations.num_nodes(), observations.dim()) {
  if (!(beta >= kMinBeta && beta < 1.0)) {
    throw InputError("KLSimplex: beta must lie in [1e-6, 1), got " + std::to_string(beta));
  }
  const std::size_t K = observations.dim();
  const double u = 1.0 / static_cast<double>(K);
  for (std::size_t v = 0; v < observations.num_nodes(); ++v) {
    const auto yv = observations.row(v);
    if (!in_simplex(yv, 1e-6)) {
      throw InputError("KLSimplex: observation row " + std::to_string(v) + " is not a probability vector");
    }
    for (std::size_t k = 0; k < K; ++k) {
      const double a = beta * u + (1.0 - beta) * std::max(0.0, yv[k]);
      mass_.at(v, k) = a;
      entropy_.at(v, k) = a * std::log(a);
    }
  }
}

KLSimplex::KLSimplex(double beta, NodeValues mass, NodeValues entropy)
    : beta_(beta), mass_(std::move(mass)), entropy_(std::move(entropy)) {}

double KLSimplex::eval_smooth(const NodeValues& x, int threads) const {
  check_shape(*this, x, "KLSimplex");
  const std::size_t K = dim();
  const double bu = beta_ / static_cast<double>(K);
  return deterministic_sum(num_nodes(), threads, [&](std::size_t v) {
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double b = bu + (1.0 - beta_) * x.at(v, k);
      if (!(b > 0.0)) return kInf;
      s += entropy_.at(v, k) - mass_.at(v, k) * std::log(b);
    }
    return s;
  });
}

void KLSimplex::gradient_smooth(const NodeValues& x, NodeValues& grad, int threads) const {
  check_shape(*this, x, "KLSimplex");
  if (grad.num_nodes() != x.num_nodes() || grad.dim() != x.dim()) grad = NodeValues(x.num_nodes(), x.dim());
  const std::size_t K = dim();
  const double bu = beta_ / static_cast<double>(K);
  std::atomic<bool> outside{false};
  parallel_for(num_nodes(), threads, [&](std::size_t v) {
    for (std::size_t k = 0; k < K; ++k) {
      const double b = bu + (1.0 - beta_) * x.at(v, k);
      if (!(b > 0.0)) outside.store(true, std::memory_order_relaxed);
      grad.at(v, k) = -(1.0 - beta_) * mass_.at(v, k) / b;
    }
  });
  if (outside) throw SolverError("KLSimplex: gradient evaluated outside the smooth domain");
}

double KLSimplex::eval_nonsmooth(const NodeValues& x, int threads) const {
  check_shape(*this, x, "KLSimplex");
  return deterministic_sum(num_nodes(), threads, [&](std::size_t v) {
    return in_simplex(x.row(v)) ? 0.0 : kInf;
  });
}

void KLSimplex::prox_nonsmooth(NodeValues& t, std::span<const double>, int threads) const {
  parallel_for(num_nodes(), threads, [&](std::size_t v) { project_simplex(t.row(v)); });
}

void KLSimplex::make_feasible(NodeValues& x) const {
  for (std::size_t v = 0; v < x.num_nodes(); ++v) project_simplex(x.row(v));
}

double KLSimplex::directional_unary(std::size_t, std::span<const double> x_v,
                                    std::span<const double> grad_v,
                                    std::span<const double> d) const {
  double sum = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    sum += d[k];
    scale += std::abs(d[k]);
    if (x_v[k] <= 0.0 && d[k] < 0.0) return kInf;
  }
  if (std::abs(sum) > 1e-12 * (1.0 + scale)) return kInf;
  return dot(grad_v, d);
}

std::vector<double> KLSimplex::lipschitz_diagonal() const {
  const std::size_t K = dim();
  const double bu = beta_ / static_cast<double>(K);
  std::vector<double> out(num_nodes(), 0.0);
  for (std::size_t v = 0; v < num_nodes(); ++v) {
    for (std::size_t k = 0; k < K; ++k) {
      // curvature is largest where the denominator is smallest (x_k = 0)
      out[v] = std::max(out[v], (1.0 - beta_) * (1.0 - beta_) * mass_.at(v, k) / (bu * bu));
    }
  }
  return out;
}

std::vector<std::vector<double>> KLSimplex::shift_directions(std::span<const double> center) const {
  std::vector<std::vector<double>> dirs;
  for (std::size_t k = 0; k < center.size(); ++k) {
    std::vector<double> d(center.begin(), center.end());
    for (double& a : d) a = -a;
    d[k] += 1.0;
    double norm = 0.0;
    for (double a : d) norm += a * a;
    norm = std::sqrt(norm);
    if (norm < 1e-12) continue;
    for (double& a : d) a /= norm;
    dirs.push_back(std::move(d));
  }
  return dirs;
}

std::unique_ptr<Functional> KLSimplex::reduce(const Partition& partition) const {
  if (partition.num_vertices() != num_nodes()) throw InputError("KLSimplex::reduce: partition size mismatch");
  const std::size_t nc = partition.num_components();
  const std::size_t K = dim();
  NodeValues mass(nc, K, 0.0), entropy(nc, K, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    for (VertexId v : partition.component(c)) {
      for (std::size_t k = 0; k < K; ++k) {
        mass.at(c, k) += mass_.at(v, k);
        entropy.at(c, k) += entropy_.at(v, k);
      }
    }
  }
  return std::unique_ptr<Functional>(new KLSimplex(beta_, std::move(mass), std::move(entropy)));
}

// ------------------------------------------------------------------ helpers

void project_simplex(std::span<double> x) {
  const std::size_t n = x.size();
  if (n == 0) return;
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0, threshold = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cumulative += sorted[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - t > 0.0) threshold = t;
  }
  for (double& a : x) a = std::max(0.0, a - threshold);
}

bool in_simplex(std::span<const double> x, double tol) {
  double sum = 0.0;
  for (double a : x) {
    if (!(a >= -tol)) return false;
    sum += a;
  }
  return std::abs(sum - 1.0) <= tol;
}

double total_variation(const EdgeTopology& topology, const NodeValues& x, int threads) {
  const std::size_t n = x.dim();
  return deterministic_sum(topology.edges.size(), threads, [&](std::size_t e) {
    const auto xu = x.row(topology.edges[e].u);
    const auto xv = x.row(topology.edges[e].v);
    if (n == 1) return topology.weights[e] * std::abs(xu[0] - xv[0]);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += (xu[k] - xv[k]) * (xu[k] - xv[k]);
    return topology.weights[e] * std::sqrt(s);
  });
}

double eval_objective(const Functional& functional, const EdgeTopology& topology,
                      const NodeValues& x, int threads) {
  if (topology.num_nodes != functional.num_nodes()) {
    throw InputError("eval_objective: graph and functional node counts differ");
  }
  check_shape(functional, x, "eval_objective");
  return functional.eval(x, threads) + total_variation(topology, x, threads);
}

NodeValues lift(const Partition& partition, const NodeValues& xi) {
  if (xi.num_nodes() != partition.num_components()) throw InputError("lift: one value row per component expected");
  NodeValues x(partition.num_vertices(), xi.dim());
  for (std::size_t c = 0; c < partition.num_components(); ++c) {
    const auto src = xi.row(c);
    for (VertexId v : partition.component(c)) std::copy(src.begin(), src.end(), x.row(v).begin());
  }
  return x;
}

}  // namespace pcp
