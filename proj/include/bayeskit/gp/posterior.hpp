// Copyright 2026 The bayeskit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#ifndef BAYESKIT_GP_POSTERIOR_HPP
#define BAYESKIT_GP_POSTERIOR_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "bayeskit/core.hpp"
#include "bayeskit/gp/kernel.hpp"
#include "bayeskit/gp/mean.hpp"

namespace bayeskit {

/// Kernel, prior mean and observation noise variance of the GP model.
struct Hyperparameters {
  KernelSpec kernel;
  MeanSpec mean;
  double noise_variance = 0.0;

  Eigen::Index dim() const { return kernel.dim(); }

  void validate() const {
    kernel.validate();
    mean.validate();
    if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
      throw InvalidArgument("hyperparameters: noise variance must be finite and >= 0");
    }
  }
};

/// Evaluated points x_{1:n} and their observed values y_{1:n}.
class ObservationSet {
 public:
  explicit ObservationSet(Eigen::Index dim = 1) : dim_(dim) {
    if (dim < 1) throw InvalidArgument("observation set: dimension must be >= 1");
  }

  void add(Vector x, double y) {
    require_dim(x, dim_, "observation");
    if (!x.allFinite()) throw InvalidArgument("observation: point must be finite");
    if (!std::isfinite(y)) throw InvalidArgument("observation: value must be finite");
    points_.push_back(std::move(x));
    values_.push_back(y);
  }

  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Vector& point(std::size_t i) const { return points_[i]; }
  double value(std::size_t i) const { return values_[i]; }
  const std::vector<Vector>& points() const { return points_; }
  const std::vector<double>& values() const { return values_; }

  double max_value() const { return *std::max_element(values_.begin(), values_.end()); }

  friend bool operator==(const ObservationSet& a, const ObservationSet& b) {
    if (a.dim_ != b.dim_ || a.values_ != b.values_) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a.points_[i] != b.points_[i]) return false;
    }
    return true;
  }

 private:
  Eigen::Index dim_;
  std::vector<Vector> points_;
  std::vector<double> values_;
};

struct Predictive {
  double mean = 0.0;
  double variance = 0.0;

  double stddev() const { return std::sqrt(variance); }
};

struct PredictiveGradient {
  double mean = 0.0;
  double variance = 0.0;
  Vector grad_mean;
  Vector grad_variance;
};

struct JointPredictive {
  Vector means;
  Matrix covariance;
};

// Diagonal jitter, relative to the kernel amplitude: first attempt, growth
// factor, and last attempt before giving up.
inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterGrowth = 10.0;
inline constexpr double kJitterMax = 1e-2;

// Negative variances down to -kVarianceRoundoff * amplitude are roundoff.
inline constexpr double kVarianceRoundoff = 1e-10;

inline double clamp_variance(double v, double amplitude) {
  if (v >= 0.0) return v;
  if (v >= -kVarianceRoundoff * amplitude) return 0.0;
  throw NumericalFailure("posterior variance " + std::to_string(v) + " is negative beyond roundoff");
}

inline Matrix kernel_matrix(const KernelSpec& spec, const std::vector<Vector>& a,
                            const std::vector<Vector>& b) {
  Matrix k(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          detail::kernel_value(spec, a[i], b[j]);
    }
  }
  return k;
}

class PosteriorState;
PosteriorState fit_posterior(const ObservationSet& data, const Hyperparameters& hypers);

/// A GP conditioned on data: lower Cholesky factor of
/// K + (noise + jitter) I and the weights (K + (noise + jitter) I)^{-1} (y - mu_0).
/// Immutable once built.
class PosteriorState {
 public:
  const ObservationSet& data() const { return data_; }
  const Hyperparameters& hypers() const { return hypers_; }
  const Matrix& chol() const { return chol_; }
  const Vector& weights() const { return weights_; }
  /// Absolute diagonal jitter that made the factorization succeed.
  double jitter() const { return jitter_; }
  std::size_t size() const { return data_.size(); }
  Eigen::Index dim() const { return hypers_.dim(); }
  double amplitude() const { return hypers_.kernel.amplitude; }

  /// L^{-1} rhs.
  Vector half_solve(const Vector& rhs) const {
    return chol_.triangularView<Eigen::Lower>().solve(rhs);
  }

  /// (L L^T)^{-1} rhs.
  Vector solve(const Vector& rhs) const {
    return chol_.transpose().triangularView<Eigen::Upper>().solve(half_solve(rhs));
  }

  /// k(x_i, x) for every data point.
  Vector cross_kernel(const Vector& x) const {
    Vector k(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) {
      k[static_cast<Eigen::Index>(i)] = detail::kernel_value(hypers_.kernel, data_.point(i), x);
    }
    return k;
  }

  /// Row i holds d k(x_i, x) / dx.
  Matrix cross_kernel_jacobian(const Vector& x) const {
    Matrix jac(static_cast<Eigen::Index>(size()), dim());
    for (std::size_t i = 0; i < size(); ++i) {
      detail::kernel_value_grad(hypers_.kernel, x, data_.point(i),
                                jac.row(static_cast<Eigen::Index>(i)));
    }
    return jac;
  }

 private:
  friend PosteriorState fit_posterior(const ObservationSet&, const Hyperparameters&);

  PosteriorState(ObservationSet data, Hyperparameters hypers)
      : data_(std::move(data)), hypers_(std::move(hypers)) {}

  ObservationSet data_;
  Hyperparameters hypers_;
  Matrix chol_;
  Vector weights_;
  double jitter_ = 0.0;
};

/// Factorizes the noise-augmented kernel matrix with escalating jitter.
/// Empty data yields the prior.
inline PosteriorState fit_posterior(const ObservationSet& data, const Hyperparameters& hypers) {
  hypers.validate();
  if (data.dim() != hypers.dim()) {
    throw InvalidArgument("fit_posterior: data dimension " + std::to_string(data.dim()) +
                          " does not match kernel dimension " + std::to_string(hypers.dim()));
  }
  PosteriorState state(data, hypers);
  const auto n = static_cast<Eigen::Index>(data.size());
  if (n == 0) {
    state.chol_ = Matrix(0, 0);
    state.weights_ = Vector(0);
    return state;
  }

  const Matrix k = kernel_matrix(hypers.kernel, data.points(), data.points());
  Vector centered(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    centered[i] = data.value(static_cast<std::size_t>(i)) -
                  mean_eval(hypers.mean, data.point(static_cast<std::size_t>(i)));
  }

  const double amp = hypers.kernel.amplitude;
  double rel = kJitterStart;
  double jitter = rel * amp;
  while (true) {
    jitter = rel * amp;
    Matrix a = k;
    a.diagonal().array() += hypers.noise_variance + jitter;
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() == Eigen::Success) {
      Matrix l = llt.matrixL();
      if ((l.diagonal().array() > 0.0).all() && l.allFinite()) {
        state.chol_ = std::move(l);
        state.jitter_ = jitter;
        state.weights_ = state.solve(centered);
        return state;
      }
    }
    if (rel >= kJitterMax * (1.0 - 1e-12)) break;
    rel *= kJitterGrowth;
  }
  throw NumericalFailure("fit_posterior: Cholesky factorization failed with jitter up to " +
                             std::to_string(jitter),
                         jitter);
}

inline Predictive predict(const PosteriorState& state, const Vector& x) {
  require_dim(x, state.dim(), "predict");
  const auto& h = state.hypers();
  const double prior_var = h.kernel.amplitude;
  Predictive out{mean_eval(h.mean, x), prior_var};
  if (state.size() == 0) return out;
  const Vector k = state.cross_kernel(x);
  const Vector v = state.half_solve(k);
  out.mean += k.dot(state.weights());
  out.variance = clamp_variance(prior_var - v.squaredNorm(), prior_var);
  return out;
}

/// Posterior mean/variance and their gradients with respect to x.
inline PredictiveGradient predict_with_gradient(const PosteriorState& state, const Vector& x) {
  require_dim(x, state.dim(), "predict_with_gradient");
  const auto& h = state.hypers();
  PredictiveGradient out;
  out.mean = mean_eval(h.mean, x);
  out.variance = h.kernel.amplitude;
  out.grad_mean = mean_grad(h.mean, x);
  out.grad_variance = Vector::Zero(x.size());
  if (state.size() == 0) return out;
  const Vector k = state.cross_kernel(x);
  const Matrix jac = state.cross_kernel_jacobian(x);
  const Vector v = state.half_solve(k);
  out.mean += k.dot(state.weights());
  out.variance = clamp_variance(h.kernel.amplitude - v.squaredNorm(), h.kernel.amplitude);
  out.grad_mean += jac.transpose() * state.weights();
  const Vector kinv_k = state.chol().transpose().triangularView<Eigen::Upper>().solve(v);
  out.grad_variance = -2.0 * jac.transpose() * kinv_k;
  return out;
}

/// Posterior covariance Sigma_n(a, b).
inline double posterior_covariance(const PosteriorState& state, const Vector& a, const Vector& b) {
  const double prior = detail::kernel_value(state.hypers().kernel, a, b);
  if (state.size() == 0) return prior;
  return prior - state.half_solve(state.cross_kernel(a)).dot(state.half_solve(state.cross_kernel(b)));
}

/// Gradient of Sigma_n(a, b) with respect to b.
inline Vector posterior_covariance_grad(const PosteriorState& state, const Vector& a,
                                        const Vector& b) {
  Vector g(state.dim());
  detail::kernel_value_grad(state.hypers().kernel, b, a, g);
  if (state.size() == 0) return g;
  g -= state.cross_kernel_jacobian(b).transpose() * state.solve(state.cross_kernel(a));
  return g;
}

inline JointPredictive predict_joint(const PosteriorState& state, const std::vector<Vector>& xs) {
  if (xs.empty()) throw InvalidArgument("predict_joint: need at least one point");
  for (const auto& x : xs) require_dim(x, state.dim(), "predict_joint");
  const auto& h = state.hypers();
  const auto k = static_cast<Eigen::Index>(xs.size());
  JointPredictive out;
  out.means.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) out.means[i] = mean_eval(h.mean, xs[static_cast<std::size_t>(i)]);
  out.covariance = kernel_matrix(h.kernel, xs, xs);
  if (state.size() > 0) {
    const Matrix cross = kernel_matrix(h.kernel, state.data().points(), xs);
    out.means += cross.transpose() * state.weights();
    const Matrix v = state.chol().triangularView<Eigen::Lower>().solve(cross);
    out.covariance.noalias() -= v.transpose() * v;
  }
  Matrix sym = 0.5 * (out.covariance + out.covariance.transpose());
  for (Eigen::Index i = 0; i < k; ++i) sym(i, i) = clamp_variance(sym(i, i), h.kernel.amplitude);
  out.covariance = std::move(sym);
  return out;
}

/// Draws from a multivariate normal through a pivoted LDL^T factorization,
/// so that singular (rank-deficient) covariances are handled exactly.
class JointSampler {
 public:
  explicit JointSampler(JointPredictive joint) : means_(std::move(joint.means)) {
    Eigen::LDLT<Matrix> ldlt(joint.covariance);
    const Vector d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    const Matrix l = ldlt.matrixL();
    // Undo the pivoting: covariance = P^T L D L^T P.
    factor_ = ldlt.transpositionsP().transpose() * (l * d.asDiagonal());
  }

  Eigen::Index size() const { return means_.size(); }
  const Vector& means() const { return means_; }

  Vector draw(Rng& rng) const {
    Vector z(means_.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = standard_normal(rng);
    return means_ + factor_ * z;
  }

 private:
  Vector means_;
  Matrix factor_;
};

inline Vector sample_joint(const PosteriorState& state, const std::vector<Vector>& xs, Rng& rng) {
  return JointSampler(predict_joint(state, xs)).draw(rng);
}

/// Log density of the observed values under the prior (plus noise),
/// evaluated from an already fitted state.
inline double log_marginal_likelihood(const PosteriorState& state) {
  const auto n = static_cast<Eigen::Index>(state.size());
  if (n == 0) return 0.0;
  Vector centered(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    centered[i] = state.data().value(u) - mean_eval(state.hypers().mean, state.data().point(u));
  }
  const double quad = centered.dot(state.weights());
  const double log_det = 2.0 * state.chol().diagonal().array().log().sum();
  return -0.5 * quad - 0.5 * log_det - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

inline double log_marginal_likelihood(const ObservationSet& data, const Hyperparameters& hypers) {
  return log_marginal_likelihood(fit_posterior(data, hypers));
}

}  // namespace bayeskit

#endif  // BAYESKIT_GP_POSTERIOR_HPP
