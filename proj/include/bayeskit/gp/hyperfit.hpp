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

#ifndef BAYESKIT_GP_HYPERFIT_HPP
#define BAYESKIT_GP_HYPERFIT_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "bayeskit/acqopt.hpp"
#include "bayeskit/core.hpp"
#include "bayeskit/gp/posterior.hpp"

namespace bayeskit {

enum class HyperParamKind { Amplitude, InvSqLengthscale, NoiseVariance, MeanConstant, MeanCoefficient };

/// One free scalar of the model. Positive scalars (amplitude, inverse squared
/// lengthscales, noise variance) are searched and sampled in log space; the
/// box is expressed in those transformed coordinates.
struct HyperParamInfo {
  HyperParamKind kind;
  Eigen::Index index = 0;  // lengthscale or coefficient index
  double lower = 0.0;
  double upper = 0.0;

  bool log_scale() const {
    return kind == HyperParamKind::Amplitude || kind == HyperParamKind::InvSqLengthscale ||
           kind == HyperParamKind::NoiseVariance;
  }
};

/// Which scalars of a template Hyperparameters are estimated, and the search
/// box for each. Scalars not listed keep their template value.
class HyperSpace {
 public:
  struct Options {
    bool fit_amplitude = true;
    bool fit_lengthscales = true;
    bool fit_noise = false;
    bool fit_mean = true;
  };

  HyperSpace(Hyperparameters base, std::vector<HyperParamInfo> params)
      : base_(std::move(base)), params_(std::move(params)) {
    base_.validate();
    for (const auto& p : params_) {
      if (!(p.lower < p.upper)) throw InvalidArgument("hyper space: empty search interval");
    }
  }

  /// Data-scaled default box: amplitude within [1e-2, 1e2] x var(y),
  /// lengthscales within [0.02, 5] x box width, noise within [1e-8, 1] x
  /// var(y), constant mean within the observed range padded by its width.
  static HyperSpace standard(const Hyperparameters& base, const ObservationSet& data,
                             const Bounds& domain, Options opt) {
    double lo = -1.0, hi = 1.0, var = 1.0;
    if (!data.empty()) {
      const auto& y = data.values();
      lo = *std::min_element(y.begin(), y.end());
      hi = *std::max_element(y.begin(), y.end());
      if (data.size() >= 2) {
        double m = 0.0;
        for (double v : y) m += v;
        m /= static_cast<double>(y.size());
        double ss = 0.0;
        for (double v : y) ss += (v - m) * (v - m);
        var = ss / static_cast<double>(y.size() - 1);
      }
      if (!(var > 1e-12 * (1.0 + hi * hi))) var = 1.0;
    }
    const double sd = std::sqrt(var);
    std::vector<HyperParamInfo> params;
    if (opt.fit_amplitude) {
      params.push_back({HyperParamKind::Amplitude, 0, std::log(1e-2 * var), std::log(1e2 * var)});
    }
    if (opt.fit_lengthscales) {
      for (Eigen::Index i = 0; i < base.dim(); ++i) {
        const double w = domain.upper[i] - domain.lower[i];
        params.push_back({HyperParamKind::InvSqLengthscale, i, std::log(1.0 / (25.0 * w * w)),
                          std::log(1.0 / (4e-4 * w * w))});
      }
    }
    if (opt.fit_noise) {
      params.push_back({HyperParamKind::NoiseVariance, 0, std::log(1e-8 * var), std::log(var)});
    }
    if (opt.fit_mean) {
      const double pad = (hi - lo) + sd;
      params.push_back({HyperParamKind::MeanConstant, 0, lo - pad, hi + pad});
      for (Eigen::Index i = 0; i < base.mean.size(); ++i) {
        params.push_back({HyperParamKind::MeanCoefficient, i, -1e3 * sd, 1e3 * sd});
      }
    }
    return HyperSpace(base, std::move(params));
  }

  const Hyperparameters& base() const { return base_; }
  const std::vector<HyperParamInfo>& params() const { return params_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(params_.size()); }

  Bounds box() const {
    Vector lo(size()), hi(size());
    for (Eigen::Index i = 0; i < size(); ++i) {
      lo[i] = params_[static_cast<std::size_t>(i)].lower;
      hi[i] = params_[static_cast<std::size_t>(i)].upper;
    }
    return Bounds(lo, hi);
  }

  Vector encode(const Hyperparameters& h) const {
    Vector theta(size());
    for (Eigen::Index i = 0; i < size(); ++i) {
      const auto& p = params_[static_cast<std::size_t>(i)];
      double v = 0.0;
      switch (p.kind) {
        case HyperParamKind::Amplitude: v = std::log(h.kernel.amplitude); break;
        case HyperParamKind::InvSqLengthscale: v = std::log(h.kernel.inv_sq_lengthscales[p.index]); break;
        case HyperParamKind::NoiseVariance: v = std::log(h.noise_variance); break;
        case HyperParamKind::MeanConstant: v = h.mean.constant; break;
        case HyperParamKind::MeanCoefficient: v = h.mean.coefficients[p.index]; break;
      }
      theta[i] = v;
    }
    return theta;
  }

  Hyperparameters decode(const Vector& theta) const {
    require_dim(theta, size(), "HyperSpace::decode");
    Hyperparameters h = base_;
    for (Eigen::Index i = 0; i < size(); ++i) {
      const auto& p = params_[static_cast<std::size_t>(i)];
      switch (p.kind) {
        case HyperParamKind::Amplitude: h.kernel.amplitude = std::exp(theta[i]); break;
        case HyperParamKind::InvSqLengthscale: h.kernel.inv_sq_lengthscales[p.index] = std::exp(theta[i]); break;
        case HyperParamKind::NoiseVariance: h.noise_variance = std::exp(theta[i]); break;
        case HyperParamKind::MeanConstant: h.mean.constant = theta[i]; break;
        case HyperParamKind::MeanCoefficient: h.mean.coefficients[p.index] = theta[i]; break;
      }
    }
    return h;
  }

 private:
  Hyperparameters base_;
  std::vector<HyperParamInfo> params_;
};

/// Prior on one scalar, stated on its natural (untransformed) scale.
/// LogNormal(m, s) means log(value) ~ Normal(m, s).
struct ScalarPrior {
  enum class Kind { Flat, Uniform, Normal, LogNormal };
  Kind kind = Kind::Flat;
  double a = 0.0;
  double b = 1.0;

  static ScalarPrior flat() { return {}; }
  static ScalarPrior uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
  static ScalarPrior normal(double m, double s) { return {Kind::Normal, m, s}; }
  static ScalarPrior log_normal(double m, double s) { return {Kind::LogNormal, m, s}; }

  void validate() const {
    if (kind == Kind::Uniform && !(a < b)) throw InvalidArgument("uniform prior needs lo < hi");
    if ((kind == Kind::Normal || kind == Kind::LogNormal) && !(b > 0.0)) {
      throw InvalidArgument("prior scale must be > 0");
    }
  }

  double log_density(double p) const {
    constexpr double kLogSqrt2Pi = 0.91893853320467274178;
    switch (kind) {
      case Kind::Flat: return 0.0;
      case Kind::Uniform:
        return (p >= a && p <= b) ? -std::log(b - a) : -std::numeric_limits<double>::infinity();
      case Kind::Normal: {
        const double z = (p - a) / b;
        return -0.5 * z * z - std::log(b) - kLogSqrt2Pi;
      }
      case Kind::LogNormal: {
        if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
        const double z = (std::log(p) - a) / b;
        return -0.5 * z * z - std::log(b) - kLogSqrt2Pi - std::log(p);
      }
    }
    return 0.0;
  }

  /// d log_density / dp (zero inside a uniform's support).
  double log_density_grad(double p) const {
    switch (kind) {
      case Kind::Normal: return -(p - a) / (b * b);
      case Kind::LogNormal: return (-(std::log(p) - a) / (b * b) - 1.0) / p;
      default: return 0.0;
    }
  }
};

/// Per-parameter priors, aligned with HyperSpace::params().
struct HyperPrior {
  std::vector<ScalarPrior> per_param;

  static HyperPrior flat(Eigen::Index n) {
    return HyperPrior{std::vector<ScalarPrior>(static_cast<std::size_t>(n))};
  }

  void validate(const HyperSpace& space) const {
    if (static_cast<Eigen::Index>(per_param.size()) != space.size()) {
      throw InvalidArgument("hyper prior: need one prior per free hyperparameter");
    }
    for (const auto& p : per_param) p.validate();
  }

  /// log P(eta) at transformed coordinates theta. With `jacobian`, returns
  /// the density of theta itself (adds log|d value / d theta|).
  double log_density(const HyperSpace& space, const Vector& theta, bool jacobian) const {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < space.size(); ++i) {
      const auto& info = space.params()[static_cast<std::size_t>(i)];
      const double natural = info.log_scale() ? std::exp(theta[i]) : theta[i];
      lp += per_param[static_cast<std::size_t>(i)].log_density(natural);
      if (jacobian && info.log_scale()) lp += theta[i];
    }
    return lp;
  }

  Vector log_density_grad(const HyperSpace& space, const Vector& theta) const {
    Vector g(space.size());
    for (Eigen::Index i = 0; i < space.size(); ++i) {
      const auto& info = space.params()[static_cast<std::size_t>(i)];
      const double natural = info.log_scale() ? std::exp(theta[i]) : theta[i];
      const double dp = per_param[static_cast<std::size_t>(i)].log_density_grad(natural);
      g[i] = info.log_scale() ? dp * natural : dp;
    }
    return g;
  }
};

/// Log marginal likelihood and its gradient in the transformed coordinates of
/// `space`. Jitter scales with the amplitude and is differentiated as such.
inline double log_marginal_likelihood_with_gradient(const ObservationSet& data, const HyperSpace& space,
                                                    const Vector& theta, Vector* grad) {
  const Hyperparameters h = space.decode(theta);
  const PosteriorState state = fit_posterior(data, h);
  const double value = log_marginal_likelihood(state);
  if (grad == nullptr) return value;
  const auto n = static_cast<Eigen::Index>(data.size());
  grad->setZero(space.size());
  if (n == 0) return value;

  const Vector& alpha = state.weights();
  Matrix w = alpha * alpha.transpose();
  {
    Matrix kinv = Matrix::Identity(n, n);
    state.chol().triangularView<Eigen::Lower>().solveInPlace(kinv);
    state.chol().transpose().triangularView<Eigen::Upper>().solveInPlace(kinv);
    w -= kinv;
  }
  const auto& pts = data.points();
  const auto& kern = h.kernel;
  for (Eigen::Index p = 0; p < space.size(); ++p) {
    const auto& info = space.params()[static_cast<std::size_t>(p)];
    double g = 0.0;
    switch (info.kind) {
      case HyperParamKind::Amplitude: {
        const Matrix k = kernel_matrix(kern, pts, pts);
        g = 0.5 * ((w.array() * k.array()).sum() + state.jitter() * w.trace());
        break;
      }
      case HyperParamKind::InvSqLengthscale: {
        const Eigen::Index c = info.index;
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index j = 0; j < i; ++j) {
            const auto& xi = pts[static_cast<std::size_t>(i)];
            const auto& xj = pts[static_cast<std::size_t>(j)];
            const double s = detail::scaled_sq_distance(kern.inv_sq_lengthscales, xi, xj);
            const double diff = xi[c] - xj[c];
            const double dk = detail::kernel_profile(kern.family, kern.amplitude, s).d_sq *
                              kern.inv_sq_lengthscales[c] * diff * diff;
            g += w(i, j) * dk;  // symmetric pair counted once, times two, times 1/2
          }
        }
        break;
      }
      case HyperParamKind::NoiseVariance:
        g = 0.5 * h.noise_variance * w.trace();
        break;
      case HyperParamKind::MeanConstant:
        g = alpha.sum();
        break;
      case HyperParamKind::MeanCoefficient: {
        const auto& f = h.mean.basis[static_cast<std::size_t>(info.index)];
        for (Eigen::Index i = 0; i < n; ++i) g += alpha[i] * f.value(pts[static_cast<std::size_t>(i)]);
        break;
      }
    }
    (*grad)[p] = g;
  }
  return value;
}

/// MLE maximizes the marginal likelihood; MAP adds the log prior density of
/// the natural-scale parameters.
struct FitMode {
  enum class Kind { MLE, MAP };
  Kind kind = Kind::MLE;
  HyperPrior prior;

  static FitMode mle() { return {}; }
  static FitMode map(HyperPrior prior) { return {Kind::MAP, std::move(prior)}; }
};

struct HyperFitResult {
  Hyperparameters hypers;
  double objective = -std::numeric_limits<double>::infinity();
  std::vector<double> start_objectives;
  std::vector<double> final_objectives;
};

/// Best of `restarts` local ascents. The first start is the template value
/// (clamped into the box), the rest are uniform in the box.
inline HyperFitResult fit_hyperparameters(const ObservationSet& data, const HyperSpace& space,
                                          const FitMode& mode, int restarts, Rng& rng) {
  if (data.size() < 2) throw InvalidArgument("fit_hyperparameters: need at least 2 observations");
  if (restarts < 1) throw InvalidArgument("fit_hyperparameters: restarts must be >= 1");
  if (space.size() == 0) {
    return {space.base(), log_marginal_likelihood(data, space.base()), {}, {}};
  }
  const bool map = mode.kind == FitMode::Kind::MAP;
  Bounds box = space.box();
  if (map) {
    mode.prior.validate(space);
    // Keep the search inside uniform supports so the objective stays finite.
    for (Eigen::Index i = 0; i < space.size(); ++i) {
      const auto& pr = mode.prior.per_param[static_cast<std::size_t>(i)];
      if (pr.kind != ScalarPrior::Kind::Uniform) continue;
      const bool lg = space.params()[static_cast<std::size_t>(i)].log_scale();
      if (lg && !(pr.b > 0.0)) throw InvalidArgument("uniform prior on a positive parameter must allow positive values");
      const double lo = lg ? std::log(std::max(pr.a, std::numeric_limits<double>::min())) : pr.a;
      const double hi = lg ? std::log(pr.b) : pr.b;
      box.lower[i] = std::max(box.lower[i], lo);
      box.upper[i] = std::min(box.upper[i], hi);
      if (!(box.lower[i] < box.upper[i])) {
        throw InvalidArgument("fit_hyperparameters: uniform prior does not intersect the search box");
      }
    }
  }

  const Objective objective = [&](const Vector& theta, Vector* g) {
    double v = 0.0;
    try {
      v = log_marginal_likelihood_with_gradient(data, space, theta, g);
    } catch (const NumericalFailure&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    if (map) {
      v += mode.prior.log_density(space, theta, false);
      if (g != nullptr) *g += mode.prior.log_density_grad(space, theta);
    }
    return v;
  };

  AscentConfig local;
  local.iterations = 200;
  local.convergence_tol = 1e-9;

  HyperFitResult best;
  Vector best_theta;
  for (int r = 0; r < restarts; ++r) {
    const Vector start = r == 0 ? project_to_bounds(space.encode(space.base()), box) : uniform_point(box, rng);
    best.start_objectives.push_back(objective(start, nullptr));
    try {
      auto res = local_gradient_ascent(objective, start, box, local);
      best.final_objectives.push_back(res.value);
      if (best_theta.size() == 0 || res.value > best.objective) {
        best.objective = res.value;
        best_theta = res.x;
      }
    } catch (const NumericalFailure&) {
      best.final_objectives.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  if (best_theta.size() == 0) throw NumericalFailure("fit_hyperparameters: every restart failed");
  best.hypers = space.decode(best_theta);
  return best;
}

struct SliceOptions {
  double width = 1.0;     // initial bracket width, transformed units
  int max_step_out = 32;
  int max_shrink = 200;
};

/// Coordinate-wise univariate slice sampling of the hyperparameter posterior
/// in transformed coordinates. Returns `count` draws after `burn_in` sweeps.
inline std::vector<Hyperparameters> slice_sample_hyperparameters(const ObservationSet& data,
                                                                 const HyperSpace& space,
                                                                 const HyperPrior& prior, int count,
                                                                 int burn_in, Rng& rng,
                                                                 SliceOptions opt = {}) {
  if (count < 1 || burn_in < 0) throw InvalidArgument("slice sampling: need count >= 1, burn_in >= 0");
  prior.validate(space);
  for (const auto& p : prior.per_param) {
    if (p.kind == ScalarPrior::Kind::Flat) {
      throw InvalidArgument("slice sampling requires a proper prior on every sampled parameter");
    }
  }
  const auto log_target = [&](const Vector& theta) {
    const double lp = prior.log_density(space, theta, true);
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    if (data.empty()) return lp;
    try {
      const double ll = log_marginal_likelihood(data, space.decode(theta));
      return std::isfinite(ll) ? lp + ll : -std::numeric_limits<double>::infinity();
    } catch (const NumericalFailure&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  Vector theta = space.encode(space.base());
  // Start uniform coordinates inside their support.
  for (Eigen::Index i = 0; i < space.size(); ++i) {
    const auto& pr = prior.per_param[static_cast<std::size_t>(i)];
    if (pr.kind != ScalarPrior::Kind::Uniform) continue;
    const bool lg = space.params()[static_cast<std::size_t>(i)].log_scale();
    const double natural = lg ? std::exp(theta[i]) : theta[i];
    if (natural < pr.a || natural > pr.b) {
      const double mid = 0.5 * (pr.a + pr.b);
      theta[i] = lg ? std::log(mid) : mid;
    }
  }
  double current = log_target(theta);
  if (!std::isfinite(current)) {
    throw NumericalFailure("slice sampling: initial point has zero posterior density");
  }

  std::vector<Hyperparameters> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int sweep = 0; sweep < burn_in + count; ++sweep) {
    for (Eigen::Index i = 0; i < space.size(); ++i) {
      const double level = current + std::log(uniform01(rng));
      const double x0 = theta[i];
      double left = x0 - opt.width * uniform01(rng);
      double right = left + opt.width;
      Vector probe = theta;
      auto at = [&](double v) {
        probe[i] = v;
        return log_target(probe);
      };
      int steps = opt.max_step_out;
      while (steps-- > 0 && at(left) > level) left -= opt.width;
      steps = opt.max_step_out;
      while (steps-- > 0 && at(right) > level) right += opt.width;
      bool accepted = false;
      for (int s = 0; s < opt.max_shrink; ++s) {
        const double cand = left + (right - left) * uniform01(rng);
        const double v = at(cand);
        if (v > level) {
          theta[i] = cand;
          current = v;
          accepted = true;
          break;
        }
        if (cand < x0) left = cand; else right = cand;
      }
      if (!accepted) theta[i] = x0;
    }
    if (sweep >= burn_in) out.push_back(space.decode(theta));
  }
  return out;
}

/// Equal-weight mixture of per-sample predictives.
struct MixturePredictive {
  std::vector<Predictive> components;

  double mean() const {
    double m = 0.0;
    for (const auto& c : components) m += c.mean;
    return m / static_cast<double>(components.size());
  }

  /// Law of total variance over the components.
  double variance() const {
    const double m = mean();
    double v = 0.0;
    for (const auto& c : components) v += c.variance + (c.mean - m) * (c.mean - m);
    return v / static_cast<double>(components.size());
  }
};

inline MixturePredictive predict_marginalized(const ObservationSet& data,
                                              const std::vector<Hyperparameters>& samples,
                                              const Vector& x) {
  if (samples.empty()) throw InvalidArgument("predict_marginalized: need at least one sample");
  MixturePredictive out;
  for (const auto& h : samples) out.components.push_back(predict(fit_posterior(data, h), x));
  return out;
}

}  // namespace bayeskit

#endif  // BAYESKIT_GP_HYPERFIT_HPP
