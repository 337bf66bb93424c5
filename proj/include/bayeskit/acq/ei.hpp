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

#ifndef BAYESKIT_ACQ_EI_HPP
#define BAYESKIT_ACQ_EI_HPP

#include <algorithm>
#include <cmath>

#include "bayeskit/acqopt.hpp"
#include "bayeskit/core.hpp"
#include "bayeskit/gp/posterior.hpp"

namespace bayeskit {

struct AcquisitionValue {
  double value = 0.0;
  Vector gradient;
};

/// Below this posterior standard deviation the improvement is treated as
/// deterministic: 1e-10 * sqrt(amplitude).
// Predictive spread below the diagonal jitter is not resolvable: variance at
// a noise-free data point is about the jitter itself, so treat it as zero.
inline double sigma_floor(const PosteriorState& state) {
  return std::sqrt(std::max(2.0 * state.jitter(), 1e-20 * state.amplitude()));
}

/// E[(delta + sigma Z)^+] for Z standard normal.
inline double expected_improvement(double delta, double sigma) {
  if (!(sigma > 0.0)) return std::max(delta, 0.0);
  const double z = delta / sigma;
  return std::max(delta, 0.0) + sigma * normal_pdf(z) - std::abs(delta) * normal_cdf(-std::abs(z));
}

/// Closed-form expected improvement over `f_star` and its gradient in x.
inline AcquisitionValue expected_improvement(const PosteriorState& state, const Vector& x, double f_star) {
  const auto p = predict_with_gradient(state, x);
  const double sigma = std::sqrt(p.variance);
  const double delta = p.mean - f_star;
  AcquisitionValue out;
  if (sigma <= sigma_floor(state)) {
    out.value = std::max(delta, 0.0);
    out.gradient = delta > 0.0 ? p.grad_mean : Vector::Zero(x.size());
    return out;
  }
  const double z = delta / sigma;
  out.value = expected_improvement(delta, sigma);
  const Vector grad_sigma = p.grad_variance / (2.0 * sigma);
  out.gradient = p.grad_mean * normal_cdf(z) + grad_sigma * normal_pdf(z);
  return out;
}

/// max_i mu_n(x_i) over the evaluated points.
inline double best_observed_mean(const PosteriorState& state) {
  if (state.size() == 0) throw InvalidArgument("best_observed_mean: no observations");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& x : state.data().points()) best = std::max(best, predict(state, x).mean);
  return best;
}

/// Incumbent for improvement-based criteria: the best observed value when
/// observations are exact, otherwise the best posterior mean over evaluated
/// points (a heuristic substitute).
inline double improvement_incumbent(const PosteriorState& state) {
  if (state.size() == 0) throw InvalidArgument("improvement_incumbent: no observations");
  return state.hypers().noise_variance == 0.0 ? state.data().max_value() : best_observed_mean(state);
}

struct Incumbent {
  double best_observed = 0.0;       // f*_n
  double best_posterior_mean = 0.0;  // mu*_n over the whole box
  double best_observed_mean = 0.0;   // mu**_n over evaluated points
  Vector best_posterior_mean_point;
};

inline MaximizerResult maximize_posterior_mean(const PosteriorState& state, const Bounds& bounds,
                                               const AscentConfig& config, Rng& rng) {
  const Objective mean = [&state](const Vector& x, Vector* g) {
    if (g == nullptr) return predict(state, x).mean;
    auto p = predict_with_gradient(state, x);
    *g = p.grad_mean;
    return p.mean;
  };
  return multistart_deterministic(mean, bounds, config, rng, state.data().points());
}

inline Incumbent compute_incumbent(const PosteriorState& state, const Bounds& bounds,
                                   const AscentConfig& config, Rng& rng) {
  Incumbent inc;
  inc.best_observed = state.data().max_value();
  inc.best_observed_mean = best_observed_mean(state);
  auto m = maximize_posterior_mean(state, bounds, config, rng);
  inc.best_posterior_mean = std::max(m.value, inc.best_observed_mean);
  inc.best_posterior_mean_point = std::move(m.argmax);
  return inc;
}

}  // namespace bayeskit

#endif  // BAYESKIT_ACQ_EI_HPP
