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

#ifndef BAYESKIT_ACQ_ENTROPY_HPP
#define BAYESKIT_ACQ_ENTROPY_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "bayeskit/core.hpp"
#include "bayeskit/gp/posterior.hpp"

namespace bayeskit {

/// Discrete entropy (natural log) of the grid argmax under the posterior,
/// estimated from joint draws. std_error is the delta-method error of the
/// plug-in estimate.
inline MonteCarloEstimate argmax_entropy(const PosteriorState& state, const std::vector<Vector>& grid,
                                         int samples, Rng& rng) {
  if (grid.empty()) throw InvalidArgument("argmax_entropy: empty grid");
  if (samples < 1) throw InvalidArgument("argmax_entropy: need at least one sample");
  if (grid.size() == 1) return {0.0, 0.0};
  const JointSampler sampler(predict_joint(state, grid));
  std::vector<std::int64_t> counts(grid.size(), 0);
  for (int s = 0; s < samples; ++s) {
    const Vector f = sampler.draw(rng);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < f.size(); ++i) {
      if (f(i) > f(best)) best = i;  // strict: ties keep the lowest index
    }
    ++counts[static_cast<std::size_t>(best)];
  }
  double h = 0.0;
  double second = 0.0;
  for (const auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / samples;
    const double lp = std::log(p);
    h -= p * lp;
    second += p * lp * lp;
  }
  const double var = std::max(second - h * h, 0.0) / samples;
  return {h, std::sqrt(var)};
}

/// Expected reduction of argmax entropy from observing x. The expectation
/// over y is taken at the Gaussian quantiles k/(Q+1), k = 1..Q, of the
/// predictive for y. Every entropy estimate reuses one random stream, so
/// the difference carries common random numbers.
inline MonteCarloEstimate entropy_search_grid(const PosteriorState& state, const std::vector<Vector>& grid,
                                              const Vector& x, int argmax_samples, int fantasy_quantiles,
                                              Rng& rng) {
  if (grid.empty()) throw InvalidArgument("entropy_search_grid: empty grid");
  if (fantasy_quantiles < 1) throw InvalidArgument("entropy_search_grid: need at least one quantile");
  require_dim(x, state.dim(), "entropy_search_grid");
  if (grid.size() == 1) return {0.0, 0.0};
  const Rng base = substream(rng(), {});
  Rng prior_rng = base;
  const auto prior = argmax_entropy(state, grid, argmax_samples, prior_rng);

  const Predictive p = predict(state, x);
  const double sd = std::sqrt(p.variance + state.hypers().noise_variance);
  double fantasy_sum = 0.0;
  double fantasy_var = 0.0;
  for (int k = 1; k <= fantasy_quantiles; ++k) {
    const double y = p.mean + sd * normal_quantile(static_cast<double>(k) / (fantasy_quantiles + 1));
    ObservationSet extended = state.data();
    extended.add(x, y);
    const auto fantasy = fit_posterior(extended, state.hypers());
    Rng r = base;
    const auto h = argmax_entropy(fantasy, grid, argmax_samples, r);
    fantasy_sum += h.value;
    fantasy_var += h.std_error * h.std_error;
  }
  const double q = fantasy_quantiles;
  const double value = prior.value - fantasy_sum / q;
  const double se = std::sqrt(prior.std_error * prior.std_error + fantasy_var / (q * q));
  return {value, se};
}

}  // namespace bayeskit

#endif  // BAYESKIT_ACQ_ENTROPY_HPP
