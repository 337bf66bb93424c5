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

#ifndef BAYESKIT_ACQ_PARALLEL_HPP
#define BAYESKIT_ACQ_PARALLEL_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bayeskit/acq/ei.hpp"
#include "bayeskit/acqopt.hpp"
#include "bayeskit/core.hpp"
#include "bayeskit/gp/posterior.hpp"

namespace bayeskit {

/// Monte-Carlo estimate of E_n[(max_i f(x^(i)) - f_star)^+] from joint
/// posterior draws at the q points.
inline MonteCarloEstimate parallel_ei(const PosteriorState& state, const std::vector<Vector>& xs,
                                      double f_star, int replications, Rng& rng) {
  if (xs.empty()) throw InvalidArgument("parallel_ei: need q >= 1 points");
  if (replications < 2) throw InvalidArgument("parallel_ei: need J >= 2");
  const JointSampler sampler(predict_joint(state, xs));
  std::vector<double> draws(static_cast<std::size_t>(replications));
  for (auto& v : draws) v = std::max(sampler.draw(rng).maxCoeff() - f_star, 0.0);
  return summarize(draws);
}

inline MonteCarloEstimate parallel_ei(const PosteriorState& state, const std::vector<Vector>& xs,
                                      int replications, Rng& rng) {
  return parallel_ei(state, xs, improvement_incumbent(state), replications, rng);
}

enum class LieKind { Min, Mean, Max };

inline double lie_value(const std::vector<double>& y, LieKind lie) {
  if (y.empty()) throw InvalidArgument("constant liar: no observations");
  switch (lie) {
    case LieKind::Min: return *std::min_element(y.begin(), y.end());
    case LieKind::Max: return *std::max_element(y.begin(), y.end());
    case LieKind::Mean: break;
  }
  return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

/// EI averaged over several posteriors (one per hyperparameter sample).
inline AcquisitionValue averaged_ei(const std::vector<PosteriorState>& states, const Vector& x) {
  AcquisitionValue out{0.0, Vector::Zero(x.size())};
  for (const auto& s : states) {
    const auto v = expected_improvement(s, x, improvement_incumbent(s));
    out.value += v.value;
    out.gradient += v.gradient;
  }
  out.value /= static_cast<double>(states.size());
  out.gradient /= static_cast<double>(states.size());
  return out;
}

/// Greedy batch: maximize EI, append the chosen point with a fabricated
/// observation (min, mean or max of the observed values), refit with the
/// same hyperparameters, repeat q times. Works on one posterior or on an
/// equal-weight set of posteriors.
inline std::vector<Vector> constant_liar_batch(std::vector<PosteriorState> states, int q, LieKind lie,
                                               const Bounds& bounds, const AscentConfig& config, Rng& rng) {
  if (q < 1) throw InvalidArgument("constant_liar_batch: q must be >= 1");
  if (states.empty()) throw InvalidArgument("constant_liar_batch: no posterior");
  const double fake = lie_value(states.front().data().values(), lie);
  std::vector<Vector> batch;
  for (int i = 0; i < q; ++i) {
    const Objective ei = [&states](const Vector& x, Vector* g) {
      auto v = averaged_ei(states, x);
      if (g != nullptr) *g = std::move(v.gradient);
      return v.value;
    };
    const auto& data = states.front().data();
    const auto best = static_cast<std::size_t>(
        std::max_element(data.values().begin(), data.values().end()) - data.values().begin());
    auto res = multistart_deterministic(ei, bounds, config, rng, {data.point(best)});
    Vector x = std::move(res.argmax);
    const double scale = 1e-9 * bounds.diagonal();
    const bool duplicate = std::any_of(batch.begin(), batch.end(),
                                       [&](const Vector& b) { return (b - x).norm() <= scale; });
    if (duplicate) {
      // EI has collapsed everywhere; fall back to the best of a uniform sample.
      double best_v = -1.0;
      for (int t = 0; t < 256; ++t) {
        Vector c = uniform_point(bounds, rng);
        const double v = averaged_ei(states, c).value;
        if (v > best_v) {
          best_v = v;
          x = std::move(c);
        }
      }
    }
    batch.push_back(x);
    if (i + 1 == q) break;
    for (auto& s : states) {
      ObservationSet extended = s.data();
      extended.add(x, fake);
      s = fit_posterior(extended, s.hypers());
    }
  }
  return batch;
}

inline std::vector<Vector> constant_liar_batch(const PosteriorState& state, int q, LieKind lie,
                                               const Bounds& bounds, const AscentConfig& config, Rng& rng) {
  return constant_liar_batch(std::vector<PosteriorState>{state}, q, lie, bounds, config, rng);
}

}  // namespace bayeskit

#endif  // BAYESKIT_ACQ_PARALLEL_HPP
