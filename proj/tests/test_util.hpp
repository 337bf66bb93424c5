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

// Random problem instances and small statistics helpers shared by the unit
// and acceptance tests.

#ifndef BAYESKIT_TESTS_TEST_UTIL_HPP
#define BAYESKIT_TESTS_TEST_UTIL_HPP

#include <cmath>
#include <vector>

#include "bayeskit/core.hpp"
#include "bayeskit/gp/posterior.hpp"

namespace testutil {

using bayeskit::Hyperparameters;
using bayeskit::KernelFamily;
using bayeskit::ObservationSet;
using bayeskit::Rng;
using bayeskit::Vector;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * bayeskit::uniform01(rng); }

/// Kernel with amplitude in [0.5, 2] and inverse squared lengthscales in
/// [5, 50] on the unit box (moderately correlated designs).
inline Hyperparameters random_hypers(Rng& rng, Eigen::Index d, KernelFamily family, double noise) {
  Hyperparameters h;
  h.kernel.family = family;
  h.kernel.amplitude = uniform(rng, 0.5, 2.0);
  h.kernel.inv_sq_lengthscales = Vector(d);
  for (Eigen::Index i = 0; i < d; ++i) h.kernel.inv_sq_lengthscales[i] = uniform(rng, 5.0, 50.0);
  h.mean.constant = uniform(rng, -1.0, 1.0);
  h.noise_variance = noise;
  return h;
}

inline double smooth_function(const Vector& x) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) v += std::sin(3.0 * x[i] + static_cast<double>(i)) + 0.5 * x[i];
  return v;
}

/// n points uniform in the unit box with y = smooth_function(x) plus
/// optional Gaussian noise.
inline ObservationSet random_data(Rng& rng, Eigen::Index d, int n, double noise_sd = 0.0) {
  ObservationSet data(d);
  const auto box = bayeskit::Bounds::unit(d);
  for (int i = 0; i < n; ++i) {
    Vector x = bayeskit::uniform_point(box, rng);
    data.add(x, smooth_function(x) + noise_sd * bayeskit::standard_normal(rng));
  }
  return data;
}

inline double rel_err(double got, double want) {
  return std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
}

/// Standard error of the mean of a possibly autocorrelated chain, by
/// non-overlapping batch means.
inline double batch_means_se(const std::vector<double>& chain, int batches = 50) {
  const std::size_t len = chain.size() / static_cast<std::size_t>(batches);
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += chain[static_cast<std::size_t>(b) * len + i];
    means.push_back(s / static_cast<double>(len));
  }
  return bayeskit::summarize(means).std_error;
}

}  // namespace testutil

#endif  // BAYESKIT_TESTS_TEST_UTIL_HPP
