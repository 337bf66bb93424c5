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

#ifndef BAYESKIT_ACQOPT_HPP
#define BAYESKIT_ACQOPT_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "bayeskit/core.hpp"

namespace bayeskit {

/// Settings shared by the deterministic multistart ascent and the
/// multistart stochastic gradient ascent. Defaults R=10, T=100, a=4,
/// J=1000 are the suggested stochastic-ascent inputs.
struct AscentConfig {
  int restarts = 10;                   // R
  int iterations = 100;                // T
  double step_constant = 4.0;          // a, in alpha_t = a / (a + t)
  int eval_replications = 1000;        // J for the final ranking
  int gradient_replications = 8;       // replications averaged per stochastic gradient
  int max_line_search_steps = 40;
  double convergence_tol = 1e-10;

  void validate() const {
    if (restarts < 1 || iterations < 1) throw InvalidArgument("ascent: R and T must be >= 1");
    if (!(step_constant > 0.0)) throw InvalidArgument("ascent: step constant a must be > 0");
    if (eval_replications < 1 || gradient_replications < 1) {
      throw InvalidArgument("ascent: replication counts must be >= 1");
    }
    if (max_line_search_steps < 1) throw InvalidArgument("ascent: need >= 1 line search step");
    if (!(convergence_tol >= 0.0)) throw InvalidArgument("ascent: tolerance must be >= 0");
  }
};

/// alpha_t = a / (a + t).
inline double sga_step_size(double a, int t) { return a / (a + static_cast<double>(t)); }

struct MaximizerResult {
  Vector argmax;
  double value = -std::numeric_limits<double>::infinity();
  std::vector<double> restarts_summary;
  std::size_t evaluations_used = 0;
};

/// Objective returning f(x); when `grad` is non-null it also receives df/dx.
using Objective = std::function<double(const Vector& x, Vector* grad)>;

inline Vector project_to_bounds(const Vector& x, const Bounds& bounds) {
  require_dim(x, bounds.dim(), "project_to_bounds");
  return x.cwiseMax(bounds.lower).cwiseMin(bounds.upper);
}

struct LocalAscentResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  std::size_t evaluations = 0;
};

/// Projected gradient ascent with Armijo backtracking. The first trial step
/// has length 0.1 of the box diagonal; after each accepted step the trial
/// length doubles, after each rejection it halves.
inline LocalAscentResult local_gradient_ascent(const Objective& objective, const Vector& x0,
                                               const Bounds& bounds, const AscentConfig& config) {
  constexpr double kArmijo = 1e-4;
  const Eigen::Index d = bounds.dim();
  require_dim(x0, d, "local_gradient_ascent");
  LocalAscentResult res;
  res.x = project_to_bounds(x0, bounds);
  Vector grad(d);
  auto eval = [&](const Vector& x, Vector* g) {
    ++res.evaluations;
    const double v = objective(x, g);
    if (!std::isfinite(v) || (g != nullptr && !g->allFinite())) {
      throw NumericalFailure("local_gradient_ascent: objective is not finite");
    }
    return v;
  };
  res.value = eval(res.x, &grad);
  const double diag = bounds.diagonal();
  double step = -1.0;

  for (int it = 0; it < config.iterations; ++it) {
    res.iterations = it + 1;
    // Projected gradient: drop components pushing through an active bound.
    Vector pg = grad;
    for (Eigen::Index i = 0; i < d; ++i) {
      if ((res.x[i] <= bounds.lower[i] && pg[i] < 0.0) || (res.x[i] >= bounds.upper[i] && pg[i] > 0.0)) {
        pg[i] = 0.0;
      }
    }
    const double pg_norm = pg.norm();
    if (pg_norm <= config.convergence_tol) break;
    if (step < 0.0) step = 0.1 * diag / pg_norm;
    step = std::min(step, diag / pg_norm);

    bool accepted = false;
    Vector trial;
    double trial_value = 0.0;
    for (int ls = 0; ls < config.max_line_search_steps; ++ls) {
      trial = project_to_bounds(res.x + step * grad, bounds);
      const Vector delta = trial - res.x;
      if (delta.norm() <= config.convergence_tol * diag) break;
      trial_value = eval(trial, nullptr);
      if (trial_value >= res.value + kArmijo * grad.dot(delta)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Vector s = trial - res.x;
    const Vector old_grad = grad;
    res.x = trial;
    res.value = eval(res.x, &grad);
    // Barzilai-Borwein step from the observed curvature along s; grow the
    // previous step when the curvature is not negative.
    const double curvature = -s.dot(grad - old_grad);
    step = curvature > 0.0 ? s.squaredNorm() / curvature : 2.0 * step;
    if (s.norm() <= config.convergence_tol * diag) break;
  }
  return res;
}

/// Local ascent from R - |anchors| uniform random starts plus every anchor;
/// returns the best final iterate.
inline MaximizerResult multistart_deterministic(const Objective& objective, const Bounds& bounds,
                                                const AscentConfig& config, Rng& rng,
                                                const std::vector<Vector>& anchors = {}) {
  config.validate();
  std::vector<Vector> starts;
  const int n_random = std::max(0, config.restarts - static_cast<int>(anchors.size()));
  for (int r = 0; r < n_random; ++r) starts.push_back(uniform_point(bounds, rng));
  for (const auto& a : anchors) starts.push_back(project_to_bounds(a, bounds));
  if (starts.empty()) starts.push_back(uniform_point(bounds, rng));

  MaximizerResult out;
  std::string last_error;
  for (const auto& s : starts) {
    try {
      auto local = local_gradient_ascent(objective, s, bounds, config);
      out.evaluations_used += local.evaluations;
      out.restarts_summary.push_back(local.value);
      if (out.argmax.size() == 0 || local.value > out.value) {
        out.value = local.value;
        out.argmax = std::move(local.x);
      }
    } catch (const NumericalFailure& e) {
      last_error = e.what();
      out.restarts_summary.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  if (out.argmax.size() == 0) {
    throw NumericalFailure("multistart_deterministic: every restart failed: " + last_error);
  }
  return out;
}

using StochasticGradient = std::function<Vector(const Vector& x, Rng& rng)>;
using StochasticValue = std::function<double(const Vector& x, Rng& rng)>;

/// Multistart stochastic gradient ascent: R uniform starts, T projected steps
/// x_t = proj(x_{t-1} + alpha_t G) with alpha_t = a / (a + t), then each
/// final iterate is ranked with the value estimator.
inline MaximizerResult multistart_sga(const StochasticGradient& gradient,
                                      const StochasticValue& value, const Bounds& bounds,
                                      const AscentConfig& config, Rng& rng) {
  config.validate();
  MaximizerResult out;
  int failures = 0;
  std::string last_error;
  for (int r = 0; r < config.restarts; ++r) {
    Vector x = uniform_point(bounds, rng);
    try {
      for (int t = 1; t <= config.iterations; ++t) {
        const Vector g = gradient(x, rng);
        ++out.evaluations_used;
        if (!g.allFinite()) throw NumericalFailure("stochastic gradient is not finite");
        x = project_to_bounds(x + sga_step_size(config.step_constant, t) * g, bounds);
      }
      const double v = value(x, rng);
      ++out.evaluations_used;
      if (!std::isfinite(v)) throw NumericalFailure("value estimate is not finite");
      out.restarts_summary.push_back(v);
      if (out.argmax.size() == 0 || v > out.value) {
        out.value = v;
        out.argmax = x;
      }
    } catch (const NumericalFailure& e) {
      ++failures;
      last_error = e.what();
      out.restarts_summary.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  if (failures >= config.restarts) {
    throw NumericalFailure("multistart_sga: every restart failed: " + last_error);
  }
  return out;
}

}  // namespace bayeskit

#endif  // BAYESKIT_ACQOPT_HPP
