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

#ifndef BAYESKIT_ACQ_KG_HPP
#define BAYESKIT_ACQ_KG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "bayeskit/acq/ei.hpp"
#include "bayeskit/acqopt.hpp"
#include "bayeskit/core.hpp"
#include "bayeskit/gp/posterior.hpp"

namespace bayeskit {

/// Posterior mean after appending one hypothetical observation (x_new, y_new)
/// to `base`. The Cholesky factor is extended by one row,
///   L' = [L 0; v^T d],  v = L^{-1} k(X, x_new),  d^2 = sigma_n^2(x_new) + noise,
/// and the extended weights are obtained from it in O(n^2).
/// `base` must outlive the update.
class FantasyUpdate {
 public:
  FantasyUpdate(const PosteriorState& base, Vector x_new, double y_new)
      : base_(&base), x_(std::move(x_new)), y_(y_new) {
    require_dim(x_, base.dim(), "FantasyUpdate");
    const auto& h = base.hypers();
    const Vector k = base.cross_kernel(x_);
    const Vector v = base.half_solve(k);
    const double d2 = h.kernel.amplitude + h.noise_variance - v.squaredNorm();
    const double mean_x = mean_eval(h.mean, x_) + k.dot(base.weights());
    old_weights_ = base.weights();
    const double floor = sigma_floor(base);
    if (d2 > floor * floor) {
      d_ = std::sqrt(d2);
      // Forward substitution gives z_new = (y - mu_n(x)) / d; back substitution
      // gives c = z_new / d and shifts the old weights by L^{-T} v c.
      coef_ = (y_ - mean_x) / d2;
      if (base.size() > 0) {
        old_weights_ -= base.chol().transpose().triangularView<Eigen::Upper>().solve(v) * coef_;
      }
    }
  }

  const Vector& x_new() const { return x_; }
  double y_new() const { return y_; }
  /// True when the new observation carries no information (zero predictive variance).
  bool degenerate() const { return d_ == 0.0; }

  /// mu_{n+1}(x').
  double mean(const Vector& xp) const {
    const auto& h = base_->hypers();
    const auto& pts = base_->data().points();
    double m = mean_eval(h.mean, xp);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      m += detail::kernel_value(h.kernel, pts[i], xp) * old_weights_[static_cast<Eigen::Index>(i)];
    }
    if (coef_ != 0.0) m += detail::kernel_value(h.kernel, xp, x_) * coef_;
    return m;
  }

  /// Gradient of mu_{n+1}(x') in x'.
  Vector mean_grad(const Vector& xp) const {
    const auto& h = base_->hypers();
    const auto& pts = base_->data().points();
    Vector g = h.mean.size() == 0 ? Vector::Zero(xp.size()) : mean_grad_prior(xp);
    Vector gk(xp.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      detail::kernel_value_grad(h.kernel, xp, pts[i], gk);
      g += gk * old_weights_[static_cast<Eigen::Index>(i)];
    }
    if (coef_ != 0.0) {
      detail::kernel_value_grad(h.kernel, xp, x_, gk);
      g += gk * coef_;
    }
    return g;
  }

 private:
  Vector mean_grad_prior(const Vector& xp) const { return bayeskit::mean_grad(base_->hypers().mean, xp); }

  const PosteriorState* base_;
  Vector x_;
  double y_;
  Vector old_weights_;
  double coef_ = 0.0;
  double d_ = 0.0;
};

/// Where mu* is searched: the whole box (local ascents from a deterministic
/// start set) or a finite candidate set.
struct InnerDomain {
  Bounds bounds;
  std::vector<Vector> candidates;

  static InnerDomain continuous(Bounds b) { return {std::move(b), {}}; }
  static InnerDomain discrete(Bounds b, std::vector<Vector> c) {
    if (c.empty()) throw InvalidArgument("discrete inner domain needs candidates");
    return {std::move(b), std::move(c)};
  }
  bool is_discrete() const { return !candidates.empty(); }
};

struct GradientEstimate {
  Vector gradient;
  Vector std_error;
};

/// Knowledge gradient KG_n(x) = E_n[mu*_{n+1} - mu*_n | x_{n+1} = x] by
/// simulation, and unbiased stochastic gradients of it obtained by holding
/// the fantasy maximizer fixed (envelope theorem).
///
/// mu*_n is computed once at construction. Inner maximizations of the
/// fantasy mean use only deterministic starts (the mu_n maximizer, the
/// sampled point and the best data points), so a replication consumes
/// exactly one normal variate and estimates at nearby x share random
/// numbers under a common seed.
namespace detail {

// Radical inverse of i in the given prime base.
inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
  for (; i > 0; i /= base, f *= inv) r += f * static_cast<double>(i % base);
  return r;
}

// First m points of the Halton sequence mapped into the box (skipping 0).
inline std::vector<Vector> halton_points(const Bounds& bounds, int m) {
  static constexpr std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  const Eigen::Index d = bounds.dim();
  std::vector<Vector> out;
  for (int i = 1; i <= m; ++i) {
    Vector x(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto base = kPrimes[static_cast<std::size_t>(j) % std::size(kPrimes)] +
                        (static_cast<std::uint64_t>(j) / std::size(kPrimes)) * 58;
      x[j] = bounds.lower[j] + bounds.width()[j] * radical_inverse(static_cast<std::uint64_t>(i), base);
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace detail

class KnowledgeGradient {
 public:
  KnowledgeGradient(const PosteriorState& state, InnerDomain domain, Rng& rng,
                    AscentConfig inner = default_inner_config())
      : state_(&state), domain_(std::move(domain)), inner_(inner) {
    if (state.size() == 0) throw InvalidArgument("knowledge gradient needs at least one observation");
    if (domain_.is_discrete()) {
      for (const auto& c : domain_.candidates) {
        const double m = predict(state, c).mean;
        if (best_point_.size() == 0 || m > best_mean_) {
          best_mean_ = m;
          best_point_ = c;
        }
      }
    } else {
      auto res = maximize_posterior_mean(state, domain_.bounds, inner_, rng);
      best_mean_ = res.value;
      best_point_ = std::move(res.argmax);
      scan_ = detail::halton_points(domain_.bounds, 8 + 4 * static_cast<int>(state.dim()));
    }
  }

  static AscentConfig default_inner_config() {
    AscentConfig c;
    c.restarts = 10;
    c.iterations = 100;
    c.convergence_tol = 1e-10;
    return c;
  }

  double best_mean() const { return best_mean_; }
  const Vector& best_mean_point() const { return best_point_; }
  const PosteriorState& state() const { return *state_; }

  /// Predictive standard deviation of a new observation at x.
  double observation_sd(const Vector& x) const {
    return std::sqrt(predict(*state_, x).variance + state_->hypers().noise_variance);
  }

  /// One replication: mu*_{n+1} - mu*_n for the fantasy y = mu_n(x) + s(x) z.
  /// When `grad` is given, also writes the pathwise gradient in x.
  double replication(const Vector& x, double z, Vector* grad) const {
    const auto p = predict_with_gradient(*state_, x);
    const double noise = state_->hypers().noise_variance;
    const double s = std::sqrt(p.variance + noise);
    const FantasyUpdate fantasy(*state_, x, p.mean + s * z);
    if (fantasy.degenerate()) {
      // mu_{n+1} = mu_n, so the maximum is unchanged.
      if (grad != nullptr) *grad = Vector::Zero(x.size());
      return 0.0;
    }
    Vector best_x;
    const double best = maximize_fantasy(fantasy, &best_x);
    if (grad != nullptr) {
      // mu_{n+1}(x*) = mu_n(x*) + Sigma_n(x*, x) z / s(x), with x* held fixed.
      const double cov = posterior_covariance(*state_, best_x, x);
      const Vector dcov = posterior_covariance_grad(*state_, best_x, x);
      const Vector ds = p.grad_variance / (2.0 * s);
      *grad = z * (dcov / s - cov * ds / (s * s));
    }
    return best - best_mean_;
  }

  /// Algorithm-2 style estimate with J replications.
  MonteCarloEstimate estimate(const Vector& x, int replications, Rng& rng) const {
    if (replications < 2) throw InvalidArgument("kg estimate: need J >= 2");
    require_dim(x, state_->dim(), "kg estimate");
    std::vector<double> draws;
    draws.reserve(static_cast<std::size_t>(replications));
    int dropped = 0;
    for (int j = 0; j < replications; ++j) {
      const double z = standard_normal(rng);
      try {
        draws.push_back(replication(x, z, nullptr));
      } catch (const NumericalFailure&) {
        ++dropped;
      }
    }
    check_drops(dropped, replications);
    return summarize(draws);
  }

  /// Average of J pathwise gradients, with per-coordinate standard errors.
  GradientEstimate gradient(const Vector& x, int replications, Rng& rng) const {
    if (replications < 1) throw InvalidArgument("kg gradient: need J >= 1");
    require_dim(x, state_->dim(), "kg gradient");
    const Eigen::Index d = x.size();
    Vector sum = Vector::Zero(d), sum_sq = Vector::Zero(d);
    int kept = 0, dropped = 0;
    Vector g(d);
    for (int j = 0; j < replications; ++j) {
      const double z = standard_normal(rng);
      try {
        replication(x, z, &g);
      } catch (const NumericalFailure&) {
        ++dropped;
        continue;
      }
      sum += g;
      sum_sq += g.cwiseProduct(g);
      ++kept;
    }
    check_drops(dropped, replications);
    GradientEstimate out;
    out.gradient = sum / kept;
    out.std_error = Vector::Zero(d);
    if (kept > 1) {
      const Vector var = (sum_sq - sum.cwiseProduct(sum) / kept) / (kept - 1);
      out.std_error = (var.cwiseMax(0.0) / kept).cwiseSqrt();
    }
    return out;
  }

  /// max_{x'} mu_{n+1}(x') over the inner domain.
  double maximize_fantasy(const FantasyUpdate& fantasy, Vector* argmax = nullptr) const {
    if (domain_.is_discrete()) {
      double best = -std::numeric_limits<double>::infinity();
      const Vector* where = nullptr;
      for (const auto& c : domain_.candidates) {
        const double m = fantasy.mean(c);
        if (m > best) {
          best = m;
          where = &c;
        }
      }
      if (argmax != nullptr) *argmax = *where;
      return best;
    }

    // Start set: mu_n maximizer, the sampled point, and the two best points of
    // the fixed low-discrepancy scan and of the data under the fantasy mean.
    std::vector<Vector> starts{best_point_, project_to_bounds(fantasy.x_new(), domain_.bounds)};
    add_top_two(fantasy, scan_, starts);
    add_top_two(fantasy, state_->data().points(), starts);

    const Objective objective = [&fantasy](const Vector& xp, Vector* g) {
      if (g != nullptr) *g = fantasy.mean_grad(xp);
      return fantasy.mean(xp);
    };
    double best = -std::numeric_limits<double>::infinity();
    Vector best_x;
    for (std::size_t i = 0; i < starts.size(); ++i) {
      bool seen = false;
      for (std::size_t j = 0; j < i && !seen; ++j) seen = (starts[i] - starts[j]).norm() == 0.0;
      if (seen) continue;
      auto res = local_gradient_ascent(objective, starts[i], domain_.bounds, inner_);
      if (res.value > best) {
        best = res.value;
        best_x = std::move(res.x);
      }
    }
    if (argmax != nullptr) *argmax = std::move(best_x);
    return best;
  }

 private:
  void add_top_two(const FantasyUpdate& fantasy, const std::vector<Vector>& pts, std::vector<Vector>& starts) const {
    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) ranked.emplace_back(fantasy.mean(pts[i]), i);
    const std::size_t top = std::min<std::size_t>(2, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top), ranked.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    for (std::size_t i = 0; i < top; ++i) starts.push_back(project_to_bounds(pts[ranked[i].second], domain_.bounds));
  }

  static void check_drops(int dropped, int total) {
    if (dropped * 10 > total) {
      throw NumericalFailure("knowledge gradient: " + std::to_string(dropped) + " of " +
                             std::to_string(total) + " replications failed");
    }
  }

  const PosteriorState* state_;
  InnerDomain domain_;
  AscentConfig inner_;
  double best_mean_ = -std::numeric_limits<double>::infinity();
  Vector best_point_;
  std::vector<Vector> scan_;
};

inline MonteCarloEstimate kg_estimate(const PosteriorState& state, const Vector& x, int replications,
                                      const InnerDomain& domain, Rng& rng) {
  const KnowledgeGradient kg(state, domain, rng);
  return kg.estimate(x, replications, rng);
}

inline GradientEstimate kg_gradient_estimate(const PosteriorState& state, const Vector& x,
                                             int replications, const InnerDomain& domain, Rng& rng) {
  const KnowledgeGradient kg(state, domain, rng);
  return kg.gradient(x, replications, rng);
}

}  // namespace bayeskit

#endif  // BAYESKIT_ACQ_KG_HPP
