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

#ifndef BAYESKIT_BENCH_HPP
#define BAYESKIT_BENCH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bayeskit/acqopt.hpp"
#include "bayeskit/core.hpp"
#include "bayeskit/driver.hpp"
#include "bayeskit/gp/posterior.hpp"

namespace bayeskit {

struct OracleOptimum {
  Vector x;
  double value = 0.0;
  int resolution = 0;  // grid nodes per coordinate
};

struct TestFunction {
  std::string name;
  Bounds bounds;
  ObjectiveFunction evaluator;
  std::optional<OracleOptimum> oracle;

  Eigen::Index dim() const { return bounds.dim(); }
  double operator()(const Vector& x) const { return evaluator(x); }
};

namespace detail {

inline double sinus_1d(const Vector& x) { return std::sin(3.0 * x[0]) + x[0]; }

// Branin on [-5,10] x [0,15], negated so that the optimum is a maximum.
inline double neg_branin(const Vector& x) {
  constexpr double pi = 3.14159265358979323846;
  const double b = 5.1 / (4.0 * pi * pi), c = 5.0 / pi, t = 1.0 / (8.0 * pi);
  const double u = x[1] - b * x[0] * x[0] + c * x[0] - 6.0;
  return -(u * u + 10.0 * (1.0 - t) * std::cos(x[0]) + 10.0);
}

inline double sphere(const Vector& x) { return -(x.array() - 0.5).square().sum(); }

}  // namespace detail

inline std::vector<std::string> test_function_names() { return {"sinus-1d", "branin-2d", "sphere-2", "sphere-6"}; }

inline TestFunction make_test_function(const std::string& name) {
  if (name == "sinus-1d") return {name, Bounds(Vector::Constant(1, 0.0), Vector::Constant(1, 4.0)), detail::sinus_1d, {}};
  if (name == "branin-2d") {
    Vector lo(2), hi(2);
    lo << -5.0, 0.0;
    hi << 10.0, 15.0;
    return {name, Bounds(lo, hi), detail::neg_branin, {}};
  }
  if (name == "sphere-2") return {name, Bounds::unit(2), detail::sphere, {}};
  if (name == "sphere-6") return {name, Bounds::unit(6), detail::sphere, {}};
  throw InvalidArgument("unknown test function: " + name);
}

inline double eval_test_function(const std::string& name, const Vector& x) {
  const auto f = make_test_function(name);
  require_dim(x, f.dim(), "eval_test_function");
  if (!f.bounds.contains(x)) throw InvalidArgument("eval_test_function: x outside bounds");
  return f(x);
}

/// Exhaustive grid scan with `resolution` nodes per coordinate (ends
/// included), then a local ascent polish from the best node using central
/// difference gradients.
inline OracleOptimum grid_oracle_optimum(const TestFunction& f, int resolution) {
  const Eigen::Index d = f.dim();
  if (resolution < 10) throw InvalidArgument("grid oracle: resolution must be >= 10");
  if (d > 3) throw InvalidArgument("grid oracle: full grids are limited to d <= 3");
  const Bounds& b = f.bounds;
  std::vector<long> idx(static_cast<std::size_t>(d), 0);
  Vector x(d), best_x;
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    for (Eigen::Index j = 0; j < d; ++j) {
      x[j] = b.lower[j] + (b.upper[j] - b.lower[j]) * static_cast<double>(idx[static_cast<std::size_t>(j)]) /
                              (resolution - 1);
    }
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
    Eigen::Index j = 0;
    while (j < d && ++idx[static_cast<std::size_t>(j)] == resolution) idx[static_cast<std::size_t>(j++)] = 0;
    if (j == d) break;
  }
  const Vector h = 1e-7 * b.width();
  const Objective obj = [&f, &b, &h](const Vector& p, Vector* g) {
    if (g != nullptr) {
      g->resize(p.size());
      for (Eigen::Index j = 0; j < p.size(); ++j) {
        Vector hi = p, lo = p;
        hi[j] = std::min(p[j] + h[j], b.upper[j]);
        lo[j] = std::max(p[j] - h[j], b.lower[j]);
        (*g)[j] = (f(hi) - f(lo)) / (hi[j] - lo[j]);
      }
    }
    return f(p);
  };
  AscentConfig polish;
  polish.iterations = 200;
  polish.convergence_tol = 1e-14;
  const auto local = local_gradient_ascent(obj, best_x, b, polish);
  if (local.value > best) return {local.x, local.value, resolution};
  return {best_x, best, resolution};
}

/// Cached oracle for a named test function.
inline OracleOptimum grid_oracle_optimum(const std::string& name, int resolution) {
  static std::mutex mu;
  static std::map<std::pair<std::string, int>, OracleOptimum> cache;
  const auto f = make_test_function(name);
  {
    std::lock_guard<std::mutex> lock(mu);
    const auto it = cache.find({name, resolution});
    if (it != cache.end()) return it->second;
  }
  auto opt = grid_oracle_optimum(f, resolution);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(std::make_pair(name, resolution), opt);
  return opt;
}

/// One draw from the GP prior on a regular grid with `resolution` nodes per
/// coordinate, interpolated (bi)linearly between nodes.
inline TestFunction sample_gp_objective(const Hyperparameters& hypers, const Bounds& bounds, int resolution,
                                        Rng& rng) {
  const Eigen::Index d = bounds.dim();
  if (d < 1 || d > 2) throw InvalidArgument("sample_gp_objective: d must be 1 or 2");
  if (hypers.dim() != d) throw InvalidArgument("sample_gp_objective: dimension mismatch");
  if (resolution < 2) throw InvalidArgument("sample_gp_objective: resolution must be >= 2");
  const auto prior = fit_posterior(ObservationSet(d), hypers);
  std::vector<Vector> nodes;
  const int ny = d == 2 ? resolution : 1;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < resolution; ++i) {
      Vector x(d);
      x[0] = bounds.lower[0] + (bounds.upper[0] - bounds.lower[0]) * i / (resolution - 1);
      if (d == 2) x[1] = bounds.lower[1] + (bounds.upper[1] - bounds.lower[1]) * j / (resolution - 1);
      nodes.push_back(std::move(x));
    }
  }
  const Vector values = sample_joint(prior, nodes, rng);
  const Bounds b = bounds;
  auto eval = [values, b, resolution, d](const Vector& x) {
    auto locate = [&](Eigen::Index k, int& i, double& t) {
      const double u = std::clamp((x[k] - b.lower[k]) / (b.upper[k] - b.lower[k]), 0.0, 1.0) * (resolution - 1);
      i = std::min(static_cast<int>(u), resolution - 2);
      t = u - i;
    };
    int i = 0, j = 0;
    double s = 0.0, t = 0.0;
    locate(0, i, s);
    if (d == 1) return (1.0 - s) * values[i] + s * values[i + 1];
    locate(1, j, t);
    auto at = [&](int a, int c) { return values[c * resolution + a]; };
    return (1.0 - s) * (1.0 - t) * at(i, j) + s * (1.0 - t) * at(i + 1, j) + (1.0 - s) * t * at(i, j + 1) +
           s * t * at(i + 1, j + 1);
  };
  return {"gp-sample", bounds, eval, {}};
}

struct PolicyRun {
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<double> best_so_far;  // index n-1 holds the best value after n evaluations
};

struct PolicyQuantiles {
  std::vector<double> q25, median, q75;
};

struct Comparison {
  std::vector<PolicyRun> runs;
  std::vector<std::string> policies;              // in input order, random search last
  std::map<std::string, PolicyQuantiles> summary;  // per policy, per n
};

inline double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw InvalidArgument("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline const char* kRandomSearch = "random-search";

/// Uniform random search with the same budget and seed convention.
inline std::vector<double> random_search(const Bounds& bounds, int budget, const ObjectiveFunction& f,
                                         std::uint64_t seed, double noise_variance = 0.0) {
  Rng rng = substream(seed, {purpose::kDesign});
  std::vector<double> best;
  double b = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < budget; ++n) {
    double y = f(uniform_point(bounds, rng));
    if (noise_variance > 0.0) {
      Rng r = substream(seed, {static_cast<std::uint64_t>(n), purpose::kNoise});
      y += std::sqrt(noise_variance) * standard_normal(r);
    }
    b = std::max(b, y);
    best.push_back(b);
  }
  return best;
}

/// Runs every policy for seeds 0..seeds-1 plus a random-search baseline
/// with the budget and bounds of the first policy. best_so_far records the
/// observed y (noisy when noise_variance > 0).
inline Comparison compare_policies(const std::vector<std::pair<std::string, LoopConfig>>& policies,
                                   const ObjectiveFunction& objective, int seeds, double noise_variance = 0.0) {
  if (policies.empty()) throw InvalidArgument("compare_policies: need at least one policy");
  if (seeds < 2) throw InvalidArgument("compare_policies: need at least two seeds");
  Comparison out;
  for (const auto& [name, base] : policies) {
    if (name == kRandomSearch) throw InvalidArgument("compare_policies: reserved policy name");
    out.policies.push_back(name);
    for (int s = 0; s < seeds; ++s) {
      LoopConfig c = base;
      c.seed = static_cast<std::uint64_t>(s);
      PolicyRun run{name, c.seed, {}};
      for (const auto& r : run_loop(c, objective, noise_variance)) run.best_so_far.push_back(r.best_observed);
      out.runs.push_back(std::move(run));
    }
  }
  out.policies.push_back(kRandomSearch);
  const auto& first = policies.front().second;
  for (int s = 0; s < seeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    out.runs.push_back({kRandomSearch, seed, random_search(first.bounds, first.budget, objective, seed, noise_variance)});
  }
  for (const auto& name : out.policies) {
    PolicyQuantiles q;
    for (std::size_t n = 0;; ++n) {
      std::vector<double> col;
      for (const auto& r : out.runs) {
        if (r.policy == name && n < r.best_so_far.size()) col.push_back(r.best_so_far[n]);
      }
      if (col.empty()) break;
      q.q25.push_back(quantile(col, 0.25));
      q.median.push_back(quantile(col, 0.5));
      q.q75.push_back(quantile(col, 0.75));
    }
    out.summary[name] = std::move(q);
  }
  return out;
}

inline void write_comparison_csv(const Comparison& c, std::ostream& os) {
  os << "policy,seed,n,best_value\n";
  for (const auto& r : c.runs) {
    for (std::size_t n = 0; n < r.best_so_far.size(); ++n) {
      os << r.policy << ',' << r.seed << ',' << (n + 1) << ',' << format_double(r.best_so_far[n]) << '\n';
    }
  }
}

inline nlohmann::json comparison_summary_json(const Comparison& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& name : c.policies) {
    const auto& q = c.summary.at(name);
    j[name] = {{"q25", q.q25}, {"median", q.median}, {"q75", q.q75}};
  }
  return j;
}

}  // namespace bayeskit

#endif  // BAYESKIT_BENCH_HPP
