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

#ifndef BAYESKIT_CORE_HPP
#define BAYESKIT_CORE_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace bayeskit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Engine used for every stochastic operation. Distributions come from
/// Boost.Random so that streams are identical across standard libraries.
using Rng = std::mt19937_64;

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a factorization or an iterative numerical routine cannot
/// produce a usable result.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what, double attempted_jitter = 0.0)
      : std::runtime_error(what), attempted_jitter_(attempted_jitter) {}

  double attempted_jitter() const noexcept { return attempted_jitter_; }

 private:
  double attempted_jitter_;
};

/// Axis-aligned box {x : lower_i <= x_i <= upper_i}.
struct Bounds {
  Vector lower;
  Vector upper;

  Bounds() = default;
  Bounds(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) { validate(); }

  static Bounds unit(Eigen::Index d) { return Bounds(Vector::Zero(d), Vector::Ones(d)); }

  Eigen::Index dim() const { return lower.size(); }
  Vector width() const { return upper - lower; }
  Vector center() const { return 0.5 * (lower + upper); }
  double diagonal() const { return width().norm(); }

  bool contains(const Vector& x) const {
    if (x.size() != dim()) return false;
    for (Eigen::Index i = 0; i < dim(); ++i) {
      if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
    }
    return true;
  }

  void validate() const {
    if (lower.size() < 1 || lower.size() != upper.size()) {
      throw InvalidArgument("bounds: lower/upper must have equal dimension >= 1");
    }
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i])) {
        throw InvalidArgument("bounds: need finite lower < upper in coordinate " +
                              std::to_string(i));
      }
    }
  }
};

inline void require_dim(const Vector& x, Eigen::Index d, const char* what) {
  if (x.size() != d) {
    throw InvalidArgument(std::string(what) + ": expected dimension " + std::to_string(d) +
                          ", got " + std::to_string(x.size()));
  }
}

// Standard normal helpers.

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

inline double standard_normal(Rng& rng) {
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

inline double uniform01(Rng& rng) {
  boost::random::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

inline Vector uniform_point(const Bounds& bounds, Rng& rng) {
  Vector x(bounds.dim());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = bounds.lower[i] + (bounds.upper[i] - bounds.lower[i]) * uniform01(rng);
  }
  return x;
}

/// Seeds an independent substream from a base seed and a list of tags
/// (replication index, iteration counter, purpose code, ...).
inline Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * tags.size());
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto t : tags) push(t);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

/// Sample mean and standard error of the mean.
struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

inline MonteCarloEstimate summarize(const std::vector<double>& draws) {
  MonteCarloEstimate out;
  const auto n = static_cast<double>(draws.size());
  if (draws.empty()) return out;
  const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : draws) ss += (v - mean) * (v - mean);
  out.value = mean;
  out.std_error = draws.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return out;
}

/// Shortest decimal text that reads back to the same double; "nan", "inf"
/// and "-inf" for non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace bayeskit

#endif  // BAYESKIT_CORE_HPP
