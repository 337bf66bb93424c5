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

#ifndef BAYESKIT_GP_MEAN_HPP
#define BAYESKIT_GP_MEAN_HPP

#include <charconv>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bayeskit/core.hpp"

namespace bayeskit {

/// One parametric trend term Psi(x) of the prior mean.
struct BasisFunction {
  std::string name;
  std::function<double(const Vector&)> value;
  /// Optional; central differences are used when empty.
  std::function<Vector(const Vector&)> gradient;
};

namespace detail {

struct Monomial {
  std::vector<std::pair<int, int>> factors;  // (0-based coordinate, power)

  double operator()(const Vector& x) const {
    double v = 1.0;
    for (auto [i, p] : factors) v *= std::pow(x[i], p);
    return v;
  }

  Vector grad(const Vector& x) const {
    Vector g = Vector::Zero(x.size());
    for (std::size_t k = 0; k < factors.size(); ++k) {
      auto [i, p] = factors[k];
      double term = p * std::pow(x[i], p - 1);
      for (std::size_t m = 0; m < factors.size(); ++m) {
        if (m != k) term *= std::pow(x[factors[m].first], factors[m].second);
      }
      g[i] += term;
    }
    return g;
  }
};

inline int parse_positive_int(std::string_view s, std::string_view whole) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 1) {
    throw InvalidArgument("basis term '" + std::string(whole) + "' is malformed");
  }
  return v;
}

}  // namespace detail

/// Builds a monomial basis term from its name: factors `x<i>` or
/// `x<i>^<p>` (coordinates 1-based) joined by `*`, e.g. "x1", "x2^2",
/// "x1*x3".
inline BasisFunction basis_term(std::string_view name) {
  detail::Monomial mono;
  std::string_view rest = name;
  while (!rest.empty()) {
    auto star = rest.find('*');
    std::string_view factor = rest.substr(0, star);
    rest = star == std::string_view::npos ? std::string_view{} : rest.substr(star + 1);
    if (factor.size() < 2 || factor[0] != 'x') {
      throw InvalidArgument("basis term '" + std::string(name) + "' is malformed");
    }
    factor.remove_prefix(1);
    int power = 1;
    if (auto caret = factor.find('^'); caret != std::string_view::npos) {
      power = detail::parse_positive_int(factor.substr(caret + 1), name);
      factor = factor.substr(0, caret);
    }
    mono.factors.emplace_back(detail::parse_positive_int(factor, name) - 1, power);
  }
  if (mono.factors.empty()) throw InvalidArgument("empty basis term");
  return BasisFunction{std::string(name), [mono](const Vector& x) { return mono(x); },
                       [mono](const Vector& x) { return mono.grad(x); }};
}

/// mu_0(x) = constant + sum_i coefficients[i] * basis[i](x).
struct MeanSpec {
  double constant = 0.0;
  Vector coefficients;
  std::vector<BasisFunction> basis;

  Eigen::Index size() const { return static_cast<Eigen::Index>(basis.size()); }

  void validate() const {
    if (coefficients.size() != size()) {
      throw InvalidArgument("mean: coefficient count must equal basis size");
    }
    if (!std::isfinite(constant) || !coefficients.allFinite()) {
      throw InvalidArgument("mean: parameters must be finite");
    }
  }
};

inline double mean_eval(const MeanSpec& spec, const Vector& x) {
  double v = spec.constant;
  for (Eigen::Index i = 0; i < spec.size(); ++i) {
    v += spec.coefficients[i] * spec.basis[static_cast<std::size_t>(i)].value(x);
  }
  return v;
}

inline Vector basis_gradient(const BasisFunction& f, const Vector& x) {
  if (f.gradient) return f.gradient(x);
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    const double up = f.value(xp);
    xp[i] = x[i] - h;
    const double down = f.value(xp);
    xp[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline Vector mean_grad(const MeanSpec& spec, const Vector& x) {
  Vector g = Vector::Zero(x.size());
  for (Eigen::Index i = 0; i < spec.size(); ++i) {
    g += spec.coefficients[i] * basis_gradient(spec.basis[static_cast<std::size_t>(i)], x);
  }
  return g;
}

}  // namespace bayeskit

#endif  // BAYESKIT_GP_MEAN_HPP
