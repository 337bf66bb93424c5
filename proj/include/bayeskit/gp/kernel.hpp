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

#ifndef BAYESKIT_GP_KERNEL_HPP
#define BAYESKIT_GP_KERNEL_HPP

#include <cmath>
#include <string>
#include <string_view>

#include "bayeskit/core.hpp"

namespace bayeskit {

enum class KernelFamily { PowerExponential, Matern12, Matern32, Matern52 };

inline std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::PowerExponential: return "power-exponential";
    case KernelFamily::Matern12: return "matern-1/2";
    case KernelFamily::Matern32: return "matern-3/2";
    case KernelFamily::Matern52: return "matern-5/2";
  }
  return "unknown";
}

inline KernelFamily kernel_family_from_string(std::string_view s) {
  if (s == "power-exponential" || s == "gaussian") return KernelFamily::PowerExponential;
  if (s == "matern-1/2") return KernelFamily::Matern12;
  if (s == "matern-3/2") return KernelFamily::Matern32;
  if (s == "matern-5/2") return KernelFamily::Matern52;
  throw InvalidArgument("unknown kernel family '" + std::string(s) + "'");
}

/// Stationary kernel on the scaled squared distance
/// r^2 = sum_i alpha_i (x_i - x'_i)^2, where alpha_i are inverse squared
/// lengthscales and `amplitude` is the prior variance alpha_0.
struct KernelSpec {
  KernelFamily family = KernelFamily::PowerExponential;
  double amplitude = 1.0;
  Vector inv_sq_lengthscales;

  Eigen::Index dim() const { return inv_sq_lengthscales.size(); }

  void validate() const {
    if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
      throw InvalidArgument("kernel: amplitude must be positive and finite");
    }
    if (inv_sq_lengthscales.size() < 1) throw InvalidArgument("kernel: dimension must be >= 1");
    for (Eigen::Index i = 0; i < inv_sq_lengthscales.size(); ++i) {
      if (!(inv_sq_lengthscales[i] > 0.0) || !std::isfinite(inv_sq_lengthscales[i])) {
        throw InvalidArgument("kernel: inverse squared lengthscales must be positive");
      }
    }
  }
};

namespace detail {

// Kernel as a function of s = r^2 together with dk/ds.
struct KernelProfile {
  double value;
  double d_sq;
};

inline KernelProfile kernel_profile(KernelFamily family, double amplitude, double s) {
  switch (family) {
    case KernelFamily::PowerExponential: {
      const double k = amplitude * std::exp(-s);
      return {k, -k};
    }
    case KernelFamily::Matern12: {
      const double r = std::sqrt(s);
      const double e = amplitude * std::exp(-r);
      // Not differentiable at r = 0; the symmetric subgradient is zero.
      return {e, r > 0.0 ? -e / (2.0 * r) : 0.0};
    }
    case KernelFamily::Matern32: {
      const double r = std::sqrt(s);
      const double a = std::sqrt(3.0) * r;
      const double e = amplitude * std::exp(-a);
      return {(1.0 + a) * e, -1.5 * e};
    }
    case KernelFamily::Matern52: {
      const double r = std::sqrt(s);
      const double a = std::sqrt(5.0) * r;
      const double e = amplitude * std::exp(-a);
      return {(1.0 + a + 5.0 * s / 3.0) * e, -(5.0 / 6.0) * (1.0 + a) * e};
    }
  }
  return {0.0, 0.0};
}

template <class A, class B>
double scaled_sq_distance(const Vector& alpha, const A& x, const B& x2) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    const double diff = x[i] - x2[i];
    s += alpha[i] * diff * diff;
  }
  return s;
}

template <class A, class B>
double kernel_value(const KernelSpec& spec, const A& x, const B& x2) {
  return kernel_profile(spec.family, spec.amplitude,
                        scaled_sq_distance(spec.inv_sq_lengthscales, x, x2))
      .value;
}

// d k(x, x2) / dx, written into `out` (length d).
template <class A, class B, class Out>
double kernel_value_grad(const KernelSpec& spec, const A& x, const B& x2, Out&& out) {
  const auto p = kernel_profile(spec.family, spec.amplitude,
                                scaled_sq_distance(spec.inv_sq_lengthscales, x, x2));
  for (Eigen::Index i = 0; i < spec.dim(); ++i) {
    out[i] = p.d_sq * 2.0 * spec.inv_sq_lengthscales[i] * (x[i] - x2[i]);
  }
  return p.value;
}

}  // namespace detail

inline double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& x2) {
  require_dim(x, spec.dim(), "kernel_eval");
  require_dim(x2, spec.dim(), "kernel_eval");
  return detail::kernel_value(spec, x, x2);
}

/// Gradient of kernel_eval(spec, x, x2) with respect to x.
inline Vector kernel_grad(const KernelSpec& spec, const Vector& x, const Vector& x2) {
  require_dim(x, spec.dim(), "kernel_grad");
  require_dim(x2, spec.dim(), "kernel_grad");
  Vector g(spec.dim());
  detail::kernel_value_grad(spec, x, x2, g);
  return g;
}

}  // namespace bayeskit

#endif  // BAYESKIT_GP_KERNEL_HPP
