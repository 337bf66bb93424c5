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

#ifndef BAYESKIT_ACQ_KGCP_HPP
#define BAYESKIT_ACQ_KGCP_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "bayeskit/acq/ei.hpp"
#include "bayeskit/core.hpp"
#include "bayeskit/gp/posterior.hpp"

namespace bayeskit {

namespace detail {

/// Upper envelope of lines a_i + b_i Z: line indices in increasing slope
/// order and the breakpoints between consecutive lines (c.front() = -inf,
/// c.back() = +inf).
struct LineEnvelope {
  std::vector<std::size_t> lines;
  std::vector<double> breaks;
};

inline LineEnvelope upper_envelope(const Vector& a, const Vector& b, double slope_tol) {
  std::vector<std::size_t> order(static_cast<std::size_t>(a.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
    if (b[ii] != b[jj]) return b[ii] < b[jj];
    if (a[ii] != a[jj]) return a[ii] < a[jj];
    return i < j;
  });
  // Within a run of slopes tied up to slope_tol keep the largest intercept.
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (!kept.empty() && std::abs(b[ii] - b[static_cast<Eigen::Index>(kept.back())]) <= slope_tol) {
      if (a[ii] >= a[static_cast<Eigen::Index>(kept.back())]) kept.back() = i;
      continue;
    }
    kept.push_back(i);
  }

  LineEnvelope env;
  env.breaks.push_back(-std::numeric_limits<double>::infinity());
  for (std::size_t i : kept) {
    const auto ii = static_cast<Eigen::Index>(i);
    double c = -std::numeric_limits<double>::infinity();
    while (!env.lines.empty()) {
      const auto jj = static_cast<Eigen::Index>(env.lines.back());
      c = (a[jj] - a[ii]) / (b[ii] - b[jj]);
      if (env.lines.size() > 1 && c <= env.breaks.back()) {
        env.lines.pop_back();
        env.breaks.pop_back();
        continue;
      }
      break;
    }
    if (env.lines.empty()) c = -std::numeric_limits<double>::infinity();
    env.lines.push_back(i);
    if (env.lines.size() > 1) env.breaks.push_back(c);
  }
  env.breaks.push_back(std::numeric_limits<double>::infinity());
  return env;
}

inline double cdf_ext(double c) { return std::isinf(c) ? (c > 0 ? 1.0 : 0.0) : normal_cdf(c); }
inline double pdf_ext(double c) { return std::isinf(c) ? 0.0 : normal_pdf(c); }

}  // namespace detail

/// E[max_i (a_i + b_i Z)] - max_i a_i for Z standard normal, computed from
/// the envelope breakpoints in the cancellation-free form
/// sum_k (b_{k+1} - b_k) f(-|c_k|), f(z) = z Phi(z) + phi(z).
inline double expected_max_excess(const Vector& a, const Vector& b, double slope_tol = 1e-12) {
  const auto env = detail::upper_envelope(a, b, slope_tol);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < env.lines.size(); ++k) {
    const double c = env.breaks[k + 1];
    const double db = b[static_cast<Eigen::Index>(env.lines[k + 1])] - b[static_cast<Eigen::Index>(env.lines[k])];
    const double z = -std::abs(c);
    total += db * (z * normal_cdf(z) + normal_pdf(z));
  }
  return total;
}

/// Knowledge gradient restricted to evaluated points:
/// E_n[mu**_{n+1} - mu**_n | x_{n+1} = x], with mu** the best posterior mean
/// over evaluated points. Exact: the n+1 fantasy means are affine in the
/// standardized observation. The gradient differentiates intercepts and
/// slopes with the envelope breakpoints held fixed.
inline AcquisitionValue kgcp(const PosteriorState& state, const Vector& x) {
  const auto n = static_cast<Eigen::Index>(state.size());
  if (n == 0) throw InvalidArgument("kgcp: needs at least one observation");
  require_dim(x, state.dim(), "kgcp");
  const Eigen::Index d = x.size();
  const auto& h = state.hypers();
  const auto& pts = state.data().points();

  // Posterior means at the evaluated points and mu**_n.
  const Matrix kxx = kernel_matrix(h.kernel, pts, pts);
  Vector a(n + 1), b(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) a[i] = mean_eval(h.mean, pts[static_cast<std::size_t>(i)]);
  a.head(n) += kxx * state.weights();
  const double incumbent = a.head(n).maxCoeff();

  const auto p = predict_with_gradient(state, x);
  const double s = std::sqrt(p.variance + h.noise_variance);
  AcquisitionValue out;
  if (s <= sigma_floor(state)) {
    out.value = std::max(p.mean - incumbent, 0.0);
    out.gradient = p.mean > incumbent ? p.grad_mean : Vector::Zero(d);
    return out;
  }

  // Sigma_n(x_i, x) for all i, and its gradient in x.
  const Vector kx = state.cross_kernel(x);
  const Matrix jac = state.cross_kernel_jacobian(x);  // row i: d k(x_i, x)/dx
  const Vector kinv_kx = state.solve(kx);
  const Vector cov = kx - kxx * kinv_kx;
  Matrix kinv_kxx = kxx;
  state.chol().triangularView<Eigen::Lower>().solveInPlace(kinv_kxx);
  state.chol().transpose().triangularView<Eigen::Upper>().solveInPlace(kinv_kxx);
  // d Sigma_n(x_i, x)/dx = d k(x_i, x)/dx - J^T K^{-1} k(X, x_i).
  const Matrix dcov = jac - kinv_kxx.transpose() * jac;
  const Vector ds = p.grad_variance / (2.0 * s);

  Matrix grad_b(n + 1, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    b[i] = cov[i] / s;
    grad_b.row(i) = (dcov.row(i).transpose() / s - cov[i] * ds / (s * s)).transpose();
  }
  a[n] = p.mean;
  b[n] = p.variance / s;
  grad_b.row(n) = (p.grad_variance / s - p.variance * ds / (s * s)).transpose();

  const double tol = 1e-12 * std::sqrt(h.kernel.amplitude);
  out.value = std::max(a.maxCoeff() - incumbent, 0.0) + expected_max_excess(a, b, tol);

  const auto env = detail::upper_envelope(a, b, tol);
  out.gradient = Vector::Zero(d);
  for (std::size_t k = 0; k < env.lines.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(env.lines[k]);
    const double lo = env.breaks[k], hi = env.breaks[k + 1];
    const double mass = detail::cdf_ext(hi) - detail::cdf_ext(lo);
    const double dens = detail::pdf_ext(lo) - detail::pdf_ext(hi);
    if (i == n) out.gradient += p.grad_mean * mass;
    out.gradient += grad_b.row(i).transpose() * dens;
  }
  return out;
}

}  // namespace bayeskit

#endif  // BAYESKIT_ACQ_KGCP_HPP
