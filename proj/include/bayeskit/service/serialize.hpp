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

#ifndef BAYESKIT_SERVICE_SERIALIZE_HPP
#define BAYESKIT_SERVICE_SERIALIZE_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bayeskit/core.hpp"
#include "bayeskit/driver.hpp"

namespace bayeskit {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace io {

// Doubles are written at full precision; NaN is written as null and null
// reads back as NaN.
inline Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline double get_num(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw InvalidArgument("expected a number, got " + j.dump());
  return j.get<double>();
}

inline Json vec(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

inline Vector get_vec(const Json& j) {
  if (!j.is_array()) throw InvalidArgument("expected an array of numbers, got " + j.dump());
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = get_num(j[i]);
  return v;
}

inline Vector get_finite_vec(const Json& j, const char* what) {
  Vector v = get_vec(j);
  if (!v.allFinite()) throw InvalidArgument(std::string(what) + ": values must be finite numbers");
  return v;
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw InvalidArgument(std::string("field '") + key + "' has the wrong type");
  }
}

inline const Json& require(const Json& j, const char* key) {
  if (!j.is_object()) throw InvalidArgument("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw InvalidArgument(std::string("missing field '") + key + "'");
  return *it;
}

}  // namespace io

inline Json to_json(const Hyperparameters& h) {
  Json basis = Json::array();
  for (const auto& b : h.mean.basis) basis.push_back(b.name);
  return {{"kernel",
           {{"family", std::string(to_string(h.kernel.family))},
            {"amplitude", io::num(h.kernel.amplitude)},
            {"inv_sq_lengthscales", io::vec(h.kernel.inv_sq_lengthscales)}}},
          {"mean",
           {{"constant", io::num(h.mean.constant)},
            {"basis", basis},
            {"coefficients", io::vec(h.mean.coefficients)}}},
          {"noise_variance", io::num(h.noise_variance)}};
}

inline Hyperparameters hypers_from_json(const Json& j) {
  Hyperparameters h;
  const Json& k = io::require(j, "kernel");
  h.kernel.family = kernel_family_from_string(io::get_or<std::string>(k, "family", "power-exponential"));
  h.kernel.amplitude = io::get_num(io::require(k, "amplitude"));
  h.kernel.inv_sq_lengthscales = io::get_vec(io::require(k, "inv_sq_lengthscales"));
  if (j.contains("mean")) {
    const Json& m = j.at("mean");
    h.mean.constant = io::get_or<double>(m, "constant", 0.0);
    for (const auto& name : m.value("basis", Json::array())) h.mean.basis.push_back(basis_term(name.get<std::string>()));
    h.mean.coefficients = m.contains("coefficients") ? io::get_vec(m.at("coefficients"))
                                                     : Vector::Zero(static_cast<Eigen::Index>(h.mean.basis.size()));
  }
  h.noise_variance = io::get_or<double>(j, "noise_variance", 0.0);
  h.validate();
  return h;
}

inline std::string to_string(ScalarPrior::Kind k) {
  switch (k) {
    case ScalarPrior::Kind::Flat: return "flat";
    case ScalarPrior::Kind::Uniform: return "uniform";
    case ScalarPrior::Kind::Normal: return "normal";
    case ScalarPrior::Kind::LogNormal: return "log-normal";
  }
  return "flat";
}

inline ScalarPrior::Kind scalar_prior_kind_from_string(const std::string& s) {
  if (s == "flat") return ScalarPrior::Kind::Flat;
  if (s == "uniform") return ScalarPrior::Kind::Uniform;
  if (s == "normal") return ScalarPrior::Kind::Normal;
  if (s == "log-normal") return ScalarPrior::Kind::LogNormal;
  throw InvalidArgument("unknown prior kind: " + s);
}

inline Json to_json(const HyperMode& m) {
  Json prior = Json::array();
  for (const auto& p : m.prior.per_param) prior.push_back({{"kind", to_string(p.kind)}, {"a", io::num(p.a)}, {"b", io::num(p.b)}});
  return {{"kind", to_string(m.kind)},
          {"prior", prior},
          {"samples", m.samples},
          {"burn_in", m.burn_in},
          {"restarts", m.restarts},
          {"fit_amplitude", m.options.fit_amplitude},
          {"fit_lengthscales", m.options.fit_lengthscales},
          {"fit_noise", m.options.fit_noise},
          {"fit_mean", m.options.fit_mean}};
}

inline HyperMode hyper_mode_from_json(const Json& j) {
  HyperMode m;
  m.kind = hyper_mode_from_string(io::get_or<std::string>(j, "kind", "MLE"));
  for (const auto& p : j.value("prior", Json::array())) {
    ScalarPrior s;
    s.kind = scalar_prior_kind_from_string(io::get_or<std::string>(p, "kind", "flat"));
    s.a = io::get_or<double>(p, "a", 0.0);
    s.b = io::get_or<double>(p, "b", 1.0);
    s.validate();
    m.prior.per_param.push_back(s);
  }
  m.samples = io::get_or<int>(j, "samples", m.samples);
  m.burn_in = io::get_or<int>(j, "burn_in", m.burn_in);
  m.restarts = io::get_or<int>(j, "restarts", m.restarts);
  m.options.fit_amplitude = io::get_or<bool>(j, "fit_amplitude", m.options.fit_amplitude);
  m.options.fit_lengthscales = io::get_or<bool>(j, "fit_lengthscales", m.options.fit_lengthscales);
  m.options.fit_noise = io::get_or<bool>(j, "fit_noise", m.options.fit_noise);
  m.options.fit_mean = io::get_or<bool>(j, "fit_mean", m.options.fit_mean);
  return m;
}

inline Json to_json(const AcquisitionSpec& a) {
  return {{"kind", to_string(a.kind)},
          {"restarts", a.ascent.restarts},
          {"iterations", a.ascent.iterations},
          {"step_constant", io::num(a.ascent.step_constant)},
          {"eval_replications", a.ascent.eval_replications},
          {"gradient_replications", a.ascent.gradient_replications},
          {"max_line_search_steps", a.ascent.max_line_search_steps},
          {"convergence_tol", io::num(a.ascent.convergence_tol)},
          {"q", a.q},
          {"qei_samples", a.qei_samples},
          {"qei_method", to_string(a.qei_method)},
          {"lie", to_string(a.lie)},
          {"es_grid_size", a.es_grid_size},
          {"es_quantiles", a.es_quantiles},
          {"es_argmax_samples", a.es_argmax_samples},
          {"noisy_ei_heuristic", a.noisy_ei_heuristic}};
}

inline AcquisitionSpec acquisition_from_json(const Json& j) {
  AcquisitionSpec a;
  a.kind = acquisition_kind_from_string(io::get_or<std::string>(j, "kind", "EI"));
  a.ascent.restarts = io::get_or<int>(j, "restarts", a.ascent.restarts);
  a.ascent.iterations = io::get_or<int>(j, "iterations", a.ascent.iterations);
  a.ascent.step_constant = io::get_or<double>(j, "step_constant", a.ascent.step_constant);
  a.ascent.eval_replications = io::get_or<int>(j, "eval_replications", a.ascent.eval_replications);
  a.ascent.gradient_replications = io::get_or<int>(j, "gradient_replications", a.ascent.gradient_replications);
  a.ascent.max_line_search_steps = io::get_or<int>(j, "max_line_search_steps", a.ascent.max_line_search_steps);
  a.ascent.convergence_tol = io::get_or<double>(j, "convergence_tol", a.ascent.convergence_tol);
  a.q = io::get_or<int>(j, "q", a.q);
  a.qei_samples = io::get_or<int>(j, "qei_samples", a.qei_samples);
  a.qei_method = qei_method_from_string(io::get_or<std::string>(j, "qei_method", to_string(a.qei_method)));
  a.lie = lie_kind_from_string(io::get_or<std::string>(j, "lie", to_string(a.lie)));
  a.es_grid_size = io::get_or<int>(j, "es_grid_size", a.es_grid_size);
  a.es_quantiles = io::get_or<int>(j, "es_quantiles", a.es_quantiles);
  a.es_argmax_samples = io::get_or<int>(j, "es_argmax_samples", a.es_argmax_samples);
  a.noisy_ei_heuristic = io::get_or<bool>(j, "noisy_ei_heuristic", a.noisy_ei_heuristic);
  return a;
}

inline Json to_json(const LoopConfig& c) {
  return {{"bounds", {{"lower", io::vec(c.bounds.lower)}, {"upper", io::vec(c.bounds.upper)}}},
          {"n0", c.n0},
          {"budget", c.budget},
          {"design", to_string(c.design)},
          {"acquisition", to_json(c.acquisition)},
          {"hyper_mode", to_json(c.hyper_mode)},
          {"model", to_json(c.model)},
          {"refit_every", c.refit_every},
          {"recommend_mode", to_string(c.recommend_mode)},
          {"seed", c.seed},
          {"timing", c.timing}};
}

/// Default model for a box: power-exponential kernel, unit amplitude,
/// lengthscale a quarter of each side, zero constant mean, no noise.
inline Hyperparameters default_model(const Bounds& bounds) {
  Hyperparameters h;
  h.kernel.amplitude = 1.0;
  h.kernel.inv_sq_lengthscales = (16.0 / bounds.width().array().square()).matrix();
  return h;
}

/// Reads a loop configuration. Only `bounds` is required; `hyper_mode`
/// defaults to MLE and `model` to default_model(bounds).
inline LoopConfig loop_config_from_json(const Json& j) {
  try {
    LoopConfig c;
    const Json& b = io::require(j, "bounds");
    c.bounds = Bounds(io::get_finite_vec(io::require(b, "lower"), "bounds"),
                      io::get_finite_vec(io::require(b, "upper"), "bounds"));
    c.n0 = io::get_or<int>(j, "n0", c.n0);
    c.budget = io::get_or<int>(j, "budget", c.budget);
    c.design = design_method_from_string(io::get_or<std::string>(j, "design", to_string(c.design)));
    c.acquisition = acquisition_from_json(j.value("acquisition", Json::object()));
    c.hyper_mode = hyper_mode_from_json(j.value("hyper_mode", Json::object()));
    c.model = j.contains("model") ? hypers_from_json(j.at("model")) : default_model(c.bounds);
    c.refit_every = io::get_or<int>(j, "refit_every", c.refit_every);
    c.recommend_mode = recommend_mode_from_string(io::get_or<std::string>(j, "recommend_mode", to_string(c.recommend_mode)));
    c.seed = io::get_or<std::uint64_t>(j, "seed", c.seed);
    c.timing = io::get_or<bool>(j, "timing", c.timing);
    c.validate();
    return c;
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("invalid configuration: ") + e.what());
  }
}

inline Json to_json(const TraceRecord& r) {
  return {{"n", r.n},
          {"x", io::vec(r.x)},
          {"y", io::num(r.y)},
          {"best_observed", io::num(r.best_observed)},
          {"best_posterior_mean", io::num(r.best_posterior_mean)},
          {"acq_value", io::num(r.acq_value)},
          {"elapsed_ms", io::num(r.elapsed_ms)},
          {"hypers", to_json(r.hypers)}};
}

inline TraceRecord trace_record_from_json(const Json& j) {
  TraceRecord r;
  r.n = io::require(j, "n").get<int>();
  r.x = io::get_vec(io::require(j, "x"));
  r.y = io::get_num(io::require(j, "y"));
  r.best_observed = io::get_num(io::require(j, "best_observed"));
  r.best_posterior_mean = io::get_num(io::require(j, "best_posterior_mean"));
  r.acq_value = io::get_num(io::require(j, "acq_value"));
  r.elapsed_ms = io::get_num(io::require(j, "elapsed_ms"));
  r.hypers = hypers_from_json(io::require(j, "hypers"));
  return r;
}

inline Json to_json(const ObservationSet& d) {
  Json xs = Json::array();
  for (const auto& x : d.points()) xs.push_back(io::vec(x));
  Json ys = Json::array();
  for (double y : d.values()) ys.push_back(io::num(y));
  return {{"x", xs}, {"y", ys}};
}

inline ObservationSet observations_from_json(const Json& j, Eigen::Index dim) {
  ObservationSet d(dim);
  const Json& xs = io::require(j, "x");
  const Json& ys = io::require(j, "y");
  if (!xs.is_array() || !ys.is_array() || xs.size() != ys.size()) {
    throw InvalidArgument("observations: x and y must be arrays of equal length");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) d.add(io::get_vec(xs[i]), io::get_num(ys[i]));
  return d;
}

inline Json to_json(const Suggestion& s) {
  Json pts = Json::array();
  for (const auto& p : s.points) pts.push_back(io::vec(p));
  return {{"x", io::vec(s.points.front())},
          {"batch", pts},
          {"acq_value", io::num(s.acq_value)},
          {"acq_kind", to_string(s.kind)},
          {"from_design", s.from_design}};
}

inline Suggestion suggestion_from_json(const Json& j) {
  Suggestion s;
  for (const auto& p : io::require(j, "batch")) s.points.push_back(io::get_vec(p));
  if (s.points.empty()) throw InvalidArgument("suggestion: empty batch");
  s.acq_value = io::get_num(io::require(j, "acq_value"));
  s.kind = acquisition_kind_from_string(io::require(j, "acq_kind").get<std::string>());
  s.from_design = io::get_or<bool>(j, "from_design", false);
  return s;
}

/// Trace CSV: n,x_1..x_d,y,best_observed,best_posterior_mean,acq_value,elapsed_ms
inline void write_trace_csv(const std::vector<TraceRecord>& trace, Eigen::Index dim, std::ostream& os) {
  os << "n";
  for (Eigen::Index i = 1; i <= dim; ++i) os << ",x_" << i;
  os << ",y,best_observed,best_posterior_mean,acq_value,elapsed_ms\n";
  for (const auto& r : trace) {
    os << r.n;
    for (Eigen::Index i = 0; i < r.x.size(); ++i) os << ',' << format_double(r.x[i]);
    os << ',' << format_double(r.y) << ',' << format_double(r.best_observed) << ','
       << format_double(r.best_posterior_mean) << ',' << format_double(r.acq_value) << ','
       << format_double(r.elapsed_ms) << '\n';
  }
}

}  // namespace bayeskit

#endif  // BAYESKIT_SERVICE_SERIALIZE_HPP
