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

#ifndef BAYESKIT_DRIVER_HPP
#define BAYESKIT_DRIVER_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "bayeskit/acq/ei.hpp"
#include "bayeskit/acq/entropy.hpp"
#include "bayeskit/acq/kg.hpp"
#include "bayeskit/acq/kgcp.hpp"
#include "bayeskit/acq/parallel.hpp"
#include "bayeskit/acq/spec.hpp"
#include "bayeskit/acqopt.hpp"
#include "bayeskit/core.hpp"
#include "bayeskit/gp/hyperfit.hpp"
#include "bayeskit/gp/posterior.hpp"

namespace bayeskit {

enum class DesignMethod { Uniform, LatinHypercube };
enum class RecommendMode { BestObserved, MaxPosteriorMean };

inline std::string to_string(DesignMethod m) {
  return m == DesignMethod::Uniform ? "uniform" : "latin-hypercube";
}

inline DesignMethod design_method_from_string(const std::string& s) {
  if (s == "uniform") return DesignMethod::Uniform;
  if (s == "latin-hypercube") return DesignMethod::LatinHypercube;
  throw InvalidArgument("unknown design method: " + s);
}

inline std::string to_string(RecommendMode m) {
  return m == RecommendMode::BestObserved ? "best-observed" : "max-posterior-mean";
}

inline RecommendMode recommend_mode_from_string(const std::string& s) {
  if (s == "best-observed") return RecommendMode::BestObserved;
  if (s == "max-posterior-mean") return RecommendMode::MaxPosteriorMean;
  throw InvalidArgument("unknown recommend mode: " + s);
}

struct HyperMode {
  enum class Kind { Fixed, MLE, MAP, FullyBayesian };
  Kind kind = Kind::Fixed;
  HyperPrior prior;           // MAP and FullyBayesian
  int samples = 10;           // FullyBayesian draws
  int burn_in = 50;           // FullyBayesian
  int restarts = 5;           // MLE and MAP
  HyperSpace::Options options;
};

inline std::string to_string(HyperMode::Kind k) {
  switch (k) {
    case HyperMode::Kind::Fixed: return "fixed";
    case HyperMode::Kind::MLE: return "MLE";
    case HyperMode::Kind::MAP: return "MAP";
    case HyperMode::Kind::FullyBayesian: return "fully-Bayesian";
  }
  return "fixed";
}

inline HyperMode::Kind hyper_mode_from_string(const std::string& s) {
  if (s == "fixed") return HyperMode::Kind::Fixed;
  if (s == "MLE") return HyperMode::Kind::MLE;
  if (s == "MAP") return HyperMode::Kind::MAP;
  if (s == "fully-Bayesian") return HyperMode::Kind::FullyBayesian;
  throw InvalidArgument("unknown hyperparameter mode: " + s);
}

struct LoopConfig {
  Bounds bounds;
  int n0 = 5;
  int budget = 30;  // N
  DesignMethod design = DesignMethod::Uniform;
  AcquisitionSpec acquisition;
  HyperMode hyper_mode;
  Hyperparameters model;  // fixed values, or the template and starting point for fitting
  int refit_every = 1;
  RecommendMode recommend_mode = RecommendMode::BestObserved;
  std::uint64_t seed = 0;
  bool timing = false;  // record wall-clock elapsed_ms; otherwise 0

  void validate() const {
    bounds.validate();
    if (bounds.dim() < 1) throw InvalidArgument("loop config: bounds are empty");
    if (!(n0 >= 1 && n0 <= budget)) throw InvalidArgument("loop config: need 1 <= n0 <= N");
    if (refit_every < 1) throw InvalidArgument("loop config: refit_every must be >= 1");
    acquisition.validate();
    model.validate();
    if (model.dim() != bounds.dim()) throw InvalidArgument("loop config: model and bounds dimensions differ");
    const auto k = hyper_mode.kind;
    if (k == HyperMode::Kind::MLE || k == HyperMode::Kind::MAP) {
      if (hyper_mode.restarts < 1) throw InvalidArgument("loop config: fit restarts must be >= 1");
    }
    if (k == HyperMode::Kind::FullyBayesian && (hyper_mode.samples < 1 || hyper_mode.burn_in < 0)) {
      throw InvalidArgument("loop config: need samples >= 1 and burn_in >= 0");
    }
  }
};

struct TraceRecord {
  int n = 0;  // 1-based evaluation count
  Vector x;
  double y = 0.0;
  double best_observed = 0.0;
  double best_posterior_mean = 0.0;  // max of mu_n over evaluated points, after this observation
  double acq_value = std::numeric_limits<double>::quiet_NaN();
  double elapsed_ms = 0.0;
  Hyperparameters hypers;
};

/// Hyperparameter samples fitted to a prefix of the data. Not part of the
/// persisted state: it is recomputed on demand from (config, data).
struct ModelCache {
  std::size_t prefix = 0;
  bool valid = false;
  std::vector<Hyperparameters> samples;
};

struct CampaignState {
  ObservationSet data;
  std::vector<TraceRecord> trace;
  ModelCache cache;

  CampaignState() = default;
  explicit CampaignState(Eigen::Index dim) : data(dim) {}
};

struct Suggestion {
  std::vector<Vector> points;  // q points; one outside qEI
  double acq_value = std::numeric_limits<double>::quiet_NaN();
  AcquisitionKind kind = AcquisitionKind::EI;
  bool from_design = false;
};

namespace purpose {
inline constexpr std::uint64_t kDesign = 1;
inline constexpr std::uint64_t kRefit = 2;
inline constexpr std::uint64_t kAcquisition = 3;
inline constexpr std::uint64_t kRanking = 4;
inline constexpr std::uint64_t kRecommend = 5;
inline constexpr std::uint64_t kNoise = 6;
inline constexpr std::uint64_t kIncumbent = 7;
}  // namespace purpose

inline std::vector<Vector> initial_design(int n0, const Bounds& bounds, DesignMethod method, Rng& rng) {
  if (n0 < 1) throw InvalidArgument("initial_design: n0 must be >= 1");
  const Eigen::Index d = bounds.dim();
  std::vector<Vector> pts(static_cast<std::size_t>(n0), Vector(d));
  if (method == DesignMethod::Uniform) {
    for (auto& p : pts) p = uniform_point(bounds, rng);
    return pts;
  }
  std::vector<int> perm(static_cast<std::size_t>(n0));
  for (Eigen::Index j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    // Fisher-Yates with the portable uniform draw.
    for (int i = n0 - 1; i > 0; --i) {
      const int k = std::min(i, static_cast<int>(uniform01(rng) * (i + 1)));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(k)]);
    }
    const double w = bounds.upper[j] - bounds.lower[j];
    for (int i = 0; i < n0; ++i) {
      const double u = (perm[static_cast<std::size_t>(i)] + uniform01(rng)) / n0;
      pts[static_cast<std::size_t>(i)][j] = std::min(bounds.lower[j] + w * u, bounds.upper[j]);
    }
  }
  return pts;
}

inline std::vector<Vector> design_points(const LoopConfig& config) {
  Rng rng = substream(config.seed, {purpose::kDesign});
  return initial_design(config.n0, config.bounds, config.design, rng);
}

/// Size of the data prefix the current hyperparameters are fitted to:
/// refits happen at n = 2, 2 + k, 2 + 2k, ... for k = refit_every.
inline std::size_t refit_prefix(std::size_t n, int refit_every) {
  if (n < 2) return n;
  return n - (n - 2) % static_cast<std::size_t>(refit_every);
}

inline ObservationSet data_prefix(const ObservationSet& data, std::size_t m) {
  ObservationSet out(data.dim());
  for (std::size_t i = 0; i < m; ++i) out.add(data.point(i), data.value(i));
  return out;
}

/// Hyperparameter samples for the current data (one sample outside the
/// fully-Bayesian mode).
inline const std::vector<Hyperparameters>& model_samples(const LoopConfig& config, CampaignState& state) {
  const auto& mode = config.hyper_mode;
  const std::size_t n = state.data.size();
  const std::size_t m = mode.kind == HyperMode::Kind::Fixed ? 0 : refit_prefix(n, config.refit_every);
  if (state.cache.valid && state.cache.prefix == m) return state.cache.samples;

  std::vector<Hyperparameters> samples;
  const ObservationSet prefix = data_prefix(state.data, m);
  // No prior given: flat over the bounded search box, which is proper.
  const auto prior_for = [&mode](const HyperSpace& space) {
    return mode.prior.per_param.empty() ? HyperPrior::flat(space.size()) : mode.prior;
  };
  Rng rng = substream(config.seed, {m, purpose::kRefit});
  switch (mode.kind) {
    case HyperMode::Kind::Fixed:
      samples.push_back(config.model);
      break;
    case HyperMode::Kind::MLE:
    case HyperMode::Kind::MAP: {
      if (m < 2) {
        samples.push_back(config.model);
        break;
      }
      const auto space = HyperSpace::standard(config.model, prefix, config.bounds, mode.options);
      const FitMode fit = mode.kind == HyperMode::Kind::MLE ? FitMode::mle() : FitMode::map(prior_for(space));
      samples.push_back(fit_hyperparameters(prefix, space, fit, mode.restarts, rng).hypers);
      break;
    }
    case HyperMode::Kind::FullyBayesian: {
      const auto space = HyperSpace::standard(config.model, prefix, config.bounds, mode.options);
      samples = slice_sample_hyperparameters(prefix, space, prior_for(space), mode.samples, mode.burn_in, rng);
      break;
    }
  }
  state.cache = {m, true, std::move(samples)};
  return state.cache.samples;
}

inline std::vector<PosteriorState> fit_posteriors(const LoopConfig& config, CampaignState& state) {
  std::vector<PosteriorState> out;
  for (const auto& h : model_samples(config, state)) out.push_back(fit_posterior(state.data, h));
  return out;
}

/// Tensor grid with floor(m^(1/d)) nodes per coordinate (at least 2 unless
/// m = 1, which gives the box center).
inline std::vector<Vector> tensor_grid(const Bounds& bounds, int m) {
  const Eigen::Index d = bounds.dim();
  if (m <= 1) return {bounds.center()};
  int k = std::max(2, static_cast<int>(std::floor(std::pow(static_cast<double>(m), 1.0 / d) + 1e-9)));
  std::vector<Vector> out;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    Vector x(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      x[j] = bounds.lower[j] + (bounds.upper[j] - bounds.lower[j]) * idx[static_cast<std::size_t>(j)] / (k - 1);
    }
    out.push_back(std::move(x));
    Eigen::Index j = 0;
    while (j < d && ++idx[static_cast<std::size_t>(j)] == k) idx[static_cast<std::size_t>(j++)] = 0;
    if (j == d) break;
  }
  return out;
}

namespace detail {

inline Vector best_data_point(const ObservationSet& data) {
  const auto& y = data.values();
  return data.point(static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin()));
}

inline bool near_data(const ObservationSet& data, const Vector& x, const Bounds& bounds) {
  const double tol = 1e-6 * bounds.diagonal();
  return std::any_of(data.points().begin(), data.points().end(),
                     [&](const Vector& p) { return (p - x).norm() <= tol; });
}

inline double averaged_parallel_ei(const std::vector<PosteriorState>& ps, const std::vector<Vector>& batch,
                                   int samples, const Rng& base) {
  double v = 0.0;
  for (const auto& p : ps) {
    Rng r = base;
    v += parallel_ei(p, batch, improvement_incumbent(p), samples, r).value;
  }
  return v / static_cast<double>(ps.size());
}

inline Suggestion suggest_ei_like(const LoopConfig& config, const std::vector<PosteriorState>& ps, Rng& rng,
                                  bool kgcp_kind) {
  const Objective obj = [&ps, kgcp_kind](const Vector& x, Vector* g) {
    if (!kgcp_kind) {
      auto v = averaged_ei(ps, x);
      if (g != nullptr) *g = std::move(v.gradient);
      return v.value;
    }
    AcquisitionValue acc{0.0, Vector::Zero(x.size())};
    for (const auto& p : ps) {
      const auto v = kgcp(p, x);
      acc.value += v.value;
      acc.gradient += v.gradient;
    }
    const double s = static_cast<double>(ps.size());
    if (g != nullptr) *g = acc.gradient / s;
    return acc.value / s;
  };
  auto res = multistart_deterministic(obj, config.bounds, config.acquisition.ascent, rng,
                                      {best_data_point(ps.front().data())});
  const bool noise_free = std::all_of(ps.begin(), ps.end(),
                                      [](const PosteriorState& p) { return p.hypers().noise_variance == 0.0; });
  if (noise_free && near_data(ps.front().data(), res.argmax, config.bounds)) {
    // The acquisition has collapsed (zero or underflowed) around the ascent
    // result; re-evaluating a noise-free point is useless, so take the best
    // of a uniform sample away from the data, breaking ties by variance.
    const int m = 256 * static_cast<int>(config.bounds.dim());
    double best_v = -1.0, best_var = -1.0;
    Vector best_x;
    for (int t = 0; t < m; ++t) {
      Vector c = uniform_point(config.bounds, rng);
      if (near_data(ps.front().data(), c, config.bounds)) continue;
      const double v = obj(c, nullptr);
      double var = 0.0;
      for (const auto& p : ps) var += predict(p, c).variance;
      if (v > best_v || (v == best_v && var > best_var)) {
        best_v = v;
        best_var = var;
        best_x = std::move(c);
      }
    }
    if (best_x.size() > 0) {
      res.argmax = std::move(best_x);
      res.value = best_v;
    }
  }
  Suggestion s;
  s.points = {res.argmax};
  s.acq_value = res.value;
  s.kind = kgcp_kind ? AcquisitionKind::KGCP : AcquisitionKind::EI;
  return s;
}

inline Suggestion suggest_kg(const LoopConfig& config, const std::vector<PosteriorState>& ps, Rng& rng,
                             std::uint64_t n) {
  const auto& asc = config.acquisition.ascent;
  std::vector<KnowledgeGradient> kgs;
  kgs.reserve(ps.size());
  for (const auto& p : ps) kgs.emplace_back(p, InnerDomain::continuous(config.bounds), rng);
  const double s = static_cast<double>(ps.size());
  const StochasticGradient grad = [&kgs, &asc, s](const Vector& x, Rng& r) {
    Vector g = Vector::Zero(x.size());
    for (const auto& kg : kgs) g += kg.gradient(x, asc.gradient_replications, r).gradient;
    return Vector(g / s);
  };
  // Ranking reuses one stream for every candidate.
  const Rng rank_base = substream(config.seed, {n, purpose::kRanking});
  const int j_eval = std::max(2, asc.eval_replications);
  const StochasticValue value = [&kgs, &rank_base, j_eval, s](const Vector& x, Rng&) {
    double v = 0.0;
    for (const auto& kg : kgs) {
      Rng r = rank_base;
      v += kg.estimate(x, j_eval, r).value;
    }
    return v / s;
  };
  const auto res = multistart_sga(grad, value, config.bounds, asc, rng);
  Suggestion out;
  out.points = {res.argmax};
  out.acq_value = res.value;
  out.kind = AcquisitionKind::KG;
  return out;
}

inline Suggestion suggest_qei(const LoopConfig& config, const std::vector<PosteriorState>& ps, Rng& rng,
                              std::uint64_t n) {
  const auto& spec = config.acquisition;
  const Rng rank_base = substream(config.seed, {n, purpose::kRanking});
  Suggestion out;
  out.kind = AcquisitionKind::QEI;
  if (spec.qei_method == QeiMethod::ConstantLiar) {
    out.points = constant_liar_batch(ps, spec.q, spec.lie, config.bounds, spec.ascent, rng);
    out.acq_value = averaged_parallel_ei(ps, out.points, spec.qei_samples, rank_base);
    return out;
  }
  // Joint-MC ranking over the three Constant Liar batches and R batches
  // that complete the single-point EI maximizer with uniform points.
  std::vector<std::vector<Vector>> candidates;
  for (const auto lie : {LieKind::Min, LieKind::Mean, LieKind::Max}) {
    candidates.push_back(constant_liar_batch(ps, spec.q, lie, config.bounds, spec.ascent, rng));
  }
  for (int r = 0; r < spec.ascent.restarts; ++r) {
    std::vector<Vector> b{candidates[1].front()};
    while (static_cast<int>(b.size()) < spec.q) b.push_back(uniform_point(config.bounds, rng));
    candidates.push_back(std::move(b));
  }
  double best = -std::numeric_limits<double>::infinity();
  for (auto& c : candidates) {
    const double v = averaged_parallel_ei(ps, c, spec.qei_samples, rank_base);
    if (v > best) {
      best = v;
      out.points = c;
    }
  }
  out.acq_value = best;
  return out;
}

inline Suggestion suggest_es(const LoopConfig& config, const std::vector<PosteriorState>& ps,
                             std::uint64_t n) {
  const auto& spec = config.acquisition;
  const auto grid = tensor_grid(config.bounds, spec.es_grid_size);
  const Rng base = substream(config.seed, {n, purpose::kAcquisition});
  Suggestion out;
  out.kind = AcquisitionKind::ES;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& x : grid) {
    double v = 0.0;
    for (const auto& p : ps) {
      Rng r = base;
      v += entropy_search_grid(p, grid, x, spec.es_argmax_samples, spec.es_quantiles, r).value;
    }
    v /= static_cast<double>(ps.size());
    if (v > best) {  // strict: ties keep the lowest grid index
      best = v;
      out.points = {x};
    }
  }
  out.acq_value = best;
  return out;
}

}  // namespace detail

/// Maximizes the configured acquisition under the current model.
inline Suggestion suggest_next(const LoopConfig& config, CampaignState& state) {
  if (state.data.empty()) throw InvalidArgument("suggest_next: need at least one observation");
  const auto& spec = config.acquisition;
  const auto ps = fit_posteriors(config, state);
  const bool noisy = std::any_of(ps.begin(), ps.end(),
                                 [](const PosteriorState& p) { return p.hypers().noise_variance > 0.0; });
  if (spec.kind == AcquisitionKind::EI && noisy && !spec.noisy_ei_heuristic) {
    throw InvalidArgument("EI with noisy observations: use KGCP or enable the noisy EI heuristic");
  }
  const std::uint64_t n = state.data.size();
  Rng rng = substream(config.seed, {n, purpose::kAcquisition});
  switch (spec.kind) {
    case AcquisitionKind::EI: return detail::suggest_ei_like(config, ps, rng, false);
    case AcquisitionKind::KGCP: return detail::suggest_ei_like(config, ps, rng, true);
    case AcquisitionKind::KG: return detail::suggest_kg(config, ps, rng, n);
    case AcquisitionKind::QEI: return detail::suggest_qei(config, ps, rng, n);
    case AcquisitionKind::ES: return detail::suggest_es(config, ps, n);
  }
  throw InvalidArgument("suggest_next: unknown acquisition");
}

/// Next point(s) to evaluate: the remaining initial design while n < n0,
/// the acquisition maximizer afterwards.
inline Suggestion ask(const LoopConfig& config, CampaignState& state) {
  const std::size_t n = state.data.size();
  if (n < static_cast<std::size_t>(config.n0)) {
    Suggestion s;
    s.points = {design_points(config)[n]};
    s.kind = config.acquisition.kind;
    s.from_design = true;
    return s;
  }
  return suggest_next(config, state);
}

inline double best_posterior_mean_at_data(const LoopConfig& config, CampaignState& state) {
  const auto ps = fit_posteriors(config, state);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& x : state.data.points()) {
    double m = 0.0;
    for (const auto& p : ps) m += predict(p, x).mean;
    best = std::max(best, m / static_cast<double>(ps.size()));
  }
  return best;
}

inline const TraceRecord& ingest_observation(const LoopConfig& config, CampaignState& state, const Vector& x,
                                             double y,
                                             double acq_value = std::numeric_limits<double>::quiet_NaN(),
                                             double elapsed_ms = 0.0) {
  require_dim(x, config.bounds.dim(), "ingest_observation");
  if (!config.bounds.contains(x)) throw InvalidArgument("ingest_observation: x outside bounds");
  if (!std::isfinite(y)) throw InvalidArgument("ingest_observation: y must be finite");
  const double prev_best = state.data.empty() ? -std::numeric_limits<double>::infinity() : state.data.max_value();
  state.data.add(x, y);
  TraceRecord rec;
  rec.n = static_cast<int>(state.data.size());
  rec.x = x;
  rec.y = y;
  rec.best_observed = std::max(prev_best, y);
  rec.best_posterior_mean = best_posterior_mean_at_data(config, state);
  rec.acq_value = acq_value;
  rec.elapsed_ms = elapsed_ms;
  rec.hypers = model_samples(config, state).front();
  state.trace.push_back(std::move(rec));
  return state.trace.back();
}

struct Recommendation {
  Vector x;
  double value = 0.0;
};

inline Recommendation recommend(const LoopConfig& config, CampaignState& state, RecommendMode mode) {
  if (state.data.empty()) throw InvalidArgument("recommend: no observations");
  if (mode == RecommendMode::BestObserved) {
    const auto& y = state.data.values();
    const auto i = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    return {state.data.point(i), y[i]};
  }
  const auto ps = fit_posteriors(config, state);
  const Objective mean = [&ps](const Vector& x, Vector* g) {
    double m = 0.0;
    if (g != nullptr) *g = Vector::Zero(x.size());
    for (const auto& p : ps) {
      if (g == nullptr) {
        m += predict(p, x).mean;
      } else {
        const auto pg = predict_with_gradient(p, x);
        m += pg.mean;
        *g += pg.grad_mean;
      }
    }
    const double s = static_cast<double>(ps.size());
    if (g != nullptr) *g /= s;
    return m / s;
  };
  Rng rng = substream(config.seed, {state.data.size(), purpose::kRecommend});
  const auto res = multistart_deterministic(mean, config.bounds, config.acquisition.ascent, rng,
                                            state.data.points());
  return {res.argmax, res.value};
}

inline Recommendation recommend(const LoopConfig& config, CampaignState& state) {
  return recommend(config, state, config.recommend_mode);
}

using ObjectiveFunction = std::function<double(const Vector&)>;

/// Runs the sequential loop to the budget N. When noise_variance > 0,
/// observations are objective(x) plus independent Gaussian noise.
inline std::vector<TraceRecord> run_loop(const LoopConfig& config, const ObjectiveFunction& objective,
                                         double noise_variance = 0.0) {
  config.validate();
  if (!(noise_variance >= 0.0)) throw InvalidArgument("run_loop: noise variance must be >= 0");
  CampaignState state(config.bounds.dim());
  using Clock = std::chrono::steady_clock;
  while (state.data.size() < static_cast<std::size_t>(config.budget)) {
    const auto t0 = Clock::now();
    const Suggestion s = ask(config, state);
    for (const auto& x : s.points) {
      const std::size_t n = state.data.size();
      if (n >= static_cast<std::size_t>(config.budget)) break;
      double y = 0.0;
      try {
        y = objective(x);
      } catch (const std::exception& e) {
        throw std::runtime_error("objective failed at evaluation " + std::to_string(n + 1) + ": " + e.what());
      }
      if (noise_variance > 0.0) {
        Rng r = substream(config.seed, {n, purpose::kNoise});
        y += std::sqrt(noise_variance) * standard_normal(r);
      }
      double ms = 0.0;
      if (config.timing) {
        ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      }
      ingest_observation(config, state, x, y, s.acq_value, ms);
    }
  }
  return state.trace;
}

}  // namespace bayeskit

#endif  // BAYESKIT_DRIVER_HPP
