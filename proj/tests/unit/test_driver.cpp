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
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "bayeskit/acq/ei.hpp"
#include "bayeskit/bench.hpp"
#include "bayeskit/driver.hpp"
#include "test_util.hpp"

namespace bayeskit {
namespace {

using testutil::vec;

Hyperparameters unit_model(Eigen::Index d, double alpha = 10.0, double amp = 1.0) {
  Hyperparameters h;
  h.kernel = {KernelFamily::PowerExponential, amp, Vector::Constant(d, alpha)};
  return h;
}

LoopConfig sinus_config(std::uint64_t seed, int budget = 12) {
  const auto f = make_test_function("sinus-1d");
  LoopConfig c;
  c.bounds = f.bounds;
  c.n0 = 4;
  c.budget = budget;
  c.model = unit_model(1, 1.0, 4.0);
  c.model.mean.constant = 2.0;
  c.seed = seed;
  return c;
}

bool same_hypers(const Hyperparameters& a, const Hyperparameters& b) {
  return a.kernel.amplitude == b.kernel.amplitude && a.kernel.inv_sq_lengthscales == b.kernel.inv_sq_lengthscales &&
         a.mean.constant == b.mean.constant && a.noise_variance == b.noise_variance;
}

// ---------------------------------------------------------------- design

TEST(DesignTest, SingleUniformPointInsideBounds) {
  const Bounds b(vec({-2.0, 3.0}), vec({-1.0, 7.0}));
  Rng rng(1);
  const auto pts = initial_design(1, b, DesignMethod::Uniform, rng);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_TRUE(b.contains(pts[0]));
}

TEST(DesignTest, LatinHypercubeStrata) {
  const Bounds b(vec({0.0, -5.0}), vec({1.0, 5.0}));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto pts = initial_design(5, b, DesignMethod::LatinHypercube, rng);
    for (Eigen::Index j = 0; j < 2; ++j) {
      std::vector<int> hits(5, 0);
      for (const auto& p : pts) {
        const double u = (p[j] - b.lower[j]) / b.width()[j];
        ++hits[static_cast<std::size_t>(std::min(4, static_cast<int>(u * 5.0)))];
      }
      for (int h : hits) EXPECT_EQ(h, 1) << "seed " << seed << " coordinate " << j;
    }
  }
}

TEST(DesignTest, UniformMoments) {
  const Bounds b(vec({0.0, 10.0, -1.0}), vec({2.0, 11.0, 1.0}));
  Rng rng(3);
  const auto pts = initial_design(10000, b, DesignMethod::Uniform, rng);
  for (Eigen::Index j = 0; j < 3; ++j) {
    std::vector<double> col;
    for (const auto& p : pts) col.push_back(p[j]);
    const auto m = summarize(col);
    EXPECT_LE(std::abs(m.value - b.center()[j]), 4.0 * m.std_error);
  }
}

TEST(DesignTest, DeterministicGivenSeed) {
  for (auto method : {DesignMethod::Uniform, DesignMethod::LatinHypercube}) {
    Rng a(9), b(9);
    const auto pa = initial_design(7, Bounds::unit(3), method, a);
    const auto pb = initial_design(7, Bounds::unit(3), method, b);
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i], pb[i]);
  }
  Rng rng(0);
  EXPECT_THROW(initial_design(0, Bounds::unit(1), DesignMethod::Uniform, rng), InvalidArgument);
}

TEST(DesignTest, TensorGrid) {
  const auto g = tensor_grid(Bounds::unit(2), 32);
  EXPECT_EQ(g.size(), 25u);  // floor(sqrt(32)) = 5 per axis
  for (const auto& x : g) EXPECT_TRUE(Bounds::unit(2).contains(x));
  EXPECT_EQ(tensor_grid(Bounds::unit(3), 1).size(), 1u);
  EXPECT_EQ(tensor_grid(Bounds::unit(1), 10).size(), 10u);
}

// ---------------------------------------------------------------- config

TEST(LoopConfigTest, NamesRoundTrip) {
  for (auto m : {DesignMethod::Uniform, DesignMethod::LatinHypercube}) {
    EXPECT_EQ(design_method_from_string(to_string(m)), m);
  }
  for (auto m : {RecommendMode::BestObserved, RecommendMode::MaxPosteriorMean}) {
    EXPECT_EQ(recommend_mode_from_string(to_string(m)), m);
  }
  for (auto k : {HyperMode::Kind::Fixed, HyperMode::Kind::MLE, HyperMode::Kind::MAP,
                 HyperMode::Kind::FullyBayesian}) {
    EXPECT_EQ(hyper_mode_from_string(to_string(k)), k);
  }
  EXPECT_EQ(to_string(DesignMethod::LatinHypercube), "latin-hypercube");
  EXPECT_THROW(design_method_from_string("sobol"), InvalidArgument);
  EXPECT_THROW(recommend_mode_from_string("median"), InvalidArgument);
  EXPECT_THROW(hyper_mode_from_string("EM"), InvalidArgument);
}

TEST(LoopConfigTest, Validation) {
  auto c = sinus_config(0);
  EXPECT_NO_THROW(c.validate());
  c.n0 = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = sinus_config(0);
  c.n0 = c.budget + 1;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = sinus_config(0);
  c.refit_every = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = sinus_config(0);
  c.model = unit_model(2);
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = sinus_config(0);
  c.acquisition.q = 3;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = sinus_config(0);
  c.hyper_mode.kind = HyperMode::Kind::FullyBayesian;
  c.hyper_mode.samples = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(LoopConfigTest, RefitSchedule) {
  for (std::size_t n = 0; n < 10; ++n) EXPECT_EQ(refit_prefix(n, 1), n);
  const std::size_t want[] = {0, 1, 2, 2, 2, 5, 5, 5, 8, 8};
  for (std::size_t n = 0; n < 10; ++n) EXPECT_EQ(refit_prefix(n, 3), want[n]) << "n=" << n;
}

// ---------------------------------------------------------------- suggest

TEST(SuggestTest, FollowsGridScannedEi) {
  // Two observations on [0, 1], in the spirit of the one-dimensional picture:
  // EI is largest away from both and on the side of the better one.
  LoopConfig c;
  c.bounds = Bounds::unit(1);
  c.n0 = 2;
  c.budget = 3;
  c.model = unit_model(1, 8.0);
  CampaignState state(1);
  ingest_observation(c, state, vec({0.3}), 0.2);
  ingest_observation(c, state, vec({0.55}), 0.6);
  const auto s = suggest_next(c, state);
  ASSERT_EQ(s.points.size(), 1u);
  const auto post = fit_posterior(state.data, c.model);
  double best = -1.0, best_x = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double x = i / 10000.0;
    const double v = expected_improvement(post, vec({x}), 0.6).value;
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  EXPECT_NEAR(s.points[0][0], best_x, 1e-3);
  EXPECT_NEAR(s.acq_value, best, 1e-8);
  EXPECT_EQ(s.kind, AcquisitionKind::EI);
  EXPECT_FALSE(s.from_design);
}

TEST(SuggestTest, NoiseFreeEiNeverRepeatsAPoint) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto c = sinus_config(seed, 15);
    const auto trace = run_loop(c, make_test_function("sinus-1d").evaluator);
    for (std::size_t i = static_cast<std::size_t>(c.n0); i < trace.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        EXPECT_GT((trace[i].x - trace[j].x).norm(), 1e-6 * c.bounds.diagonal()) << "seed " << seed;
      }
    }
  }
}

TEST(SuggestTest, RepeatIsIdentical) {
  auto c = sinus_config(5);
  c.hyper_mode.kind = HyperMode::Kind::MLE;
  CampaignState state(1);
  for (const auto& x : design_points(c)) ingest_observation(c, state, x, std::sin(3.0 * x[0]) + x[0]);
  const auto a = suggest_next(c, state);
  CampaignState copy = state;
  copy.cache = {};
  const auto b = suggest_next(c, copy);
  EXPECT_EQ(a.points[0], b.points[0]);
  EXPECT_EQ(a.acq_value, b.acq_value);
}

TEST(SuggestTest, EveryAcquisitionStaysInBounds) {
  const Bounds box(vec({-1.0, 0.0}), vec({1.0, 2.0}));
  for (auto kind : {AcquisitionKind::EI, AcquisitionKind::KGCP, AcquisitionKind::KG, AcquisitionKind::QEI,
                    AcquisitionKind::ES}) {
    LoopConfig c;
    c.bounds = box;
    c.n0 = 4;
    c.budget = 10;
    c.model = unit_model(2, 2.0);
    c.model.noise_variance = kind == AcquisitionKind::EI ? 0.0 : 1e-3;
    c.acquisition.kind = kind;
    c.acquisition.ascent.restarts = 3;
    c.acquisition.ascent.iterations = 20;
    c.acquisition.ascent.eval_replications = 100;
    c.acquisition.es_argmax_samples = 100;
    c.acquisition.es_quantiles = 4;
    c.acquisition.qei_samples = 200;
    if (kind == AcquisitionKind::QEI) c.acquisition.q = 3;
    CampaignState state(2);
    for (const auto& x : design_points(c)) ingest_observation(c, state, x, x.sum() - x.squaredNorm());
    const auto s = suggest_next(c, state);
    EXPECT_EQ(s.points.size(), kind == AcquisitionKind::QEI ? 3u : 1u) << to_string(kind);
    for (const auto& x : s.points) EXPECT_TRUE(box.contains(x)) << to_string(kind);
    EXPECT_TRUE(std::isfinite(s.acq_value)) << to_string(kind);
    EXPECT_EQ(s.kind, kind);
  }
}

TEST(SuggestTest, JointMonteCarloBatch) {
  auto c = sinus_config(2);
  c.acquisition.kind = AcquisitionKind::QEI;
  c.acquisition.q = 2;
  c.acquisition.qei_method = QeiMethod::JointMC;
  c.acquisition.qei_samples = 500;
  CampaignState state(1);
  for (const auto& x : design_points(c)) ingest_observation(c, state, x, std::sin(3.0 * x[0]) + x[0]);
  const auto s = suggest_next(c, state);
  ASSERT_EQ(s.points.size(), 2u);
  EXPECT_GT(s.acq_value, 0.0);
}

TEST(SuggestTest, NoisyEiNeedsTheHeuristic) {
  auto c = sinus_config(1);
  c.model.noise_variance = 0.01;
  CampaignState state(1);
  for (const auto& x : design_points(c)) ingest_observation(c, state, x, x[0]);
  EXPECT_THROW(suggest_next(c, state), InvalidArgument);
  c.acquisition.noisy_ei_heuristic = true;
  EXPECT_NO_THROW(suggest_next(c, state));
}

TEST(SuggestTest, AskWalksTheDesignFirst) {
  const auto c = sinus_config(3);
  const auto design = design_points(c);
  CampaignState state(1);
  EXPECT_THROW(suggest_next(c, state), InvalidArgument);
  for (int i = 0; i < c.n0; ++i) {
    const auto s = ask(c, state);
    EXPECT_TRUE(s.from_design);
    EXPECT_EQ(s.points[0], design[static_cast<std::size_t>(i)]);
    ingest_observation(c, state, s.points[0], 1.0);
  }
  EXPECT_FALSE(ask(c, state).from_design);
}

// ---------------------------------------------------------------- ingest

TEST(IngestTest, InterpolatesAndTracksBest) {
  const auto c = sinus_config(0);
  CampaignState state(1);
  const auto& r1 = ingest_observation(c, state, vec({1.0}), 2.5, 0.7);
  EXPECT_EQ(r1.n, 1);
  EXPECT_EQ(r1.best_observed, 2.5);
  EXPECT_EQ(r1.acq_value, 0.7);
  EXPECT_NEAR(predict(fit_posterior(state.data, c.model), vec({1.0})).mean, 2.5, 1e-6);
  const auto& r2 = ingest_observation(c, state, vec({3.0}), 1.0);
  EXPECT_EQ(r2.best_observed, 2.5);
  EXPECT_TRUE(std::isnan(r2.acq_value));
  EXPECT_EQ(state.trace.size(), 2u);
}

TEST(IngestTest, DuplicatePointIsHandled) {
  const auto c = sinus_config(0);
  CampaignState state(1);
  ingest_observation(c, state, vec({2.0}), 1.0);
  EXPECT_NO_THROW(ingest_observation(c, state, vec({2.0}), 1.0));
  EXPECT_NEAR(predict(fit_posterior(state.data, c.model), vec({2.0})).mean, 1.0, 1e-6);
}

TEST(IngestTest, RejectsInvalidObservations) {
  const auto c = sinus_config(0);
  CampaignState state(1);
  EXPECT_THROW(ingest_observation(c, state, vec({4.5}), 1.0), InvalidArgument);
  EXPECT_THROW(ingest_observation(c, state, vec({1.0, 1.0}), 1.0), InvalidArgument);
  EXPECT_THROW(ingest_observation(c, state, vec({1.0}), std::numeric_limits<double>::quiet_NaN()),
               InvalidArgument);
  EXPECT_THROW(ingest_observation(c, state, vec({1.0}), std::numeric_limits<double>::infinity()),
               InvalidArgument);
  EXPECT_TRUE(state.data.empty());
}

// ---------------------------------------------------------------- recommend

TEST(RecommendTest, SingleObservation) {
  const auto c = sinus_config(0);
  CampaignState state(1);
  ingest_observation(c, state, vec({1.5}), -3.0);
  const auto r = recommend(c, state, RecommendMode::BestObserved);
  EXPECT_EQ(r.x, vec({1.5}));
  EXPECT_EQ(r.value, -3.0);
  CampaignState empty(1);
  EXPECT_THROW(recommend(c, empty), InvalidArgument);
}

TEST(RecommendTest, TiesGoToTheEarliestObservation) {
  const auto c = sinus_config(0);
  CampaignState state(1);
  ingest_observation(c, state, vec({0.5}), 1.0);
  ingest_observation(c, state, vec({2.5}), 2.0);
  ingest_observation(c, state, vec({3.5}), 2.0);
  EXPECT_EQ(recommend(c, state, RecommendMode::BestObserved).x, vec({2.5}));
}

TEST(RecommendTest, PosteriorMeanDominatesNoiseFree) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto c = sinus_config(seed);
    CampaignState state(1);
    for (const auto& x : design_points(c)) ingest_observation(c, state, x, std::sin(3.0 * x[0]) + x[0]);
    const auto best = recommend(c, state, RecommendMode::BestObserved);
    const auto mean = recommend(c, state, RecommendMode::MaxPosteriorMean);
    EXPECT_GE(mean.value, best.value - 1e-6);
    EXPECT_TRUE(c.bounds.contains(mean.x));
  }
}

TEST(RecommendTest, NoisyOutlierSplitsTheModes) {
  LoopConfig c;
  c.bounds = Bounds::unit(1);
  c.n0 = 1;
  c.budget = 20;
  c.model = unit_model(1, 20.0);
  c.model.noise_variance = 0.5;
  CampaignState state(1);
  for (int i = 0; i <= 10; ++i) ingest_observation(c, state, vec({i / 10.0}), i == 5 ? 2.0 : 0.0);
  const auto post = fit_posterior(state.data, c.model);
  double max_mean = -1.0;
  for (int i = 0; i <= 1000; ++i) max_mean = std::max(max_mean, predict(post, vec({i / 1000.0})).mean);
  ASSERT_LT(max_mean, 2.0);  // the outlier sits above mu_n everywhere
  const auto best = recommend(c, state, RecommendMode::BestObserved);
  const auto mean = recommend(c, state, RecommendMode::MaxPosteriorMean);
  EXPECT_EQ(best.x, vec({0.5}));
  EXPECT_EQ(best.value, 2.0);
  EXPECT_NEAR(mean.value, max_mean, 1e-6);
  EXPECT_LT(mean.value, best.value);
}

// ---------------------------------------------------------------- run_loop

TEST(RunLoopTest, DesignOnlyBudget) {
  auto c = sinus_config(4);
  c.budget = c.n0;
  const auto trace = run_loop(c, make_test_function("sinus-1d").evaluator);
  const auto design = design_points(c);
  ASSERT_EQ(trace.size(), static_cast<std::size_t>(c.n0));
  for (std::size_t i = 0; i < trace.size(); ++i) EXPECT_EQ(trace[i].x, design[i]);
}

TEST(RunLoopTest, ConstantObjective) {
  const auto trace = run_loop(sinus_config(1, 8), [](const Vector&) { return 1.25; });
  ASSERT_EQ(trace.size(), 8u);
  for (const auto& r : trace) EXPECT_EQ(r.best_observed, 1.25);
}

TEST(RunLoopTest, TraceInvariants) {
  auto c = sinus_config(7, 14);
  c.hyper_mode.kind = HyperMode::Kind::MLE;
  c.design = DesignMethod::LatinHypercube;
  const auto trace = run_loop(c, make_test_function("sinus-1d").evaluator);
  ASSERT_EQ(trace.size(), 14u);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    EXPECT_EQ(trace[i].n, static_cast<int>(i) + 1);
    EXPECT_TRUE(c.bounds.contains(trace[i].x));
    EXPECT_EQ(trace[i].elapsed_ms, 0.0);
    if (i > 0) EXPECT_GE(trace[i].best_observed, trace[i - 1].best_observed);
    if (i < static_cast<std::size_t>(c.n0)) {
      EXPECT_TRUE(std::isnan(trace[i].acq_value));
    } else {
      EXPECT_GE(trace[i].acq_value, 0.0);
    }
  }
}

TEST(RunLoopTest, RefitCadence) {
  auto c = sinus_config(2, 11);
  c.hyper_mode.kind = HyperMode::Kind::MLE;
  c.refit_every = 3;
  const auto trace = run_loop(c, make_test_function("sinus-1d").evaluator);
  // Hypers change only at n = 2, 5, 8, 11.
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const int n = trace[i].n;
    if ((n - 2) % 3 != 0) EXPECT_TRUE(same_hypers(trace[i].hypers, trace[i - 1].hypers)) << "n=" << n;
  }
  EXPECT_FALSE(same_hypers(trace[4].hypers, trace[3].hypers));
}

TEST(RunLoopTest, SeedDeterminism) {
  auto c = sinus_config(11, 10);
  c.hyper_mode.kind = HyperMode::Kind::MAP;
  const auto f = make_test_function("sinus-1d").evaluator;
  const auto a = run_loop(c, f, 0.01);
  const auto b = run_loop(c, f, 0.01);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].x, b[i].x);
    EXPECT_EQ(a[i].y, b[i].y);
    EXPECT_TRUE(same_hypers(a[i].hypers, b[i].hypers));
  }
}

TEST(RunLoopTest, NoiseSimulator) {
  auto c = sinus_config(3, 6);
  c.model.noise_variance = 0.04;
  c.acquisition.kind = AcquisitionKind::KGCP;
  const auto f = make_test_function("sinus-1d").evaluator;
  const auto trace = run_loop(c, f, 0.04);
  int differ = 0;
  for (const auto& r : trace) differ += r.y != f(r.x);
  EXPECT_EQ(differ, 6);
  EXPECT_THROW(run_loop(c, f, -1.0), InvalidArgument);
}

TEST(RunLoopTest, FullyBayesianLoop) {
  auto c = sinus_config(6, 7);
  c.hyper_mode.kind = HyperMode::Kind::FullyBayesian;
  c.hyper_mode.samples = 3;
  c.hyper_mode.burn_in = 5;
  // amplitude, inverse squared lengthscale, mean constant
  c.hyper_mode.prior.per_param = {ScalarPrior::log_normal(std::log(4.0), 1.0),
                                  ScalarPrior::log_normal(0.0, 1.0), ScalarPrior::normal(2.0, 2.0)};
  const auto trace = run_loop(c, make_test_function("sinus-1d").evaluator);
  EXPECT_EQ(trace.size(), 7u);
  for (const auto& r : trace) EXPECT_TRUE(c.bounds.contains(r.x));

  c.hyper_mode.prior.per_param.clear();
  EXPECT_THROW(run_loop(c, make_test_function("sinus-1d").evaluator), InvalidArgument);
}

TEST(RunLoopTest, ObjectiveErrorsCarryTheIteration) {
  int calls = 0;
  const ObjectiveFunction flaky = [&](const Vector&) -> double {
    if (++calls == 3) throw std::runtime_error("instrument offline");
    return 0.0;
  };
  try {
    run_loop(sinus_config(0), flaky);
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("evaluation 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("instrument offline"), std::string::npos) << msg;
  }
}

TEST(RunLoopTest, TimingIsOptIn) {
  auto c = sinus_config(0, 6);
  c.timing = true;
  const auto trace = run_loop(c, make_test_function("sinus-1d").evaluator);
  for (const auto& r : trace) EXPECT_GE(r.elapsed_ms, 0.0);
}

}  // namespace
}  // namespace bayeskit
