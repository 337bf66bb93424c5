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
// Acceptance suite. Prints one PASS/FAIL line per criterion with the measured
// quantities and exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "bayeskit/acq/ei.hpp"
#include "bayeskit/acq/entropy.hpp"
#include "bayeskit/acq/kg.hpp"
#include "bayeskit/acq/kgcp.hpp"
#include "bayeskit/acq/parallel.hpp"
#include "bayeskit/acqopt.hpp"
#include "bayeskit/bench.hpp"
#include "bayeskit/driver.hpp"
#include "bayeskit/service/campaign.hpp"
#include "json.hpp"
#include "oracles/dense_gp.hpp"
#include "oracles/kg_quadrature.hpp"
#include "oracles/quadrature.hpp"
#include "test_util.hpp"

namespace {

using namespace bayeskit;
using testutil::vec;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

PosteriorState random_state(std::uint64_t seed, Eigen::Index d, int n, double noise,
                            KernelFamily family = KernelFamily::PowerExponential) {
  Rng rng(seed);
  const auto h = testutil::random_hypers(rng, d, family, noise);
  return fit_posterior(testutil::random_data(rng, d, n, std::sqrt(noise)), h);
}

// Error scaled by the natural magnitude of the quantity, so that oracle
// values near zero do not turn rounding noise into huge relative errors.
double scaled_err(double got, long double want, double scale) {
  return std::fabs(got - static_cast<double>(want)) / std::max(std::fabs(static_cast<double>(want)), scale);
}

constexpr KernelFamily kFamilies[] = {KernelFamily::PowerExponential, KernelFamily::Matern32, KernelFamily::Matern52};

// ---------------------------------------------------------------- GP

Outcome gp_oracle_equivalence() {
  const auto t0 = Clock::now();
  Rng rng(2026);
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const Eigen::Index d = 1 + inst % 3;
    const int n = 1 + inst % 8;
    const double noise = inst % 2 == 0 ? 0.0 : 0.01 * (1 + inst % 5);
    const auto h = testutil::random_hypers(rng, d, kFamilies[inst % 3], noise);
    const auto data = testutil::random_data(rng, d, n, std::sqrt(noise));
    const auto s = fit_posterior(data, h);
    const oracle::DenseGP o(data, h, s.jitter());
    const double amp = h.kernel.amplitude;
    std::vector<Vector> xs;
    for (int k = 0; k < 4; ++k) xs.push_back(uniform_point(Bounds::unit(d), rng));
    xs.push_back(data.point(0));
    for (const auto& x : xs) {
      const auto p = predict(s, x);
      worst = std::max(worst, scaled_err(p.mean, o.mean(x), std::sqrt(amp)));
      worst = std::max(worst, scaled_err(p.variance, o.variance(x), amp));
    }
    const auto j = predict_joint(s, xs);
    for (std::size_t a = 0; a < xs.size(); ++a) {
      worst = std::max(worst, scaled_err(j.means[static_cast<Eigen::Index>(a)], o.mean(xs[a]), std::sqrt(amp)));
      for (std::size_t b = 0; b < xs.size(); ++b) {
        worst = std::max(worst, scaled_err(j.covariance(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)),
                                           o.cov(xs[a], xs[b]), amp));
      }
    }
    worst = std::max(worst, scaled_err(log_marginal_likelihood(s), o.log_marginal_likelihood(), 1.0));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 10.0, "50 instances, worst error " + fmt("%.2e", worst) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome interpolation_zero_width() {
  Rng rng(77);
  double worst_mean = 0.0, worst_var = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const Eigen::Index d = 1 + inst % 3;
    const auto h = testutil::random_hypers(rng, d, kFamilies[inst % 3], 0.0);
    const auto data = testutil::random_data(rng, d, 2 + inst % 7);
    const auto s = fit_posterior(data, h);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto p = predict(s, data.point(i));
      worst_mean = std::max(worst_mean, std::fabs(p.mean - data.value(i)));
      worst_var = std::max(worst_var, p.variance / h.kernel.amplitude);
    }
  }
  return {worst_mean <= 1e-6 && worst_var <= 1e-5,
          "max |mu - y| " + fmt("%.2e", worst_mean) + ", max var/amp " + fmt("%.2e", worst_var)};
}

// ---------------------------------------------------------------- EI

Outcome ei_closed_form() {
  const auto t0 = Clock::now();
  int bad_cells = 0;
  double worst_z = 0.0;
  // One set of normal draws shared by every cell: the 100 comparisons then
  // move together instead of being 100 independent 3-SE trials.
  Rng rng(5);
  std::vector<double> z_draws(1000000);
  for (auto& z : z_draws) z = standard_normal(rng);
  std::vector<double> draws(z_draws.size());
  for (int i = 0; i < 10; ++i) {
    for (int k = 0; k < 10; ++k) {
      const double delta = -1.0 + 2.0 * i / 9.0;
      const double sigma = 0.25 + 2.25 * k / 9.0;
      for (std::size_t m = 0; m < draws.size(); ++m) draws[m] = std::max(delta + sigma * z_draws[m], 0.0);
      const auto mc = summarize(draws);
      const double z = std::fabs(expected_improvement(delta, sigma) - mc.value) / mc.std_error;
      worst_z = std::max(worst_z, z);
      if (z > 3.0) ++bad_cells;
    }
  }

  int points = 0, bad_grad = 0;
  double worst_grad = 0.0;
  Rng pick(19);
  for (std::uint64_t seed = 0; points < 100; ++seed) {
    const auto s = random_state(seed, 1 + static_cast<Eigen::Index>(seed % 3), 5, 0.0, kFamilies[seed % 3]);
    const Eigen::Index d = s.data().dim();
    const double f_star = s.data().max_value();
    for (int t = 0; t < 10 && points < 100; ++t) {
      const Vector x = uniform_point(Bounds(Vector::Constant(d, 0.01), Vector::Constant(d, 0.99)), pick);
      const auto v = expected_improvement(s, x, f_star);
      if (v.value < 1e-8) continue;  // flat region: the gradient is numerically zero
      Vector fd(d);
      for (Eigen::Index c = 0; c < d; ++c) {
        Vector up = x, dn = x;
        up[c] += 1e-6;
        dn[c] -= 1e-6;
        fd[c] = (expected_improvement(s, up, f_star).value - expected_improvement(s, dn, f_star).value) / 2e-6;
      }
      const double err = (v.gradient - fd).norm() / std::max(fd.norm(), 1e-6);
      worst_grad = std::max(worst_grad, err);
      if (err > 1e-4) ++bad_grad;
      ++points;
    }
  }
  const double secs = seconds_since(t0);
  return {bad_cells == 0 && bad_grad == 0 && secs < 30.0,
          "100 cells, worst |z| " + fmt("%.2f", worst_z) + "; 100 gradients, worst rel err " + fmt("%.2e", worst_grad) +
              ", " + fmt("%.1f", secs) + " s"};
}

// ---------------------------------------------------------------- KG

Outcome kg_quadrature() {
  const auto t0 = Clock::now();
  std::string detail;
  bool pass = true;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto s = random_state(seed + 20, 1, 4, seed == 1 ? 0.02 : 0.0);
    std::vector<Vector> grid;
    for (int i = 0; i < 5; ++i) grid.push_back(vec({0.1 + 0.2 * i}));
    const Vector x = vec({0.33});
    Rng rng(seed);
    const auto est = kg_estimate(s, x, 100000, InnerDomain::discrete(Bounds::unit(1), grid), rng);
    const double want = oracle::kg_discrete(s.data(), s.hypers(), s.jitter(), x, grid);
    const double z = std::fabs(est.value - want) / est.std_error;
    pass = pass && z <= 3.0;
    detail += (seed ? ", " : "") + fmt("|z|=%.2f", z);
  }
  const double secs = seconds_since(t0);
  return {pass && secs < 60.0, "3 instances " + detail + ", " + fmt("%.1f", secs) + " s"};
}

Outcome kg_gradient_unbiased() {
  const auto t0 = Clock::now();
  const int J = 100000;
  const double h = 1e-3;
  std::string detail;
  bool pass = true;
  const Vector points[] = {vec({0.37}), vec({0.62}), vec({0.15}), vec({0.4, 0.6}), vec({0.7, 0.3})};
  for (std::uint64_t inst = 0; inst < 5; ++inst) {
    const Vector& x = points[inst];
    const Eigen::Index d = x.size();
    const auto s = random_state(inst + 40, d, 4, inst % 2 == 0 ? 0.01 : 0.0);
    Rng init(inst);
    const KnowledgeGradient kg(s, InnerDomain::continuous(Bounds::unit(d)), init);
    Rng rng(100 + inst);
    const auto g = kg.gradient(x, J, rng);
    for (Eigen::Index i = 0; i < d; ++i) {
      Vector up = x, dn = x;
      up[i] += h;
      dn[i] -= h;
      Rng r(500 + inst);  // independent of the gradient draws; shared between +h and -h
      std::vector<double> diffs(J);
      for (auto& v : diffs) {
        const double z = standard_normal(r);
        v = (kg.replication(up, z, nullptr) - kg.replication(dn, z, nullptr)) / (2.0 * h);
      }
      const auto fd = summarize(diffs);
      const double zs = std::fabs(g.gradient[i] - fd.value) / std::hypot(fd.std_error, g.std_error[i]);
      pass = pass && zs <= 3.0;
      detail += (detail.empty() ? "" : ", ") + fmt("%.2f", zs) + fmt(" (g=%.3g)", g.gradient[i]);
    }
  }
  return {pass, "5 instances, per-coordinate |z| " + detail + ", " + fmt("%.1f", seconds_since(t0)) + " s"};
}

// ---------------------------------------------------------------- KGCP

Outcome kgcp_limits() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = random_state(seed + 60, 1, 5, 0.0, kFamilies[seed % 3]);
    const double f_star = s.data().max_value();
    for (int i = 0; i < 100; ++i) {
      const Vector x = vec({i / 99.0});
      worst = std::max(worst, std::fabs(kgcp(s, x).value - expected_improvement(s, x, f_star).value));
    }
  }
  std::string detail;
  bool pass = worst <= 1e-6;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(seed % 2);
    const auto s = random_state(seed + 80, d, 3 + static_cast<int>(seed), 0.05);
    const oracle::DenseGP gp(s.data(), s.hypers(), s.jitter());
    Rng pick(seed);
    const Vector x = uniform_point(Bounds::unit(d), pick);
    const double sd = std::sqrt(static_cast<double>(gp.variance(x)) + s.hypers().noise_variance);
    std::vector<double> a, b;
    for (const auto& p : s.data().points()) {
      a.push_back(static_cast<double>(gp.mean(p)));
      b.push_back(static_cast<double>(gp.cov(p, x)) / sd);
    }
    const double incumbent = *std::max_element(a.begin(), a.end());
    a.push_back(static_cast<double>(gp.mean(x)));
    b.push_back(static_cast<double>(gp.variance(x)) / sd);
    Rng rng(seed + 7);
    std::vector<double> draws(1000000);
    for (auto& v : draws) {
      const double z = standard_normal(rng);
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < a.size(); ++i) hi = std::max(hi, a[i] + b[i] * z);
      v = hi - incumbent;
    }
    const auto mc = summarize(draws);
    const double z = std::fabs(kgcp(s, x).value - mc.value) / mc.std_error;
    pass = pass && z <= 3.0;
    detail += (seed ? ", " : "") + fmt("%.2f", z);
  }
  return {pass, "noise-free max |KGCP - EI| " + fmt("%.2e", worst) + "; noisy |z| " + detail};
}

// ---------------------------------------------------------------- parallel EI

Outcome parallel_ei_reductions() {
  const int M = 1000000;
  const auto s1 = random_state(2, 2, 5, 0.0);
  const Vector x1 = vec({0.25, 0.75});
  const double f1 = s1.data().max_value();
  Rng r1(3);
  const auto single = parallel_ei(s1, {x1}, f1, M, r1);
  const double z1 = std::fabs(single.value - expected_improvement(s1, x1, f1).value) / single.std_error;

  const auto s2 = random_state(6, 1, 4, 0.0);
  const Vector x2 = vec({0.61});
  Rng r2(4);
  const auto dup = parallel_ei(s2, {x2, x2}, M, r2);
  const double z2 =
      std::fabs(dup.value - expected_improvement(s2, x2, improvement_incumbent(s2)).value) / dup.std_error;

  ObservationSet data(1);
  data.add(vec({0.4}), 0.3);
  data.add(vec({0.6}), 0.5);
  Hyperparameters h;
  h.kernel = {KernelFamily::PowerExponential, 1.0, Vector::Constant(1, 50.0)};
  const auto s3 = fit_posterior(data, h);
  const Vector a = vec({0.02}), b = vec({0.98});
  const oracle::DenseGP gp(data, h, s3.jitter());
  const double m1 = static_cast<double>(gp.mean(a)), m2 = static_cast<double>(gp.mean(b));
  const double v1 = static_cast<double>(gp.variance(a)), v2 = static_cast<double>(gp.variance(b));
  const double c = static_cast<double>(gp.cov(a, b));
  const double l11 = std::sqrt(v1), l21 = c / l11, l22 = std::sqrt(v2 - l21 * l21);
  const double f_star = 0.5;
  const double want = oracle::expect_normal_piecewise(
      [&](double u) {
        const double floor = std::max(m1 + l11 * u, f_star);
        return oracle::expect_normal_piecewise(
            [&](double w) { return std::max(floor, m2 + l21 * u + l22 * w) - f_star; },
            {(floor - m2 - l21 * u) / l22});
      },
      {(f_star - m1) / l11});
  Rng r3(5);
  const auto pair = parallel_ei(s3, {a, b}, f_star, M, r3);
  const double z3 = std::fabs(pair.value - want) / pair.std_error;
  return {z1 <= 3.0 && z2 <= 3.0 && z3 <= 3.0,
          "q=1 |z| " + fmt("%.2f", z1) + ", duplicated |z| " + fmt("%.2f", z2) + ", independent |z| " + fmt("%.2f", z3)};
}

// ---------------------------------------------------------------- ES

Outcome entropy_search_properties() {
  const auto s0 = random_state(1, 1, 3, 0.0);
  Rng r0(0);
  const auto singleton = entropy_search_grid(s0, {vec({0.5})}, vec({0.2}), 100, 5, r0);
  const bool zero = singleton.value == 0.0;

  Hyperparameters h;
  h.kernel = {KernelFamily::Matern52, 1.0, Vector::Constant(1, 4.0)};
  Rng r1(2);
  const auto e = argmax_entropy(fit_posterior(ObservationSet(1), h), {vec({0.2}), vec({0.8})}, 20000, r1);
  const double z = std::fabs(e.value - std::log(2.0)) / e.std_error;

  std::vector<Vector> grid;
  for (int i = 0; i < 5; ++i) grid.push_back(vec({0.1 + 0.2 * i}));
  Rng pick(4);
  int negative = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = random_state(seed, 1, 3, seed % 2 == 0 ? 0.0 : 0.05);
    const Vector x = uniform_point(Bounds::unit(1), pick);
    Rng rng(seed);
    const auto v = entropy_search_grid(s, grid, x, 300, 5, rng);
    if (v.value < -3.0 * v.std_error) ++negative;
  }
  return {zero && z <= 3.0 && negative == 0,
          std::string("singleton ") + (zero ? "0" : "nonzero") + ", pair entropy " + fmt("%.4f", e.value) + " (|z| " +
              fmt("%.2f", z) + "), " + std::to_string(negative) + "/20 below -3 SE"};
}

// ---------------------------------------------------------------- SGA

Outcome sga_parameters() {
  const AscentConfig c;
  const AcquisitionSpec spec;
  const bool steps = sga_step_size(4.0, 1) == 0.8 && sga_step_size(4.0, 10) == 4.0 / 14.0;
  const bool defaults = c.step_constant == 4.0 && c.restarts == 10 && c.iterations == 100 &&
                        c.eval_replications == 1000;
  const bool wired = spec.ascent.restarts == 10 && spec.ascent.iterations == 100 &&
                     spec.ascent.eval_replications == 1000 && spec.ascent.step_constant == 4.0;
  return {steps && defaults && wired, "alpha_1 " + format_double(sga_step_size(4.0, 1)) + ", alpha_10 " +
                                          format_double(sga_step_size(4.0, 10)) + ", R=" + std::to_string(c.restarts) +
                                          " T=" + std::to_string(c.iterations) +
                                          " J=" + std::to_string(c.eval_replications)};
}

// ---------------------------------------------------------------- end to end

double fixture_value(const std::string& name) {
  std::ifstream in(std::string(BAYESKIT_FIXTURE_DIR) + "/bench_oracles.json");
  const auto fixture = nlohmann::json::parse(in);
  for (const auto& f : fixture.at("functions")) {
    if (f.at("name") == name) return f.at("value");
  }
  throw std::runtime_error("no fixture for " + name);
}

LoopConfig ei_loop(const TestFunction& f, int n0, int budget, std::uint64_t seed) {
  LoopConfig c;
  c.bounds = f.bounds;
  c.n0 = n0;
  c.budget = budget;
  c.model = default_model(f.bounds);
  c.hyper_mode.kind = HyperMode::Kind::MLE;
  c.seed = seed;
  return c;
}

struct Gaps {
  std::vector<double> ei, random;
  double secs = 0.0;
};

Gaps run_gaps(const std::string& name, int n0, int budget) {
  const auto t0 = Clock::now();
  const auto f = make_test_function(name);
  const double best = fixture_value(name);
  Gaps g;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto trace = run_loop(ei_loop(f, n0, budget, seed), f.evaluator);
    g.ei.push_back(best - trace.back().best_observed);
    g.random.push_back(best - random_search(f.bounds, budget, f.evaluator, seed).back());
  }
  g.secs = seconds_since(t0);
  return g;
}

Outcome end_to_end() {
  const Gaps sinus = run_gaps("sinus-1d", 5, 30);
  const int hits = static_cast<int>(std::count_if(sinus.ei.begin(), sinus.ei.end(), [](double g) { return g <= 1e-2; }));
  const Gaps sphere = run_gaps("sphere-2", 5, 40);
  const double sinus_ei = quantile(sinus.ei, 0.5), sinus_rs = quantile(sinus.random, 0.5);
  const double sphere_ei = quantile(sphere.ei, 0.5), sphere_rs = quantile(sphere.random, 0.5);
  const bool pass = hits >= 18 && sinus.secs < 120.0 && sphere_ei <= 0.05 && sinus_ei <= sinus_rs &&
                    sphere_ei <= sphere_rs;
  return {pass, "sinus-1d " + std::to_string(hits) + "/20 within 1e-2 in " + fmt("%.1f", sinus.secs) +
                    " s, median gap EI " + fmt("%.2e", sinus_ei) + " vs random " + fmt("%.2e", sinus_rs) +
                    "; sphere-2 median gap EI " + fmt("%.2e", sphere_ei) + " vs random " + fmt("%.2e", sphere_rs)};
}

// ---------------------------------------------------------------- determinism

std::string trace_csv(const LoopConfig& c, const TestFunction& f, double noise) {
  std::ostringstream os;
  write_trace_csv(run_loop(c, f.evaluator, noise), f.dim(), os);
  return os.str();
}

Outcome determinism() {
  const auto sinus = make_test_function("sinus-1d");
  const auto branin = make_test_function("branin-2d");
  struct Case {
    std::string label;
    LoopConfig config;
    const TestFunction* f;
    double noise;
  };
  std::vector<Case> cases;
  cases.push_back({"EI/MLE", ei_loop(sinus, 4, 12, 11), &sinus, 0.0});
  LoopConfig kg = ei_loop(sinus, 4, 8, 12);
  kg.acquisition.kind = AcquisitionKind::KG;
  kg.model.noise_variance = 0.01;
  kg.hyper_mode.options.fit_noise = true;
  cases.push_back({"KG/noisy", kg, &sinus, 0.01});
  LoopConfig cl = ei_loop(branin, 4, 8, 13);
  cl.acquisition.kind = AcquisitionKind::QEI;
  cl.acquisition.q = 2;
  cases.push_back({"qEI/joint-MC", cl, &branin, 0.0});
  LoopConfig kgcp = ei_loop(branin, 4, 8, 14);
  kgcp.acquisition.kind = AcquisitionKind::KGCP;
  kgcp.model.noise_variance = 1.0;
  cases.push_back({"KGCP/noisy", kgcp, &branin, 1.0});

  std::string detail;
  bool pass = true;
  for (const auto& c : cases) {
    const std::string a = trace_csv(c.config, *c.f, c.noise);
    const std::string b = trace_csv(c.config, *c.f, c.noise);
    const bool same = a == b && !a.empty();
    pass = pass && same;
    detail += (detail.empty() ? "" : ", ") + c.label + (same ? " identical" : " DIFFERENT");
  }
  return {pass, detail};
}

// ---------------------------------------------------------------- persistence

Outcome persistence() {
  const auto dir = std::filesystem::temp_directory_path() / "bayeskit_acceptance_store";
  std::filesystem::remove_all(dir);
  const CampaignStore store(dir);
  const AcquisitionKind kinds[] = {AcquisitionKind::EI, AcquisitionKind::KGCP, AcquisitionKind::KG,
                                   AcquisitionKind::QEI, AcquisitionKind::ES};
  Rng rng(31);
  int same = 0;
  std::string kinds_seen;
  for (int i = 0; i < 10; ++i) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(i % 3);
    Vector lo(d), hi(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      lo[k] = testutil::uniform(rng, -5.0, 0.0);
      hi[k] = lo[k] + testutil::uniform(rng, 0.5, 5.0);
    }
    LoopConfig c;
    c.bounds = Bounds(lo, hi);
    c.n0 = 3;
    c.budget = 20;
    c.model = default_model(c.bounds);
    c.hyper_mode.kind = i % 2 == 0 ? HyperMode::Kind::MLE : HyperMode::Kind::Fixed;
    c.acquisition.kind = kinds[i % 5];
    if (c.acquisition.kind == AcquisitionKind::KG) {
      c.acquisition.ascent.restarts = 3;
      c.acquisition.ascent.iterations = 20;
      c.acquisition.ascent.eval_replications = 200;
    }
    if (c.acquisition.kind == AcquisitionKind::QEI) c.acquisition.q = 2;
    if (c.acquisition.kind == AcquisitionKind::ES) c.acquisition.es_grid_size = 16;
    c.seed = 1000 + static_cast<std::uint64_t>(i);
    Campaign camp = create_campaign(c);
    const int tells = 3 + static_cast<int>(testutil::uniform(rng, 0.0, 4.0));
    for (int t = 0; t < tells; ++t) {
      const Vector x = t < 3 ? campaign_suggest(camp).points.front() : uniform_point(c.bounds, rng);
      campaign_tell(camp, x, testutil::smooth_function(x));
    }
    store.save(camp);
    Campaign back = store.load(camp.id);
    const Suggestion a = campaign_suggest(camp);
    const Suggestion b = campaign_suggest(back);
    if (a.points == b.points && a.acq_value == b.acq_value) ++same;
  }
  std::filesystem::remove_all(dir);
  return {same == 10, std::to_string(same) + "/10 campaigns suggest the same point after save/load"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"gp_oracle_equivalence", gp_oracle_equivalence},
      {"interpolation_zero_width", interpolation_zero_width},
      {"ei_closed_form_vs_monte_carlo", ei_closed_form},
      {"kg_quadrature_oracle", kg_quadrature},
      {"kg_gradient_unbiasedness", kg_gradient_unbiased},
      {"kgcp_noise_free_limit_and_monte_carlo", kgcp_limits},
      {"parallel_ei_reductions", parallel_ei_reductions},
      {"entropy_search_properties", entropy_search_properties},
      {"sga_parameter_conformance", sga_parameters},
      {"end_to_end_optimization", end_to_end},
      {"determinism", determinism},
      {"persistence_round_trip", persistence},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
