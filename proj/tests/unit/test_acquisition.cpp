// Copyright 2026 The cbo-bench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <random>

#include "cbo/acquisition.hpp"
#include "cbo/rng.hpp"

using namespace cbo;

TEST_CASE("penalty transform") {
  const std::vector<double> g{-1.0, 0.5};
  CHECK(penalty_transform(2.0, g, 1.0) == doctest::Approx(2.25));
  CHECK(penalty_transform(2.0, g, 2.0) == doctest::Approx(2.5));
  const std::vector<double> ok{-1.0, -0.5};
  CHECK(penalty_transform(2.0, ok, 7.0) == 2.0);
  CHECK(penalty_transform(2.0, g, 3.0) > penalty_transform(2.0, g, 2.0));
}

TEST_CASE("rho schedule") {
  CHECK(update_rho({1.0, 4}, false) == PenaltyState{1.5, 0});
  CHECK(update_rho({1.5, 2}, true) == PenaltyState{1.5, 0});
  PenaltyState s;
  for (int i = 0; i < 10; ++i) s = update_rho(s, false);
  CHECK(s.rho == 2.25);
  CHECK(s.stall_count == 0);
}

TEST_CASE("Gaussian EI") {
  CHECK(expected_improvement_gaussian(1.0, 0.0, 1.0) == doctest::Approx(1.083316).epsilon(1e-6));
  CHECK(expected_improvement_gaussian(0.0, 0.0, 1.0) == doctest::Approx(0.398942).epsilon(1e-6));
  CHECK(expected_improvement_gaussian(0.0, 1.0, 0.0) == 0.0);
  CHECK(expected_improvement_gaussian(2.0, 1.0, 0.0) == 1.0);
  // Monotone: non-increasing in mean, non-decreasing in std.
  double prev = INFINITY;
  for (double m = -3.0; m <= 3.0; m += 0.1) {
    const double v = expected_improvement_gaussian(0.0, m, 1.0);
    CHECK(v <= prev);
    CHECK(v >= 0.0);
    prev = v;
  }
  prev = 0.0;
  for (double s = 0.01; s <= 5.0; s += 0.05) {
    const double v = expected_improvement_gaussian(0.0, 0.5, s);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("Gaussian EI vs Monte Carlo (1e6 draws)") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> z;
  std::vector<double> draws(1000000);
  for (double& d : draws) d = z(gen);
  for (auto [fs, m, s] : {std::tuple{1.0, 0.0, 1.0}, {0.3, 0.5, 2.0}, {-1.0, 0.0, 0.5}}) {
    double acc = 0.0;
    for (double d : draws) acc += std::max(fs - (m + s * d), 0.0);
    CHECK(std::abs(acc / 1e6 - expected_improvement_gaussian(fs, m, s)) < 5e-3);
  }
}

TEST_CASE("bucketed EI") {
  const std::vector<double> one_edges{2.0, 3.0};
  const std::vector<double> one_probs{1.0};
  CHECK(expected_improvement_bucketed(1.0, one_edges, one_probs) == 0.0);
  const std::vector<double> e{-1.5, -0.5, 1.5, 2.5};  // midpoints -1, 0.5, 2
  const std::vector<double> p{0.5, 0.0, 0.5};
  CHECK(expected_improvement_bucketed(0.0, e, p) == doctest::Approx(0.5));
  const auto edges = equal_width_edges(-8.0, 8.0, 1000);
  const auto probs = bucketize_gaussian(0.0, 1.0, edges);
  CHECK(std::abs(expected_improvement_bucketed(1.0, edges, probs) - 1.083316) < 1e-3);
}

TEST_CASE("probability of feasibility") {
  CHECK(prob_feasible_gaussian(0.0, 1.0) == 0.5);
  CHECK(prob_feasible_gaussian(-1.0, 1.0) == doctest::Approx(0.841345).epsilon(1e-6));
  CHECK(prob_feasible_gaussian(-2.0, 0.0) == 1.0);
  CHECK(prob_feasible_gaussian(2.0, 0.0) == 0.0);
  const std::vector<double> e{-3.0, -2.0, -1.0};
  const std::vector<double> p{0.4, 0.6};
  CHECK(prob_feasible_bucketed(e, p) == 1.0);
  const auto edges = equal_width_edges(-8.0, 8.0, 1000);
  CHECK(std::abs(prob_feasible_bucketed(edges, bucketize_gaussian(0.0, 1.0, edges)) - 0.5) < 1e-6);
  CHECK(std::abs(prob_feasible_bucketed(edges, bucketize_gaussian(-1.0, 1.0, edges)) -
                 normal_cdf(1.0)) < 1e-3);
  // Straddling bucket contributes proportionally.
  const std::vector<double> e2{-1.0, 1.0};
  const std::vector<double> p2{1.0};
  CHECK(prob_feasible_bucketed(e2, p2, 0.5) == doctest::Approx(0.75));
}

TEST_CASE("log EI") {
  for (auto [fs, m, sd] : {std::tuple{1.0, 0.0, 1.0}, {0.0, 2.0, 0.5}, {-3.0, 4.0, 1.0},
                           {0.0, 29.0, 1.0}, {2.0, 1.0, 0.0}}) {
    CHECK(log_expected_improvement_gaussian(fs, m, sd) ==
          doctest::Approx(std::log(expected_improvement_gaussian(fs, m, sd))).epsilon(1e-9));
  }
  // Continuous across the far-tail switch and finite where EI underflows.
  const double lo = log_expected_improvement_gaussian(0.0, 30.0 - 1e-9, 1.0);
  const double hi = log_expected_improvement_gaussian(0.0, 30.0 + 1e-9, 1.0);
  CHECK(std::abs(lo - hi) < 1e-5);
  CHECK(expected_improvement_gaussian(0.0, 60.0, 1.0) == 0.0);
  CHECK(std::isfinite(log_expected_improvement_gaussian(0.0, 60.0, 1.0)));
  CHECK(log_expected_improvement_gaussian(0.0, 60.0, 1.0) <
        log_expected_improvement_gaussian(0.0, 50.0, 1.0));
  CHECK(log_expected_improvement_gaussian(0.0, 1.0, 0.0) == -INFINITY);
}

TEST_CASE("CEI and CEI+") {
  const std::vector<double> half{0.5};
  CHECK(cei(1.0833, half) == doctest::Approx(0.54165));
  const std::vector<double> zero{0.9, 0.0, 0.8, 0.7, 0.6, 0.5};
  CHECK(cei(1.0, zero) == 0.0);
  CHECK(cei(1.3, {}) == 1.3);
  const std::vector<double> sat{0.6};
  CHECK(cei_plus(2.0, sat) == 2.0);
  const std::vector<double> quarter{0.25};
  CHECK(cei_plus(2.0, quarter) == 1.0);
  CounterRng rng(5);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> pf(1 + rng.below(8));
    for (double& v : pf) v = rng.uniform();
    const double ei = 3.0 * rng.uniform();
    CHECK(cei_plus(ei, pf) >= cei(ei, pf) * (1.0 - 1e-12));
  }
  // Log-space and direct products agree.
  const std::vector<double> many{0.9, 0.8, 0.7, 0.6, 0.5, 0.4};
  CHECK(cei(2.0, many) == doctest::Approx(2.0 * 0.9 * 0.8 * 0.7 * 0.6 * 0.5 * 0.4).epsilon(1e-12));
}

TEST_CASE("CEI argmax invariant to a common pfeas scale") {
  CounterRng rng(11);
  std::vector<double> ei(50);
  std::vector<std::vector<double>> pf(50, std::vector<double>(3));
  for (std::size_t i = 0; i < 50; ++i) {
    ei[i] = rng.uniform();
    for (double& v : pf[i]) v = rng.uniform();
  }
  auto argmax = [&](double scale) {
    std::size_t best = 0;
    double bv = -1.0;
    for (std::size_t i = 0; i < 50; ++i) {
      std::vector<double> s = pf[i];
      for (double& v : s) v *= scale;
      const double v = cei(ei[i], s);
      if (v > bv) {
        bv = v;
        best = i;
      }
    }
    return best;
  };
  CHECK(argmax(1.0) == argmax(0.3));
}

TEST_CASE("incumbent update follows the feasibility rule") {
  Incumbent inc;
  const std::vector<double> x{0.0};
  inc = incumbent_update(inc, {1.0, {0.5}, false}, x);
  CHECK(inc.f_star == 1.0);
  CHECK_FALSE(inc.feasible_found);
  inc = incumbent_update(inc, {4.0, {-0.5}, true}, x);
  CHECK(inc.f_star == 4.0);
  CHECK(inc.feasible_found);
  inc = incumbent_update(inc, {3.0, {-0.5}, true}, x);
  inc = incumbent_update(inc, {5.0, {-0.5}, true}, x);
  inc = incumbent_update(inc, {-9.0, {0.5}, false}, x);
  CHECK(inc.f_star == 3.0);

  // Streamed vs full rescan.
  CounterRng rng(3);
  std::vector<EvalResult> evals;
  Incumbent streamed;
  for (int i = 0; i < 200; ++i) {
    const bool feas = rng.uniform() < 0.2;
    evals.push_back({rng.uniform() * 10.0, {feas ? -1.0 : 1.0}, feas});
    streamed = incumbent_update(streamed, evals.back(), x);
    double best = INFINITY;
    bool any = false;
    for (const auto& e : evals) any = any || e.feasible;
    for (const auto& e : evals)
      if (!any || e.feasible) best = std::min(best, e.f);
    CHECK(streamed.f_star == best);
    CHECK(streamed.feasible_found == any);
  }
}
