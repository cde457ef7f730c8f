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

#include "cbo/errors.hpp"
#include "cbo/problems.hpp"
#include "cbo/sampling.hpp"

using namespace cbo;

TEST_CASE("catalog has 17 problems with consistent shapes") {
  for (ErrataMode mode : {ErrataMode::verbatim, ErrataMode::corrected}) {
    const auto specs = catalog(mode);
    REQUIRE(specs.size() == kProblemCount);
    for (const ProblemSpec& s : specs) {
      CHECK(s.bounds.size() == s.dimension);
      CHECK(parse_problem_id(s.name) == s.id);
      std::vector<double> mid(s.dimension);
      for (std::size_t j = 0; j < s.dimension; ++j)
        mid[j] = 0.5 * (s.bounds[j].lower + s.bounds[j].upper);
      const EvalResult r = evaluate(s, snap_discrete(s, mid));
      CHECK(r.g.size() == s.n_constraints);
      CHECK(std::isfinite(r.f));
      for (double g : r.g) CHECK(std::isfinite(g));
    }
  }
}

TEST_CASE("dimensions and constraint counts") {
  const auto dims = [](ProblemId id) {
    const ProblemSpec s = make_problem(id);
    return std::pair{s.dimension, s.n_constraints};
  };
  CHECK(dims(ProblemId::jlh2) == std::pair<std::size_t, std::size_t>{2, 1});
  CHECK(dims(ProblemId::ackley10) == std::pair<std::size_t, std::size_t>{10, 2});
  CHECK(dims(ProblemId::compression_spring) == std::pair<std::size_t, std::size_t>{3, 4});
  CHECK(dims(ProblemId::cantilever_beam) == std::pair<std::size_t, std::size_t>{10, 11});
  CHECK(dims(ProblemId::car_side_impact) == std::pair<std::size_t, std::size_t>{11, 10});
  CHECK(dims(ProblemId::keane_bump18) == std::pair<std::size_t, std::size_t>{18, 2});
}

TEST_CASE("out-of-bounds and wrong-length inputs raise DomainError") {
  const ProblemSpec s = make_problem(ProblemId::jlh2);
  const std::vector<double> bad{s.bounds[0].upper + 1.0, s.bounds[1].lower};
  CHECK_THROWS_AS(evaluate(s, bad), DomainError);
  try {
    evaluate(s, bad);
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("x_1") != std::string::npos);
  }
  const std::vector<double> short_x{0.0};
  CHECK_THROWS_AS(evaluate(s, short_x), DomainError);
}

TEST_CASE("three-bar truss at its published optimum") {
  const ProblemSpec s = make_problem(ProblemId::three_truss);
  const std::vector<double> x{0.78867513, 0.40824829};
  const EvalResult r = evaluate(s, x);
  CHECK(r.f == doctest::Approx(263.8958).epsilon(1e-5));
  CHECK(r.g[0] == doctest::Approx(0.0).epsilon(1e-4));
}

TEST_CASE("ackley at the origin is zero and feasible") {
  const ProblemSpec s = make_problem(ProblemId::ackley6);
  const std::vector<double> x(6, 0.0);
  const EvalResult r = evaluate(s, x);
  CHECK(std::abs(r.f) < 1e-12);
  CHECK(r.feasible);
}

TEST_CASE("pressure vessel errata flips the volume term") {
  const std::vector<double> x{1.0, 0.5, 50.0, 100.0};
  const EvalResult v = evaluate(make_problem(ProblemId::pressure_vessel, ErrataMode::verbatim), x);
  const EvalResult c = evaluate(make_problem(ProblemId::pressure_vessel, ErrataMode::corrected), x);
  const double cyl = M_PI * 50.0 * 50.0 * 100.0;
  CHECK(v.g[2] - c.g[2] == doctest::Approx(2.0 * cyl));
  CHECK(v.f == c.f);
}

TEST_CASE("discrete snapping maps to the nearest grid value") {
  const ProblemSpec s = make_problem(ProblemId::pressure_vessel);
  REQUIRE(s.discrete_vars.size() == 2);
  const std::vector<double> x{1.03, 0.095, 50.0, 100.0};
  const auto y = snap_discrete(s, x);
  CHECK(y[0] == 1.0);
  CHECK(y[1] == 0.125);
  CHECK(y[2] == 50.0);
  const ProblemSpec rc = make_problem(ProblemId::reinforced_concrete_beam, ErrataMode::corrected);
  REQUIRE(rc.discrete_vars.size() == 1);
  const auto z = clamp_and_snap(rc, std::vector<double>{10.0, 7.0, 100.0});
  CHECK(z[2] == 40.0);
}

TEST_CASE("reference points are feasible where stored, errors otherwise") {
  for (ErrataMode mode : {ErrataMode::verbatim, ErrataMode::corrected}) {
    for (const ProblemSpec& s : catalog(mode)) {
      try {
        const auto x = reference_feasible_point(s);
        CHECK_MESSAGE(evaluate(s, x).feasible, s.name);
      } catch (const InfeasibleProblemError& e) {
        CHECK(mode == ErrataMode::verbatim);
        CHECK(std::string(e.what()).find(s.name) != std::string::npos);
      }
    }
  }
  // Every problem has a feasible point once errata are applied.
  for (const ProblemSpec& s : catalog(ErrataMode::corrected))
    CHECK_NOTHROW(reference_feasible_point(s));
}

TEST_CASE("json export carries bounds and metadata") {
  const auto j = to_json(make_problem(ProblemId::speed_reducer, ErrataMode::corrected));
  CHECK(j["id"] == "speed_reducer");
  CHECK(j["d"] == 7);
  CHECK(j["bounds"].size() == 7);
  CHECK(j["errata_mode"] == "corrected");
}
