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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cbo/distribution.hpp"
#include "cbo/errors.hpp"
#include "cbo/external_ppd.hpp"
#include "cbo/ppd.hpp"
#include "cbo/problems.hpp"
#include "cbo/sampling.hpp"

using namespace cbo;

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
  return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

/// Raw-unit bucketed mean of target t at query q.
double raw_mean(const PpdPrediction& p, std::size_t q, std::size_t t) {
  const double z = bucketed_mean(p.batch.edges, p.batch.probs_for(q, t));
  return p.target_transform[t].scale.invert(z);
}

}  // namespace

TEST_CASE("bucketize_gaussian normalization, symmetry and mean") {
  const auto edges = equal_width_edges(-8.0, 8.0, 1000);
  const auto p = bucketize_gaussian(0.0, 1.0, edges);
  CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
  CHECK(std::abs(std::accumulate(p.begin(), p.begin() + 500, 0.0) - 0.5) < 1e-6);
  CHECK(std::abs(bucketed_mean(edges, p)) < 1e-4);
  // Tails fold into the end buckets.
  const auto narrow = equal_width_edges(-1.0, 1.0, 10);
  const auto q = bucketize_gaussian(0.0, 1.0, narrow);
  CHECK(q.front() == doctest::Approx(normal_cdf(-0.8)));
}

TEST_CASE("PredictiveDistribution invariants") {
  CHECK_THROWS_AS(PredictiveDistribution::bucketed({0, 1, 1}, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(PredictiveDistribution::bucketed({0, 1, 2}, {0.5, 0.6}), std::invalid_argument);
  CHECK_NOTHROW(PredictiveDistribution::bucketed({0, 1, 2}, {0.5, 0.5}));
  CHECK_THROWS_AS(PredictiveDistribution::gaussian(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("reference surrogate: single observation concentrates near it") {
  const auto s = reference_ppd_surrogate(1000);
  Matrix X(1, 2);
  X << 0.4, 0.6;
  Matrix Y(1, 1);
  Y << 3.5;
  Matrix q(1, 2);
  q << 0.9, 0.1;
  const PpdPrediction p = ppd_predict(*s, X, Y, q);
  const double width = p.batch.edges[1] - p.batch.edges[0];
  CHECK(std::abs(raw_mean(p, 0, 0) - 3.5) <= width);
}

TEST_CASE("reference surrogate: symmetric data gives the arithmetic mean at the centre") {
  const auto s = reference_ppd_surrogate(1000);
  Matrix X(4, 2);
  X << 0.3, 0.5, 0.7, 0.5, 0.5, 0.3, 0.5, 0.7;
  Matrix Y(4, 1);
  Y << 1.0, 1.0, 3.0, 3.0;
  Matrix q(1, 2);
  q << 0.5, 0.5;
  const PpdPrediction p = ppd_predict(*s, X, Y, q);
  CHECK(std::abs(raw_mean(p, 0, 0) - 2.0) < 1e-9);
}

TEST_CASE("reference surrogate: linear data interpolates within 0.05") {
  const auto s = reference_ppd_surrogate(1000);
  Matrix X(11, 1);
  Matrix Y(11, 1);
  for (int i = 0; i <= 10; ++i) {
    X(i, 0) = 0.1 * i;
    Y(i, 0) = 0.1 * i;
  }
  Matrix q(1, 1);
  q << 0.55;
  const PpdPrediction p = ppd_predict(*s, X, Y, q);
  CHECK(std::abs(raw_mean(p, 0, 0) - 0.55) < 0.05);
}

TEST_CASE("reference surrogate ranks ackley2 sensibly") {
  const ProblemSpec spec = make_problem(ProblemId::ackley2);
  const UnitDesign des = latin_hypercube(20, 2, 2024);
  const Matrix raw = scale_to_bounds(des, spec);
  Matrix Y(20, 1);
  for (Eigen::Index i = 0; i < 20; ++i)
    Y(i, 0) = evaluate(spec, std::vector<double>{raw(i, 0), raw(i, 1)}).f;
  Matrix grid(100, 2);
  std::vector<double> truth;
  for (int a = 0; a < 10; ++a)
    for (int b = 0; b < 10; ++b) {
      grid(a * 10 + b, 0) = (a + 0.5) / 10.0;
      grid(a * 10 + b, 1) = (b + 0.5) / 10.0;
      const Matrix r = scale_to_bounds(Matrix(grid.row(a * 10 + b)), spec);
      truth.push_back(evaluate(spec, std::vector<double>{r(0, 0), r(0, 1)}).f);
    }
  const auto s = reference_ppd_surrogate(1000);
  const PpdPrediction p = ppd_predict(*s, des.points, Y, grid);
  std::vector<double> means;
  for (std::size_t q = 0; q < 100; ++q) means.push_back(raw_mean(p, q, 0));
  CHECK(pearson(ranks(means), ranks(truth)) > 0.5);
}

TEST_CASE("one inference per call regardless of target count; model stays frozen") {
  const ProblemSpec spec = make_problem(ProblemId::cantilever_beam, ErrataMode::corrected);
  const UnitDesign des = latin_hypercube(20, spec.dimension, 5);
  const Matrix raw = scale_to_bounds(des, spec);
  Dataset data(spec.dimension, spec.n_constraints);
  for (Eigen::Index i = 0; i < 20; ++i) {
    const std::vector<double> x(raw.row(i).data(), raw.row(i).data() + raw.cols());
    data.append(std::span<const double>(des.points.row(i).data(), spec.dimension), x,
                evaluate(spec, x));
  }
  const auto s = reference_ppd_surrogate();
  const std::uint64_t fp = s->state_fingerprint();
  const std::size_t before = s->inference_call_count();
  const Matrix pool = uniform_design(50, spec.dimension, 9).points;
  const PpdPrediction p = ppd_predict(*s, data, PpdTargets::objective_and_constraints, pool);
  CHECK(s->inference_call_count() == before + 1);
  CHECK(p.batch.n_targets == 12);
  CHECK(p.batch.n_buckets() == 1000);
  for (std::size_t q = 0; q < 50; ++q)
    for (std::size_t t = 0; t < 12; ++t) {
      const auto pr = p.batch.probs_for(q, t);
      CHECK(std::abs(std::accumulate(pr.begin(), pr.end(), 0.0) - 1.0) < 1e-9);
    }
  ppd_predict(*s, data, PpdTargets::objective_only, pool);
  CHECK(s->inference_call_count() == before + 2);
  CHECK(s->state_fingerprint() == fp);
}

TEST_CASE("empty dataset is a precondition error") {
  const auto s = reference_ppd_surrogate();
  CHECK_THROWS_AS(ppd_predict(*s, Matrix(0, 2), Matrix(0, 1), Matrix(1, 2)), std::invalid_argument);
  CHECK_THROWS_AS(reference_ppd_surrogate(5), std::invalid_argument);
}

namespace {

PpdPrediction probe(const PpdSurrogate& s, std::size_t targets = 2) {
  Matrix X(3, 2);
  X << 0.1, 0.2, 0.5, 0.5, 0.9, 0.1;
  Matrix Y(3, static_cast<Eigen::Index>(targets));
  for (Eigen::Index t = 0; t < Y.cols(); ++t) Y.col(t) << 1.0, 2.0 + t, -1.0;
  Matrix q(4, 2);
  q.setConstant(0.3);
  return ppd_predict(s, X, Y, q, 50);
}

std::string fake(const std::string& args) { return std::string(CBO_FAKE_PREDICTOR) + " " + args; }

}  // namespace

TEST_CASE("external predictor: uniform round trip") {
  ExternalPpdSurrogate s(fake("uniform"));
  const PpdPrediction p = probe(s);
  CHECK(p.batch.n_query == 4);
  for (std::size_t q = 0; q < 4; ++q)
    for (std::size_t t = 0; t < 2; ++t)
      for (double v : p.batch.probs_for(q, t)) CHECK(v == doctest::Approx(1.0 / 50.0));
  CHECK(s.inference_call_count() == 1);
  probe(s);  // the child is reused
  CHECK(s.inference_call_count() == 2);
  CHECK_NOTHROW(s.handshake(3));
}

TEST_CASE("external predictor: protocol violations raise InferenceError") {
  for (const char* mode : {"bad_sum", "bad_shape", "garbage"}) {
    ExternalPpdSurrogate s(fake(mode));
    CHECK_THROWS_AS(probe(s), InferenceError);
  }
  ExternalPpdSurrogate s(fake("bad_sum"));
  try {
    probe(s);
  } catch (const InferenceError& e) {
    CHECK(std::string(e.what()).find("sum to 0.9") != std::string::npos);
  }
}

TEST_CASE("external predictor: crash and timeout diagnostics") {
  ExternalPpdSurrogate dying(fake("die_after 1"));
  CHECK_NOTHROW(probe(dying));
  try {
    probe(dying);
    FAIL("expected InferenceError");
  } catch (const InferenceError& e) {
    CHECK(std::string(e.what()).find("status 3") != std::string::npos);
  }
  ExternalPpdSurrogate slow(fake("slow 2000"), std::chrono::milliseconds(100));
  CHECK_THROWS_WITH_AS(probe(slow), doctest::Contains("timed out"), InferenceError);
  ExternalPpdSurrogate missing("/nonexistent/predictor");
  CHECK_THROWS_AS(probe(missing), InferenceError);
}
