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

// Benchmark problem catalog.
//
// Errata applied in ErrataMode::corrected (verbatim evaluates the printed
// formula as-is):
//
//   jlh1            g = -x1 - x2 + 0.5 (printed x1 + x2 + 0.5 is positive on
//                   the whole box).
//   gkxwc2          the free symbol y is read as x2 in both modes; there is no
//                   other evaluable reading.
//   rc beam         constraints use b/h - 4 and 180 + 7.35 As^2/h - As*b; as
//                   printed (h/b, As*h) the set is empty because As*h <= 150.
//   spring          N in [2, 15]; with the printed N in [1.5, 2] the constraint
//                   D^2 N >= 140.45 d cannot hold anywhere in the box.
//   pressure vessel g3 = -pi R^2 L - 4/3 pi R^3 + 1296000.
//   welded beam     g3 = h - b, g4 = 6000 - Pc, g5 = delta - 0.25. Printed
//                   expressions read as "<= 0" leave no feasible point.
//   speed reducer   g8 = 5m/b - 1 (printed 5m/(B-1) - 1 is always > 0).
//   heat exchanger  g3 read as "<= 0" in both modes.
//   cantilever      g6 divides by the step inertia x_i x_{i+5}^3 / 12 instead
//                   of the segment length; with l_i = L/5 the printed g6 is a
//                   positive constant.
//
// Denominators that can vanish on the closed box are bounded away from zero
// so every value stays finite.

#include "cbo/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cbo/errors.hpp"

namespace cbo {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

double guard(double den) {
  constexpr double kTiny = 1e-12;
  if (std::abs(den) < kTiny) return den < 0.0 ? -kTiny : kTiny;
  return den;
}

double sq(double v) { return v * v; }

struct CatalogEntry {
  ProblemId id;
  std::string_view name;
  std::string_view source;
};

constexpr std::array<CatalogEntry, kProblemCount> kEntries{{
    {ProblemId::jlh1, "jlh1", "Appendix A.1"},
    {ProblemId::jlh2, "jlh2", "Appendix A.2"},
    {ProblemId::gkxwc1, "gkxwc1", "Appendix A.3"},
    {ProblemId::gkxwc2, "gkxwc2", "Appendix A.4"},
    {ProblemId::ackley2, "ackley2", "Appendix A.5"},
    {ProblemId::ackley6, "ackley6", "Appendix A.5"},
    {ProblemId::ackley10, "ackley10", "Appendix A.5"},
    {ProblemId::three_truss, "three_truss", "Appendix A.6"},
    {ProblemId::reinforced_concrete_beam, "reinforced_concrete_beam", "Appendix A.7"},
    {ProblemId::compression_spring, "compression_spring", "Appendix A.8"},
    {ProblemId::pressure_vessel, "pressure_vessel", "Appendix A.9"},
    {ProblemId::welded_beam, "welded_beam", "Appendix A.10"},
    {ProblemId::speed_reducer, "speed_reducer", "Appendix A.11"},
    {ProblemId::heat_exchanger, "heat_exchanger", "Appendix A.12"},
    {ProblemId::cantilever_beam, "cantilever_beam", "Appendix A.13"},
    {ProblemId::car_side_impact, "car_side_impact", "Appendix A.14"},
    {ProblemId::keane_bump18, "keane_bump18", "Appendix A.15"},
}};

const CatalogEntry& entry(ProblemId id) { return kEntries[static_cast<std::size_t>(id)]; }

std::vector<Bound> repeat(std::size_t n, Bound b) { return std::vector<Bound>(n, b); }

// ---------------------------------------------------------------------------
// Evaluators. x is already bounds-checked and has the right length.

double jlh_objective(double x1, double x2) {
  return std::cos(2.0 * x1) * std::cos(x2) + std::sin(x1);
}

EvalResult ackley(std::span<const double> x) {
  const double d = static_cast<double>(x.size());
  double sum_sq = 0.0, sum_cos = 0.0, sum = 0.0;
  for (double v : x) {
    sum_sq += v * v;
    sum_cos += std::cos(2.0 * kPi * v);
    sum += v;
  }
  const double f = -20.0 * std::exp(-0.2 * std::sqrt(sum_sq / d)) - std::exp(sum_cos / d) +
                   20.0 + std::exp(1.0);
  return {f, {sum, std::sqrt(sum_sq) - 5.0}, false};
}

EvalResult three_truss(std::span<const double> x) {
  constexpr double L = 100.0, P = 2.0, sigma = 2.0;
  const double x1 = x[0], x2 = x[1];
  const double den = guard(kSqrt2 * x1 * x1 + 2.0 * x1 * x2);
  return {(2.0 * kSqrt2 * x1 + x2) * L,
          {(kSqrt2 * x1 + x2) * P / den - sigma, x2 * P / den - sigma,
           P / guard(x1 + kSqrt2 * x2) - sigma},
          false};
}

// x = (As, h, b)
EvalResult reinforced_concrete_beam(std::span<const double> x, ErrataMode mode) {
  const double as = x[0], h = x[1], b = x[2];
  const double f = 29.4 * as + 0.6 * b * h;
  if (mode == ErrataMode::verbatim) {
    return {f, {h / b - 4.0, 180.0 + 7.35 * as * as / b - as * h}, false};
  }
  return {f, {b / h - 4.0, 180.0 + 7.35 * as * as / h - as * b}, false};
}

// x = (d, D, N)
EvalResult compression_spring(std::span<const double> x) {
  const double d = x[0], D = x[1], N = x[2];
  const double d4 = std::pow(d, 4);
  return {(N + 2.0) * D * d * d,
          {1.0 - D * D * D * N / (71785.0 * d4),
           (4.0 * D * D - D * d) / (12566.0 * guard(D * d * d * d - d4)) + 1.0 / (5108.0 * d * d) -
               1.0,
           1.0 - 140.45 * d / (D * D * N), (D + d) / 1.5 - 1.0},
          false};
}

// x = (Ts, Th, R, L)
EvalResult pressure_vessel(std::span<const double> x, ErrataMode mode) {
  const double ts = x[0], th = x[1], R = x[2], L = x[3];
  const double f = 0.6224 * ts * R * L + 1.7781 * th * R * R + 3.1661 * ts * ts * L +
                   19.84 * ts * ts * R;
  const double cyl = kPi * R * R * L;
  const double g3 = (mode == ErrataMode::verbatim ? cyl : -cyl) - 4.0 / 3.0 * kPi * R * R * R +
                    1296000.0;
  return {f, {-ts + 0.0193 * R, -th + 0.00954 * R, g3, L - 240.0}, false};
}

// x = (h, l, t, b)
EvalResult welded_beam(std::span<const double> x, ErrataMode mode) {
  const double h = x[0], l = x[1], t = x[2], b = x[3];
  const double R = std::sqrt(0.25 * (l * l + sq(h + t)));
  const double tau_p = 6000.0 / (kSqrt2 * h * l);
  const double tau_pp =
      6000.0 * (14.0 + 0.5 * l) * R / (2.0 * (0.707 * h * l * (l * l / 12.0 + 0.25 * sq(h + t))));
  const double tau = std::sqrt((tau_p * tau_p + tau_pp * tau_pp + l * tau_p * tau_pp) / R);
  const double sigma = 504000.0 / (t * t * b);
  const double pc = 64746.0 * (1.0 - 0.0282346 * t) * t * b * b * b;
  const double delta = 2.1952 / (t * t * t * b);
  const double f = 1.10471 * h * h * l + 0.04811 * t * b * (14.0 + l);
  if (mode == ErrataMode::verbatim) {
    return {f, {tau - 13600.0, sigma - 30000.0, b - h, pc - 6000.0, 0.25 - delta}, false};
  }
  return {f, {tau - 13600.0, sigma - 30000.0, h - b, 6000.0 - pc, delta - 0.25}, false};
}

// x = (b, m, z, L1, L2, d1, d2)
EvalResult speed_reducer(std::span<const double> x, ErrataMode mode) {
  const double b = x[0], m = x[1], z = x[2], L1 = x[3], L2 = x[4], d1 = x[5], d2 = x[6];
  const double f = 0.7854 * b * m * m * (3.3333 * z * z + 14.9334 * z - 43.0934) -
                   1.508 * b * (d1 * d1 + d2 * d2) + 7.4777 * (d1 * d1 * d1 + d2 * d2 * d2) +
                   0.7854 * (L1 * d1 * d1 + L2 * d2 * d2);
  const double g8 = mode == ErrataMode::verbatim ? 5.0 * m / (b - 1.0) - 1.0 : 5.0 * m / b - 1.0;
  return {f,
          {27.0 / (b * m * m * z) - 1.0, 397.5 / (b * m * m * z * z) - 1.0,
           1.93 * L1 * L1 * L1 / (m * z * std::pow(d1, 4)) - 1.0,
           1.93 * L2 * L2 * L2 / (m * z * std::pow(d2, 4)) - 1.0,
           std::sqrt(sq(745.0 * L1 / (m * z)) + 1.69e6) / (110.0 * d1 * d1 * d1) - 1.0,
           std::sqrt(sq(745.0 * L2 / (m * z)) + 157.5e6) / (85.0 * d2 * d2 * d2) - 1.0,
           m * z / 40.0 - 1.0, g8, b / (12.0 * m) - 1.0},
          false};
}

EvalResult heat_exchanger(std::span<const double> x) {
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3], x5 = x[4], x6 = x[5], x7 = x[6],
               x8 = x[7];
  return {x1 + x2 + x3,
          {0.0025 * (x4 + x6) - 1.0, 0.0025 * (x5 + x7 - x4) - 1.0, 0.01 * (x8 - x5) - 1.0,
           833.33252 * x4 + 100.0 * x1 - x1 * x6 - 83333.333,
           1250.0 * x5 + x2 * x4 - x2 * x7 - 125.0 * x4,
           x3 * x5 - 2500.0 * x5 - x3 * x8 + 1250000.0},
          false};
}

// x = (w1..w5, h1..h5); segment lengths l_i = L/5, deflection arm l = L.
EvalResult cantilever_beam(std::span<const double> x, ErrataMode mode) {
  constexpr double L = 100.0, P = 50000.0, E = 2.0e7, seg = L / 5.0;
  double f = 0.0;
  for (std::size_t i = 0; i < 5; ++i) f += x[i] * x[i + 5] * seg;

  std::vector<double> g;
  g.reserve(11);
  g.push_back(600.0 * P / (x[4] * x[9] * x[9]) - 14000.0);
  g.push_back(6.0 * P * (2.0 * seg) / (x[3] * x[8] * x[8]) - 14000.0);
  g.push_back(6.0 * P * (3.0 * seg) / (x[2] * x[7] * x[7]) - 14000.0);
  g.push_back(6.0 * P * (4.0 * seg) / (x[1] * x[6] * x[6]) - 14000.0);
  g.push_back(6.0 * P * (5.0 * seg) / (x[0] * x[5] * x[5]) - 14000.0);

  // Coefficients for steps 5, 4, 3, 2, 1.
  constexpr std::array<double, 5> coeff{1.0, 7.0, 19.0, 37.0, 61.0};
  double sum = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    const std::size_t step = 4 - k;
    const double denom = mode == ErrataMode::verbatim
                             ? seg
                             : x[step] * std::pow(x[step + 5], 3) / 12.0;
    sum += coeff[k] / denom;
  }
  g.push_back(P * L * L * L / (3.0 * E) * sum - 2.7);
  for (std::size_t k = 0; k < 5; ++k) {
    const std::size_t step = 4 - k;
    g.push_back(x[step + 5] / x[step] - 20.0);
  }
  return {f, std::move(g), false};
}

EvalResult car_side_impact(std::span<const double> x) {
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3], x5 = x[4], x6 = x[5], x7 = x[6],
               x8 = x[7], x9 = x[8], x10 = x[9], x11 = x[10];
  const double f =
      1.98 + 4.90 * x1 + 6.67 * x2 + 6.98 * x3 + 4.01 * x4 + 1.78 * x5 + 2.73 * x7;
  std::vector<double> g{
      1.16 - 0.3717 * x2 * x4 - 0.00931 * x2 * x10 - 0.484 * x3 * x9 + 0.01343 * x6 * x10 - 1.0,
      0.261 - 0.0159 * x1 * x2 - 0.188 * x1 * x8 - 0.019 * x2 * x7 + 0.0144 * x3 * x5 +
          0.0008757 * x5 * x10 + 0.08045 * x6 * x9 + 0.00139 * x8 * x11 +
          0.00001575 * x10 * x11 - 0.9,
      0.214 + 0.00817 * x5 - 0.131 * x1 * x8 - 0.0704 * x1 * x9 + 0.03099 * x2 * x6 -
          0.018 * x2 * x7 + 0.0208 * x3 * x8 + 0.121 * x3 * x9 - 0.00364 * x5 * x6 +
          0.0007715 * x5 * x10 - 0.0005354 * x6 * x10 + 0.00121 * x8 * x11 - 0.9,
      0.74 - 0.061 * x2 - 0.163 * x3 * x8 + 0.001232 * x3 * x10 - 0.166 * x7 * x9 +
          0.227 * x2 * x2 - 0.9,
      28.98 + 3.818 * x3 - 4.2 * x1 * x2 + 0.0207 * x5 * x10 + 6.63 * x6 * x9 - 7.7 * x7 * x8 +
          0.32 * x9 * x10 - 32.0,
      33.86 + 2.95 * x3 + 0.1792 * x10 - 5.057 * x1 * x2 - 11.0 * x2 * x8 - 0.0215 * x5 * x10 -
          9.98 * x7 * x8 + 22.0 * x8 * x9 - 32.0,
      46.36 - 9.9 * x2 - 12.9 * x1 * x8 + 0.1107 * x3 * x10 - 32.0,
      4.72 - 0.5 * x4 - 0.19 * x2 * x3 - 0.0122 * x4 * x10 + 0.009325 * x6 * x10 +
          0.000191 * x11 * x11 - 4.0,
      10.58 - 0.674 * x1 * x2 - 1.95 * x2 * x8 + 0.02054 * x3 * x10 - 0.0198 * x4 * x10 +
          0.028 * x6 * x10 - 9.9,
      16.45 - 0.489 * x3 * x7 - 0.843 * x5 * x6 + 0.0432 * x9 * x10 - 0.0556 * x9 * x11 -
          0.000786 * x11 * x11 - 15.7,
  };
  return {f, std::move(g), false};
}

EvalResult keane_bump(std::span<const double> x) {
  double sum_c4 = 0.0, prod_c2 = 1.0, weighted = 0.0, prod = 1.0, sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = std::cos(x[i]);
    sum_c4 += c * c * c * c;
    prod_c2 *= c * c;
    weighted += static_cast<double>(i + 1) * x[i] * x[i];
    prod *= x[i];
    sum += x[i];
  }
  const double f = -std::abs((sum_c4 - 2.0 * prod_c2) / guard(std::sqrt(weighted)));
  return {f, {0.75 - prod, sum - 7.5 * static_cast<double>(x.size())}, false};
}

EvalResult dispatch(const ProblemSpec& spec, std::span<const double> x) {
  const ErrataMode mode = spec.errata_mode;
  switch (spec.id) {
    case ProblemId::jlh1: {
      const double s = x[0] + x[1];
      return {x[0] * x[0] + x[1] * x[1],
              {mode == ErrataMode::verbatim ? s + 0.5 : -s + 0.5},
              false};
    }
    case ProblemId::jlh2:
      return {jlh_objective(x[0], x[1]),
              {0.25 * sq(x[0] + 5.0) + x[1] * x[1] / 100.0 - 1.0},
              false};
    case ProblemId::gkxwc1:
      return {jlh_objective(x[0], x[1]),
              {std::cos(x[0]) * std::cos(x[1]) - std::sin(x[0]) * std::sin(x[1]) - 0.5},
              false};
    case ProblemId::gkxwc2:
      return {std::sin(x[0]) + x[1], {std::sin(x[0]) * std::sin(x[1]) + 0.95}, false};
    case ProblemId::ackley2:
    case ProblemId::ackley6:
    case ProblemId::ackley10:
      return ackley(x);
    case ProblemId::three_truss:
      return three_truss(x);
    case ProblemId::reinforced_concrete_beam:
      return reinforced_concrete_beam(x, mode);
    case ProblemId::compression_spring:
      return compression_spring(x);
    case ProblemId::pressure_vessel:
      return pressure_vessel(x, mode);
    case ProblemId::welded_beam:
      return welded_beam(x, mode);
    case ProblemId::speed_reducer:
      return speed_reducer(x, mode);
    case ProblemId::heat_exchanger:
      return heat_exchanger(x);
    case ProblemId::cantilever_beam:
      return cantilever_beam(x, mode);
    case ProblemId::car_side_impact:
      return car_side_impact(x);
    case ProblemId::keane_bump18:
      return keane_bump(x);
  }
  throw std::logic_error("unhandled problem id");
}

// Offline-found feasible points (rejection sampling, see tools/feasible_search).
struct StoredPoint {
  ProblemId id;
  bool verbatim_ok;   // point is feasible in verbatim mode
  bool corrected_ok;  // point is feasible in corrected mode
  std::vector<double> x;
};

const std::vector<StoredPoint>& stored_points() {
  static const std::vector<StoredPoint> points = {
#include "reference_points.inc"
  };
  return points;
}

}  // namespace

std::string_view to_string(ProblemId id) { return entry(id).name; }

std::string_view to_string(ErrataMode mode) {
  return mode == ErrataMode::verbatim ? "verbatim" : "corrected";
}

std::optional<ProblemId> parse_problem_id(std::string_view name) {
  for (const auto& e : kEntries)
    if (e.name == name) return e.id;
  return std::nullopt;
}

std::optional<ErrataMode> parse_errata_mode(std::string_view name) {
  if (name == "verbatim") return ErrataMode::verbatim;
  if (name == "corrected") return ErrataMode::corrected;
  return std::nullopt;
}

const std::array<ProblemId, kProblemCount>& all_problem_ids() {
  static const std::array<ProblemId, kProblemCount> ids = [] {
    std::array<ProblemId, kProblemCount> out{};
    for (std::size_t i = 0; i < kProblemCount; ++i) out[i] = kEntries[i].id;
    return out;
  }();
  return ids;
}

bool has_errata(ProblemId id) {
  switch (id) {
    case ProblemId::jlh1:
    case ProblemId::reinforced_concrete_beam:
    case ProblemId::compression_spring:
    case ProblemId::pressure_vessel:
    case ProblemId::welded_beam:
    case ProblemId::speed_reducer:
    case ProblemId::cantilever_beam:
      return true;
    default:
      return false;
  }
}

ProblemSpec make_problem(ProblemId id, ErrataMode mode) {
  ProblemSpec spec{id, std::string(entry(id).name), 0, 0, {}, {}, mode,
                   std::string(entry(id).source)};
  switch (id) {
    case ProblemId::jlh1:
      spec.bounds = repeat(2, {0.0, 1.0});
      spec.n_constraints = 1;
      break;
    case ProblemId::jlh2:
      spec.bounds = {{-5.0, 0.0}, {-5.0, 5.0}};
      spec.n_constraints = 1;
      break;
    case ProblemId::gkxwc1:
    case ProblemId::gkxwc2:
      spec.bounds = repeat(2, {0.0, 6.0});
      spec.n_constraints = 1;
      break;
    case ProblemId::ackley2:
      spec.bounds = repeat(2, {-5.0, 10.0});
      spec.n_constraints = 2;
      break;
    case ProblemId::ackley6:
      spec.bounds = repeat(6, {-5.0, 10.0});
      spec.n_constraints = 2;
      break;
    case ProblemId::ackley10:
      spec.bounds = repeat(10, {-5.0, 10.0});
      spec.n_constraints = 2;
      break;
    case ProblemId::three_truss:
      spec.bounds = repeat(2, {0.0, 1.0});
      spec.n_constraints = 3;
      break;
    case ProblemId::reinforced_concrete_beam:
      spec.bounds = {{0.2, 15.0}, {5.0, 10.0}, {28.0, 40.0}};
      spec.discrete_vars = {{2, 28.0, 1.0, 13}};
      spec.n_constraints = 2;
      break;
    case ProblemId::compression_spring:
      spec.bounds = {{0.05, 1.0},
                     {0.25, 1.3},
                     mode == ErrataMode::verbatim ? Bound{1.5, 2.0} : Bound{2.0, 15.0}};
      spec.n_constraints = 4;
      break;
    case ProblemId::pressure_vessel:
      spec.bounds = {{0.0625, 6.1875}, {0.0625, 6.1875}, {10.0, 200.0}, {10.0, 200.0}};
      spec.discrete_vars = {{0, 0.0625, 0.0625, 99}, {1, 0.0625, 0.0625, 99}};
      spec.n_constraints = 4;
      break;
    case ProblemId::welded_beam:
      spec.bounds = {{0.125, 10.0}, {0.1, 15.0}, {0.1, 10.0}, {0.1, 10.0}};
      spec.n_constraints = 5;
      break;
    case ProblemId::speed_reducer:
      spec.bounds = {{2.6, 3.6}, {0.7, 0.8}, {17.0, 28.0}, {7.3, 8.3},
                     {7.3, 8.3}, {2.9, 3.9}, {5.0, 5.5}};
      spec.n_constraints = 9;
      break;
    case ProblemId::heat_exchanger:
      spec.bounds = {{100.0, 10000.0}, {1000.0, 10000.0}, {1000.0, 10000.0}};
      for (int i = 0; i < 5; ++i) spec.bounds.push_back({10.0, 1000.0});
      spec.n_constraints = 6;
      break;
    case ProblemId::cantilever_beam:
      spec.bounds = repeat(5, {1.0, 5.0});
      for (int i = 0; i < 5; ++i) spec.bounds.push_back({30.0, 65.0});
      spec.n_constraints = 11;
      break;
    case ProblemId::car_side_impact:
      spec.bounds = {{0.5, 1.5},     {0.45, 1.35},  {0.5, 1.5},   {0.5, 1.5},
                     {0.5, 1.5},     {0.5, 1.5},    {0.5, 1.5},   {0.192, 0.345},
                     {0.192, 0.345}, {-20.0, 0.0},  {-20.0, 0.0}};
      spec.n_constraints = 10;
      break;
    case ProblemId::keane_bump18:
      spec.bounds = repeat(18, {0.0, 10.0});
      spec.n_constraints = 2;
      break;
  }
  spec.dimension = spec.bounds.size();
  return spec;
}

std::vector<ProblemSpec> catalog(ErrataMode mode) {
  std::vector<ProblemSpec> out;
  out.reserve(kProblemCount);
  for (ProblemId id : all_problem_ids()) out.push_back(make_problem(id, mode));
  return out;
}

EvalResult evaluate(const ProblemSpec& spec, std::span<const double> x) {
  if (x.size() != spec.dimension) {
    std::ostringstream msg;
    msg << spec.name << ": expected " << spec.dimension << " coordinates, got " << x.size();
    throw DomainError(msg.str());
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Bound& b = spec.bounds[i];
    if (!(x[i] >= b.lower && x[i] <= b.upper)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << spec.name << ": coordinate x_" << (i + 1) << " = " << x[i] << " outside ["
          << b.lower << ", " << b.upper << "]";
      throw DomainError(msg.str());
    }
  }
  EvalResult r = dispatch(spec, x);
  r.feasible = std::all_of(r.g.begin(), r.g.end(), [](double v) { return v <= 0.0; });
  return r;
}

double DiscreteVar::snap(double v) const noexcept {
  const double k = std::clamp(std::round((v - start) / step), 0.0, static_cast<double>(count - 1));
  return value(static_cast<std::size_t>(k));
}

std::vector<double> snap_discrete(const ProblemSpec& spec, std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  for (const DiscreteVar& dv : spec.discrete_vars) out[dv.index] = dv.snap(out[dv.index]);
  return out;
}

std::vector<double> clamp_and_snap(const ProblemSpec& spec, std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::clamp(out[i], spec.bounds[i].lower, spec.bounds[i].upper);
  return snap_discrete(spec, out);
}

std::vector<double> reference_feasible_point(const ProblemSpec& spec) {
  for (const StoredPoint& p : stored_points()) {
    if (p.id != spec.id) continue;
    const bool ok = spec.errata_mode == ErrataMode::verbatim ? p.verbatim_ok : p.corrected_ok;
    if (ok) return p.x;
  }
  throw InfeasibleProblemError(spec.name + ": no feasible point in " +
                               std::string(to_string(spec.errata_mode)) +
                               " mode (empty feasible set as printed)");
}

nlohmann::json to_json(const ProblemSpec& spec) {
  nlohmann::json bounds = nlohmann::json::array();
  for (const Bound& b : spec.bounds) bounds.push_back({b.lower, b.upper});
  nlohmann::json discrete = nlohmann::json::array();
  for (const DiscreteVar& dv : spec.discrete_vars) {
    discrete.push_back({{"index", dv.index},
                        {"start", dv.start},
                        {"step", dv.step},
                        {"count", dv.count}});
  }
  return {{"id", spec.name},
          {"d", spec.dimension},
          {"G", spec.n_constraints},
          {"bounds", bounds},
          {"discrete", discrete},
          {"errata_mode", to_string(spec.errata_mode)},
          {"source", spec.source}};
}

}  // namespace cbo
