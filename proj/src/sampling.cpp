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

#include "cbo/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "cbo/format.hpp"
#include "cbo/rng.hpp"

namespace cbo {

UnitDesign latin_hypercube(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) throw std::invalid_argument("latin_hypercube: n and d must be >= 1");
  UnitDesign design{Matrix(n, d), seed, SamplingScheme::lhs};
  const double width = 1.0 / static_cast<double>(n);
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < d; ++j) {
    CounterRng rng(derive_seed(seed, "lhs-column", j));
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    for (std::size_t i = 0; i < n; ++i) {
      const double stratum = static_cast<double>(perm[i]);
      double u = (stratum + rng.uniform()) * width;
      // Rounding can land exactly on the next stratum edge.
      const double upper = (stratum + 1.0) * width;
      if (u >= upper) u = std::nextafter(upper, 0.0);
      design.points(i, j) = u;
    }
  }
  return design;
}

UnitDesign uniform_design(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) throw std::invalid_argument("uniform_design: n and d must be >= 1");
  UnitDesign design{Matrix(n, d), seed, SamplingScheme::uniform};
  CounterRng rng(derive_seed(seed, "uniform"));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) design.points(i, j) = rng.uniform();
  return design;
}

UnitDesign quasirandom_design(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) throw std::invalid_argument("quasirandom_design: n and d must be >= 1");
  // Kronecker sequence on the generalized golden ratio, with a random shift.
  double phi = 2.0;
  for (int k = 0; k < 64; ++k) phi = std::pow(1.0 + phi, 1.0 / static_cast<double>(d + 1));
  CounterRng rng(derive_seed(seed, "quasirandom-shift"));
  std::vector<double> alpha(d), shift(d);
  for (std::size_t j = 0; j < d; ++j) {
    alpha[j] = std::fmod(1.0 / std::pow(phi, static_cast<double>(j + 1)), 1.0);
    shift[j] = rng.uniform();
  }
  UnitDesign design{Matrix(n, d), seed, SamplingScheme::sobol_like_quasirandom};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double v = shift[j] + alpha[j] * static_cast<double>(i + 1);
      design.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          v - std::floor(v);
    }
  return design;
}

Matrix scale_to_bounds(const Matrix& unit_points, const ProblemSpec& spec) {
  if (static_cast<std::size_t>(unit_points.cols()) != spec.dimension)
    throw std::invalid_argument("scale_to_bounds: design has " +
                                std::to_string(unit_points.cols()) + " columns, problem " +
                                spec.name + " has dimension " + std::to_string(spec.dimension));
  Matrix out(unit_points.rows(), unit_points.cols());
  std::vector<double> row(spec.dimension);
  for (Eigen::Index i = 0; i < unit_points.rows(); ++i) {
    for (std::size_t j = 0; j < spec.dimension; ++j) {
      const Bound& b = spec.bounds[j];
      row[j] = b.lower + unit_points(i, static_cast<Eigen::Index>(j)) * (b.upper - b.lower);
    }
    const std::vector<double> snapped = clamp_and_snap(spec, row);
    for (std::size_t j = 0; j < spec.dimension; ++j)
      out(i, static_cast<Eigen::Index>(j)) = snapped[j];
  }
  return out;
}

Matrix scale_to_bounds(const UnitDesign& design, const ProblemSpec& spec) {
  return scale_to_bounds(design.points, spec);
}

Matrix to_unit(const Matrix& points, const ProblemSpec& spec) {
  if (static_cast<std::size_t>(points.cols()) != spec.dimension)
    throw std::invalid_argument("to_unit: dimension mismatch");
  Matrix out(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    for (std::size_t j = 0; j < spec.dimension; ++j) {
      const Bound& b = spec.bounds[j];
      const auto jj = static_cast<Eigen::Index>(j);
      out(i, jj) = (points(i, jj) - b.lower) / (b.upper - b.lower);
    }
  return out;
}

std::vector<double> snap_unit(const ProblemSpec& spec, std::span<const double> u) {
  std::vector<double> out(u.begin(), u.end());
  for (double& v : out) v = std::clamp(v, 0.0, 1.0);
  for (const DiscreteVar& dv : spec.discrete_vars) {
    const Bound& b = spec.bounds[dv.index];
    const double snapped = dv.snap(b.lower + out[dv.index] * (b.upper - b.lower));
    out[dv.index] = (snapped - b.lower) / (b.upper - b.lower);
  }
  return out;
}

CandidatePool candidate_pool(const ProblemSpec& spec, std::size_t m, std::uint64_t seed,
                             std::size_t iteration) {
  if (m == 0) throw std::invalid_argument("candidate_pool: m must be >= 1");
  CounterRng rng(derive_seed(seed, "candidate-pool", iteration));
  Matrix unit(m, spec.dimension);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < spec.dimension; ++j)
      unit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rng.uniform();
  return {scale_to_bounds(unit, spec), iteration, seed};
}

void write_design_csv(std::ostream& out, const Matrix& points) {
  for (Eigen::Index j = 0; j < points.cols(); ++j) out << (j ? "," : "") << "x" << (j + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j)
      out << (j ? "," : "") << format_number(points(i, j));
    out << '\n';
  }
}

}  // namespace cbo
