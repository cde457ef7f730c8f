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

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cbo/problems.hpp"
#include "cbo/types.hpp"

namespace cbo {

enum class SamplingScheme { lhs, sobol_like_quasirandom, uniform };

/// n x d points in the unit cube.
struct UnitDesign {
  Matrix points;
  std::uint64_t seed = 0;
  SamplingScheme scheme = SamplingScheme::lhs;
};

struct CandidatePool {
  Matrix points;  // problem units, clamped and snapped
  std::size_t iteration = 0;
  std::uint64_t seed = 0;
};

/// Random-within-stratum Latin hypercube. Throws std::invalid_argument when
/// n or d is zero.
UnitDesign latin_hypercube(std::size_t n, std::size_t d, std::uint64_t seed);

/// Plain uniform design, used for rejection sampling and brute-force scans.
UnitDesign uniform_design(std::size_t n, std::size_t d, std::uint64_t seed);

/// Shifted Kronecker (R_d) low-discrepancy sequence.
UnitDesign quasirandom_design(std::size_t n, std::size_t d, std::uint64_t seed);

/// Affine map into the problem box followed by discrete snapping.
Matrix scale_to_bounds(const UnitDesign& design, const ProblemSpec& spec);
Matrix scale_to_bounds(const Matrix& unit_points, const ProblemSpec& spec);

/// Inverse affine map (no snapping).
Matrix to_unit(const Matrix& points, const ProblemSpec& spec);

/// Maps one unit-cube point to problem units, snapped, and back.
std::vector<double> snap_unit(const ProblemSpec& spec, std::span<const double> u);

/// m uniform in-bounds candidates from a stream keyed by (seed, iteration).
CandidatePool candidate_pool(const ProblemSpec& spec, std::size_t m, std::uint64_t seed,
                             std::size_t iteration);

/// CSV with header x1..xd, one row per point, 17 significant digits.
void write_design_csv(std::ostream& out, const Matrix& points);

}  // namespace cbo
