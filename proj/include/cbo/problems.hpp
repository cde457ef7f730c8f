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

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cbo {

/// The 17 constrained benchmark experiments (15 problems, Ackley at 3 sizes).
enum class ProblemId {
  jlh1,
  jlh2,
  gkxwc1,
  gkxwc2,
  ackley2,
  ackley6,
  ackley10,
  three_truss,
  reinforced_concrete_beam,
  compression_spring,
  pressure_vessel,
  welded_beam,
  speed_reducer,
  heat_exchanger,
  cantilever_beam,
  car_side_impact,
  keane_bump18,
};

inline constexpr std::size_t kProblemCount = 17;

/// Several formulas are ambiguous or infeasible exactly as printed.
/// `verbatim` evaluates them literally; `corrected` applies the errata
/// documented in problems.cpp and the README.
enum class ErrataMode { verbatim, corrected };

struct Bound {
  double lower;
  double upper;
};

/// A coordinate restricted to the grid start + k * step, k = 0 .. count-1.
struct DiscreteVar {
  std::size_t index;
  double start;
  double step;
  std::size_t count;

  double value(std::size_t k) const noexcept { return start + static_cast<double>(k) * step; }

  /// Nearest allowed value.
  double snap(double v) const noexcept;
};

struct ProblemSpec {
  ProblemId id;
  std::string name;
  std::size_t dimension;
  std::size_t n_constraints;
  std::vector<Bound> bounds;
  std::vector<DiscreteVar> discrete_vars;
  ErrataMode errata_mode;
  std::string source;  // appendix subsection label, e.g. "Appendix A.9"
};

struct EvalResult {
  double f;
  std::vector<double> g;  // g_i <= 0 means satisfied
  bool feasible;
};

std::string_view to_string(ProblemId id);
std::string_view to_string(ErrataMode mode);
std::optional<ProblemId> parse_problem_id(std::string_view name);
std::optional<ErrataMode> parse_errata_mode(std::string_view name);

/// Every problem in catalog order.
const std::array<ProblemId, kProblemCount>& all_problem_ids();

ProblemSpec make_problem(ProblemId id, ErrataMode mode = ErrataMode::verbatim);
std::vector<ProblemSpec> catalog(ErrataMode mode = ErrataMode::verbatim);

/// Evaluates objective and the full constraint vector. Throws DomainError
/// naming the first coordinate outside the box.
EvalResult evaluate(const ProblemSpec& spec, std::span<const double> x);

/// Replaces each discrete coordinate by its nearest allowed value.
std::vector<double> snap_discrete(const ProblemSpec& spec, std::span<const double> x);

/// Clamps into the box, then snaps. Used by samplers and local search.
std::vector<double> clamp_and_snap(const ProblemSpec& spec, std::span<const double> x);

/// A stored point known to be feasible under spec.errata_mode. Throws
/// InfeasibleProblemError for problems whose feasible set is empty as printed.
std::vector<double> reference_feasible_point(const ProblemSpec& spec);

/// Whether the errata toggle changes this problem at all.
bool has_errata(ProblemId id);

nlohmann::json to_json(const ProblemSpec& spec);

}  // namespace cbo
