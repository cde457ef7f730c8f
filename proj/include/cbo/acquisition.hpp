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
#include <limits>
#include <span>
#include <vector>

#include "cbo/distribution.hpp"
#include "cbo/problems.hpp"

namespace cbo {

enum class ConstraintMode { penalty, cei, cei_plus };

/// Quadratic-penalty schedule state.
struct PenaltyState {
  double rho = 1.0;
  std::size_t stall_count = 0;  // iterations since the incumbent last improved

  bool operator==(const PenaltyState&) const = default;
};

inline constexpr std::size_t kStallLimit = 5;
inline constexpr double kRhoGrowth = 1.5;

/// Best observation under the feasibility rule.
struct Incumbent {
  double f_star = std::numeric_limits<double>::infinity();
  bool feasible_found = false;
  std::vector<double> location;

  bool operator==(const Incumbent&) const = default;
};

/// f + rho * sum max(0, g_i)^2.
double penalty_transform(double f, std::span<const double> g, double rho);

/// Improvement resets the stall counter; the fifth consecutive stall
/// multiplies rho by 1.5 and resets the counter.
PenaltyState update_rho(PenaltyState state, bool improved);

double expected_improvement_gaussian(double f_star, double mean, double std);
/// log of expected_improvement_gaussian, accurate where EI underflows.
double log_expected_improvement_gaussian(double f_star, double mean, double std);
/// Midpoint rule over buckets: sum_k p_k max(0, f_star - c_k).
double expected_improvement_bucketed(double f_star, std::span<const double> edges,
                                     std::span<const double> probs);
double expected_improvement(double f_star, const PredictiveDistribution& d);

/// P(g <= 0) for g ~ N(g_mean, g_std^2); indicator when g_std = 0.
double prob_feasible_gaussian(double g_mean, double g_std);
/// Mass strictly below the threshold plus the proportional share of the
/// bucket that straddles it.
double prob_feasible_bucketed(std::span<const double> edges, std::span<const double> probs,
                              double threshold = 0.0);
double prob_feasible(const PredictiveDistribution& d, double threshold = 0.0);


/// ei * prod pfeas_i (log-space product for five or more constraints).
double cei(double ei, std::span<const double> pfeas);
/// ei * prod min(1, 2 pfeas_i).
double cei_plus(double ei, std::span<const double> pfeas);

/// Feasible points beat infeasible ones; among equals, lower f wins. Before
/// any feasible observation f_star is the unconstrained minimum.
Incumbent incumbent_update(const Incumbent& inc, const EvalResult& eval, std::span<const double> x);

}  // namespace cbo
