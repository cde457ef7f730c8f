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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbo/engine.hpp"
#include "cbo/types.hpp"

namespace cbo {

/// Outcome of one trial: the best feasible objective value (none if the trial
/// never found a feasible point) and the total wall time.
struct TrialOutcome {
  std::optional<double> best_value;
  double total_ms = 0.0;
};

/// problems x methods grid of per-trial outcomes.
struct ResultMatrix {
  std::vector<std::string> problems;
  std::vector<std::string> methods;
  std::vector<std::vector<std::vector<TrialOutcome>>> cells;  // [problem][method][trial]

  const std::vector<TrialOutcome>& cell(std::size_t p, std::size_t m) const { return cells[p][m]; }
};

/// Groups traces into a matrix with the given row and column order. Throws
/// std::invalid_argument when a cell is empty or trial counts differ across
/// methods within a problem.
ResultMatrix build_result_matrix(std::span<const TrialTrace> traces,
                                 const std::vector<std::string>& problems,
                                 const std::vector<std::string>& methods);

TrialOutcome trial_outcome(const TrialTrace& trace);

/// 100 * (#trials whose final incumbent is feasible) / #trials.
double feasibility_ratio(std::span<const TrialTrace> traces);

/// Holm step-down adjustment, returned in the input order.
std::vector<double> holm_adjust(std::span<const double> pvals);

/// Average ranks (1-based, ties share the mean rank) of values, smallest first.
std::vector<double> average_ranks(std::span<const double> values);

struct FriedmanResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::vector<double> mean_ranks;  // per method
};

/// values: rows are problems (blocks), columns are methods. Chi-square
/// approximation with the usual tie correction; all-tied input gives
/// statistic 0 and p = 1.
FriedmanResult friedman_test(const Matrix& values, bool lower_is_better = true);

/// Two-sided Wilcoxon signed-rank p-value for paired samples. Zero
/// differences are dropped; if none remain, p = 1. Exact permutation
/// distribution (midranks for ties) for n <= 25, otherwise the normal
/// approximation with tie correction and no continuity correction.
double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

enum class RankMetric { performance, time };

struct RankReport {
  RankMetric metric = RankMetric::performance;
  double alpha = 0.05;
  std::vector<std::string> methods;
  std::vector<std::string> problems;
  Matrix ranks;                     // problems x methods, per-problem ranks
  std::vector<double> mean_ranks;   // per method
  double friedman_statistic = 0.0;
  double friedman_p = 1.0;
  bool friedman_significant = false;
  Matrix pairwise_p;                // methods x methods, raw Wilcoxon p-values
  Matrix pairwise_p_adjusted;       // Holm-adjusted over all unordered pairs
  std::vector<std::vector<std::size_t>> cliques;  // method indices, by mean rank
};

/// Per-problem ranks of the per-cell median outcome. For performance, a cell
/// whose median trial found no feasible point ranks after every cell with a
/// feasible median; such cells are ordered by their feasible fraction. Then a
/// Friedman gate, pairwise Wilcoxon tests on the rank vectors with Holm
/// adjustment, and cliques: maximal runs of methods (in mean-rank order) with
/// no significant pair. A non-significant Friedman test yields one clique.
RankReport critical_difference_ranking(const ResultMatrix& matrix, RankMetric metric,
                                       double alpha = 0.05);

struct BudgetSummary {
  std::string problem;
  std::string method;
  std::size_t n_trials = 0;
  std::size_t n_feasible = 0;
  std::size_t n_infeasible = 0;
  double min = 0.0;  // statistics over feasible trials only; NaN when none
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double budget = 0.0;  // iteration k, or wall time in ms
  std::vector<std::optional<double>> per_trial;  // incumbent per trial, in trace order
};

/// Incumbent after BO iteration k (k = 0: best of the initial design), per
/// problem x method, in order of first appearance.
std::vector<BudgetSummary> fixed_iteration_report(std::span<const TrialTrace> traces,
                                                  std::size_t k);

/// Incumbent at the last row completed within the time budget. Without an
/// explicit budget, each problem's budget is the total time of its fastest
/// method, where a method's time is its slowest trial.
std::vector<BudgetSummary> fixed_runtime_report(std::span<const TrialTrace> traces,
                                                std::optional<double> budget_ms = std::nullopt);

/// Non-dominated sorting of (time, value) pairs, both minimized. Rank 1 is
/// the non-dominated front.
std::vector<std::size_t> pareto_rank(std::span<const std::pair<double, double>> points);

/// Linear-interpolation quantile of sorted data (q in [0, 1]).
double quantile_sorted(std::span<const double> sorted, double q);

double median_of(std::vector<double> values);

nlohmann::json to_json(const RankReport& report);
nlohmann::json to_json(const BudgetSummary& summary);

}  // namespace cbo
