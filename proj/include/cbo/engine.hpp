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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbo/acquisition.hpp"
#include "cbo/dataset.hpp"
#include "cbo/gp.hpp"
#include "cbo/ppd.hpp"
#include "cbo/problems.hpp"
#include "cbo/sampling.hpp"

namespace cbo {

enum class SurrogatePath { gp, ppd };

std::string_view to_string(SurrogatePath path);
std::string_view to_string(ConstraintMode mode);

struct MethodConfig {
  std::string name;
  SurrogatePath surrogate_path = SurrogatePath::gp;
  ConstraintMode constraint_mode = ConstraintMode::cei;
  std::size_t pool_size = 1000;
  std::size_t n_init = 20;
  std::size_t n_iter = 200;
  std::size_t restarts = 8;        // GP hyperparameter multi-starts
  std::size_t refine_starts = 5;   // pattern-search starts from the pool
  std::size_t bucket_count = kDefaultBucketCount;
  std::uint64_t seed = 0;
};

/// The six canonical methods: gp_pen, gp_cei, gp_cei_plus, ppd_pen,
/// ppd_cei, ppd_cei_plus.
const std::vector<MethodConfig>& method_registry();
std::optional<MethodConfig> find_method(std::string_view name);

struct TraceRecord {
  std::size_t iteration = 0;  // 0 for initial-design rows, k for BO step k
  std::vector<double> x;      // problem units
  double f = 0.0;
  std::vector<double> g;
  bool feasible = false;
  double incumbent_f = 0.0;   // feasibility-rule incumbent after this row
  double rho = 0.0;           // penalty factor after this row; NaN otherwise
  double wall_ms = 0.0;       // cumulative, monotonic clock
};

struct TrialTrace {
  std::string problem;
  std::string method;
  std::uint64_t seed = 0;
  ErrataMode errata_mode = ErrataMode::verbatim;
  std::string started_at;  // ISO-8601 UTC
  std::size_t dimension = 0;
  std::size_t n_constraints = 0;
  std::vector<TraceRecord> records;
  std::vector<std::size_t> degraded_iterations;  // GP fallbacks to a random point
  std::size_t gp_fits = 0;
  std::size_t inference_calls = 0;

  /// Whether any record up to and including row i is feasible.
  bool feasible_by(std::size_t row) const;
  double total_ms() const { return records.empty() ? 0.0 : records.back().wall_ms; }
};

/// State carried across iterations of one trial on the GP path.
struct GpTrialState {
  std::vector<std::optional<GpHyperparameters>> warm;  // per model (objective first)
};

struct NextEval {
  std::vector<double> x;       // problem units, in bounds and snapped
  std::vector<double> unit_x;  // the same point in the unit cube
  double acquisition = 0.0;
  bool degraded = false;       // GP failed; x is a random pool candidate
  std::size_t gp_fits = 0;
  std::size_t inference_calls = 0;
};

struct AcquisitionContext {
  const ProblemSpec& spec;
  const Dataset& data;
  ConstraintMode mode;
  const Matrix& pool_unit;       // m x d candidates in the unit cube
  const PenaltyState& penalty;   // used by penalty mode
  const Incumbent& incumbent;    // used by cei / cei_plus
  std::uint64_t seed;            // per-iteration stream key
};

/// GP branch: 1 fit (penalty) or G + 1 fits (cei, cei_plus), pool argmax,
/// then pattern-search refinement from the top starts.
NextEval next_eval_gp(const AcquisitionContext& ctx, std::size_t restarts = 8,
                      std::size_t refine_starts = 5, GpTrialState* state = nullptr);

/// PPD branch: exactly one inference on the pool, pool argmax, no refinement.
NextEval next_eval_ppd(const AcquisitionContext& ctx, const PpdSurrogate& surrogate,
                       std::size_t bucket_count = kDefaultBucketCount);

/// Runs n_init initial evaluations (rows of init_design, problem units)
/// followed by method.n_iter BO iterations. The PPD path uses surrogate
/// when given, otherwise a reference surrogate.
TrialTrace run_trial(const ProblemSpec& spec, const MethodConfig& method, const Matrix& init_design,
                     const PpdSurrogate* surrogate = nullptr);

/// Trace CSV: "# key=value" metadata lines, then the header
/// iteration,x_1..x_d,f,g_1..g_G,feasible,incumbent_f,rho,wall_ms.
void write_trace_csv(std::ostream& out, const TrialTrace& trace);
TrialTrace read_trace_csv(std::istream& in);

}  // namespace cbo
