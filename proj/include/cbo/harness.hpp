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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cbo/engine.hpp"
#include "cbo/problems.hpp"

namespace cbo {

inline constexpr std::string_view kCodeVersion = "1.0.0";
inline constexpr std::string_view kDefaultOutDir = "cbo_results";

/// Fully resolved experiment settings.
struct ExperimentConfig {
  std::vector<std::string> problems;  // canonical ids, catalog order by default
  std::vector<std::string> methods;   // registry names
  std::size_t n_trials = 50;
  std::size_t n_init = 20;
  std::size_t n_iter = 200;
  std::size_t pool = 1000;
  std::uint64_t seed = 0;
  ErrataMode errata = ErrataMode::corrected;
  std::size_t workers = 1;
  std::filesystem::path out_dir{std::string(kDefaultOutDir)};
  std::string predictor_cmd;  // empty: built-in reference PPD surrogate
  std::string budget;         // report budget, "iteration:k" or "runtime:fastest"

  /// Fields that determine trial content (excludes workers, out_dir, budget).
  nlohmann::json semantic_json() const;
  /// Hex digest of semantic_json().
  std::string hash() const;
  /// Everything, for echoing the effective configuration.
  nlohmann::json to_json() const;
};

/// All problems, all methods, out_dir from CBO_BENCH_OUT when set.
ExperimentConfig default_config();

/// Applies one setting by key (config-file key or long flag name without the
/// leading dashes). Throws ConfigError on unknown keys or bad values.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Reads a flat "key = value" file ('#' and ';' comments, [section] headers
/// ignored) and applies each setting.
void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

/// Checks ranges and ids. Throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

struct BudgetSpec {
  enum class Kind { iteration, runtime_fastest, runtime_fixed } kind = Kind::iteration;
  std::optional<std::size_t> iteration;  // none: the final iteration
  double runtime_ms = 0.0;               // for runtime_fixed (may be inf)
};

/// "iteration:k", "iteration:final", "runtime:fastest", "runtime:<ms>",
/// "runtime:inf". Throws ConfigError.
BudgetSpec parse_budget(std::string_view text);

/// Per-trial seed shared by every method (drives the initial design).
std::uint64_t trial_seed(std::uint64_t base_seed, std::string_view problem, std::size_t trial);

/// Per-method sub-stream of a trial seed.
std::uint64_t method_seed(std::uint64_t trial_seed, std::string_view method);

/// The shared initial design of one problem x trial, in problem units.
Matrix initial_design(const ProblemSpec& spec, std::size_t n_init, std::uint64_t trial_seed);

enum class TrialStatus { pending, done, failed, skipped };
std::string_view to_string(TrialStatus s);

struct ManifestEntry {
  std::string problem;
  std::string method;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  TrialStatus status = TrialStatus::pending;
  std::string trace;  // path relative to the store root
  std::string error;
};

struct Manifest {
  std::string config_hash;
  std::string code_version;
  nlohmann::json config;
  std::vector<ManifestEntry> entries;

  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
  ManifestEntry* find(std::string_view problem, std::string_view method, std::size_t trial);
};

std::filesystem::path manifest_path(const std::filesystem::path& out_dir);
std::filesystem::path trace_path(const std::filesystem::path& out_dir, std::string_view problem,
                                 std::string_view method, std::size_t trial);
std::filesystem::path design_path(const std::filesystem::path& out_dir, std::string_view problem,
                                  std::size_t trial);

Manifest read_manifest(const std::filesystem::path& out_dir);

/// Writes via a temporary file and rename, so readers never see a torn file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

struct RunSummary {
  std::size_t scheduled = 0;
  std::size_t executed = 0;
  std::size_t reused = 0;  // already done in the store
  std::size_t failed = 0;
  std::size_t skipped = 0;
  int exit_code() const { return failed + skipped > 0 ? 1 : 0; }
};

/// Runs (or resumes) every problem x trial x method. Each problem x trial
/// gets one initial design shared by all methods. Trials run on a bounded
/// worker pool; the calling thread is the only writer of the store. Setting
/// *stop makes workers finish their current trial; remaining trials are
/// recorded as skipped. Throws ConfigError if the store belongs to a
/// different configuration or the external predictor handshake fails.
RunSummary run_experiment(const ExperimentConfig& cfg, std::ostream& log,
                          const std::atomic<bool>* stop = nullptr);

/// Traces of the requested problems x methods, in config order (problem,
/// method, trial). Throws ConfigError listing absent or unfinished trials.
std::vector<TrialTrace> load_traces(const std::filesystem::path& out_dir,
                                    const std::vector<std::string>& problems,
                                    const std::vector<std::string>& methods);

enum class ReportKind { feasibility, fixed_iteration, fixed_runtime, ranking, pareto };
std::optional<ReportKind> parse_report_kind(std::string_view name);
std::string_view to_string(ReportKind kind);

struct ReportOutput {
  std::filesystem::path csv;
  std::filesystem::path json;
};

/// Writes <out>/reports/<kind>.csv and .json from the store content. An
/// empty problems/methods list means everything recorded in the manifest.
ReportOutput write_report(const std::filesystem::path& out_dir, ReportKind kind,
                          std::vector<std::string> problems, std::vector<std::string> methods,
                          const std::optional<BudgetSpec>& budget = std::nullopt);

}  // namespace cbo
