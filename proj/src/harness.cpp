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

#include "cbo/harness.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <variant>

#include "cbo/errors.hpp"
#include "cbo/external_ppd.hpp"
#include "cbo/format.hpp"
#include "cbo/rng.hpp"
#include "cbo/sampling.hpp"
#include "cbo/stats.hpp"

namespace cbo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> all_problem_names() {
  std::vector<std::string> out;
  for (ProblemId id : all_problem_ids()) out.emplace_back(to_string(id));
  return out;
}

std::vector<std::string> all_method_names() {
  std::vector<std::string> out;
  for (const MethodConfig& m : method_registry()) out.push_back(m.name);
  return out;
}

std::vector<std::string> parse_list(std::string_view value, std::string_view what,
                                    const std::vector<std::string>& universe) {
  const std::string_view v = trim(value);
  if (v == "all" || v == "*") return universe;
  std::vector<std::string> out;
  for (std::string_view item : split(v, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (std::find(universe.begin(), universe.end(), item) == universe.end())
      throw ConfigError("unknown " + std::string(what) + " id '" + std::string(item) + "'");
    if (std::find(out.begin(), out.end(), item) == out.end()) out.emplace_back(item);
  }
  if (out.empty()) throw ConfigError("empty " + std::string(what) + " list");
  return out;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view value) {
  const std::string_view v = trim(value);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError("'" + std::string(key) + "' expects a non-negative integer, got '" +
                      std::string(value) + "'");
  return out;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::optional<TrialStatus> parse_status(std::string_view s) {
  for (TrialStatus t : {TrialStatus::pending, TrialStatus::done, TrialStatus::failed,
                        TrialStatus::skipped})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

bool trace_readable(const fs::path& p) {
  std::ifstream in(p);
  if (!in) return false;
  try {
    return !read_trace_csv(in).records.empty();
  } catch (const std::exception&) {
    return false;
  }
}

std::string best_text(const TrialTrace& t) {
  const TrialOutcome o = trial_outcome(t);
  return o.best_value ? format_number(*o.best_value) : std::string("no feasible point");
}

/// Median of per-trial values where +inf stands for "no feasible point".
double median_with_inf(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  const double a = v[n / 2 - 1];
  const double b = v[n / 2];
  return (std::isinf(a) || std::isinf(b)) ? INFINITY : 0.5 * (a + b);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string csv_number(double v) { return std::isnan(v) ? std::string() : format_number(v); }

}  // namespace

// ---------------------------------------------------------------- config

json ExperimentConfig::semantic_json() const {
  json j;
  j["problems"] = problems;
  j["methods"] = methods;
  j["trials"] = n_trials;
  j["init"] = n_init;
  j["iters"] = n_iter;
  j["pool"] = pool;
  j["seed"] = seed;
  j["errata"] = std::string(to_string(errata));
  j["predictor_cmd"] = predictor_cmd;
  return j;
}

std::string ExperimentConfig::hash() const { return hex64(hash_string(semantic_json().dump())); }

json ExperimentConfig::to_json() const {
  json j = semantic_json();
  j["workers"] = workers;
  j["out"] = out_dir.string();
  j["budget"] = budget;
  return j;
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.problems = all_problem_names();
  cfg.methods = all_method_names();
  if (const char* env = std::getenv("CBO_BENCH_OUT"); env && *env) cfg.out_dir = env;
  return cfg;
}

void apply_setting(ExperimentConfig& cfg, std::string_view key_in, std::string_view value) {
  std::string key(trim(key_in));
  std::replace(key.begin(), key.end(), '-', '_');
  if (key == "problems") {
    cfg.problems = parse_list(value, "problem", all_problem_names());
  } else if (key == "methods") {
    cfg.methods = parse_list(value, "method", all_method_names());
  } else if (key == "trials") {
    cfg.n_trials = parse_unsigned(key, value);
  } else if (key == "iters") {
    cfg.n_iter = parse_unsigned(key, value);
  } else if (key == "init") {
    cfg.n_init = parse_unsigned(key, value);
  } else if (key == "pool") {
    cfg.pool = parse_unsigned(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_unsigned(key, value);
  } else if (key == "workers") {
    cfg.workers = parse_unsigned(key, value);
  } else if (key == "errata") {
    const auto mode = parse_errata_mode(trim(value));
    if (!mode)
      throw ConfigError("errata must be 'verbatim' or 'corrected', got '" + std::string(value) +
                        "'");
    cfg.errata = *mode;
  } else if (key == "out") {
    cfg.out_dir = std::string(trim(value));
  } else if (key == "predictor_cmd") {
    cfg.predictor_cmd = std::string(trim(value));
  } else if (key == "budget") {
    parse_budget(value);
    cfg.budget = std::string(trim(value));
  } else {
    throw ConfigError("unknown setting '" + std::string(key_in) + "'");
  }
}

void apply_config_file(ExperimentConfig& cfg, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '#' || s.front() == ';' || s.front() == '[') continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    std::string_view value = trim(s.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front())
      value = value.substr(1, value.size() - 2);
    try {
      apply_setting(cfg, s.substr(0, eq), value);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.problems.empty()) throw ConfigError("no problems selected");
  if (cfg.methods.empty()) throw ConfigError("no methods selected");
  for (const auto& p : cfg.problems)
    if (!parse_problem_id(p)) throw ConfigError("unknown problem id '" + p + "'");
  for (const auto& m : cfg.methods)
    if (!find_method(m)) throw ConfigError("unknown method id '" + m + "'");
  if (cfg.n_trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.n_init < 2) throw ConfigError("init must be >= 2");
  if (cfg.pool < 1) throw ConfigError("pool must be >= 1");
  if (cfg.workers < 1 || cfg.workers > 256) throw ConfigError("workers must be in [1, 256]");
  if (cfg.out_dir.empty()) throw ConfigError("out directory must not be empty");
  if (!cfg.budget.empty()) parse_budget(cfg.budget);
}

BudgetSpec parse_budget(std::string_view text) {
  const std::string_view t = trim(text);
  const auto colon = t.find(':');
  const std::string_view kind = t.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? "" : t.substr(colon + 1);
  BudgetSpec b;
  if (kind == "iteration") {
    b.kind = BudgetSpec::Kind::iteration;
    if (!arg.empty() && arg != "final") b.iteration = parse_unsigned("budget", arg);
    return b;
  }
  if (kind == "runtime") {
    if (arg.empty() || arg == "fastest") {
      b.kind = BudgetSpec::Kind::runtime_fastest;
      return b;
    }
    b.kind = BudgetSpec::Kind::runtime_fixed;
    try {
      b.runtime_ms = parse_number(arg);
    } catch (const std::exception&) {
      throw ConfigError("bad runtime budget '" + std::string(arg) + "'");
    }
    if (!(b.runtime_ms >= 0.0)) throw ConfigError("runtime budget must be >= 0");
    return b;
  }
  throw ConfigError("budget must be iteration:k or runtime:fastest, got '" + std::string(t) + "'");
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::string_view problem, std::size_t trial) {
  return derive_seed(base_seed, problem, trial);
}

std::uint64_t method_seed(std::uint64_t trial_seed_value, std::string_view method) {
  return derive_seed(trial_seed_value, method, 0);
}

Matrix initial_design(const ProblemSpec& spec, std::size_t n_init, std::uint64_t seed) {
  return scale_to_bounds(latin_hypercube(n_init, spec.dimension, derive_seed(seed, "init", 0)),
                         spec);
}

// ---------------------------------------------------------------- store

std::string_view to_string(TrialStatus s) {
  switch (s) {
    case TrialStatus::pending: return "pending";
    case TrialStatus::done: return "done";
    case TrialStatus::failed: return "failed";
    case TrialStatus::skipped: return "skipped";
  }
  return "pending";
}

json Manifest::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["code_version"] = code_version;
  j["config"] = config;
  json rows = json::array();
  for (const ManifestEntry& e : entries) {
    json r;
    r["problem"] = e.problem;
    r["method"] = e.method;
    r["trial"] = e.trial;
    r["seed"] = e.seed;
    r["status"] = std::string(to_string(e.status));
    r["trace"] = e.trace;
    if (!e.error.empty()) r["error"] = e.error;
    rows.push_back(r);
  }
  j["trials"] = rows;
  return j;
}

Manifest Manifest::from_json(const json& j) {
  Manifest m;
  m.config_hash = j.at("config_hash").get<std::string>();
  m.code_version = j.value("code_version", "");
  m.config = j.at("config");
  for (const json& r : j.at("trials")) {
    ManifestEntry e;
    e.problem = r.at("problem").get<std::string>();
    e.method = r.at("method").get<std::string>();
    e.trial = r.at("trial").get<std::size_t>();
    e.seed = r.at("seed").get<std::uint64_t>();
    const auto st = parse_status(r.at("status").get<std::string>());
    if (!st) throw ConfigError("manifest: unknown status");
    e.status = *st;
    e.trace = r.value("trace", "");
    e.error = r.value("error", "");
    m.entries.push_back(e);
  }
  return m;
}

ManifestEntry* Manifest::find(std::string_view problem, std::string_view method,
                              std::size_t trial) {
  for (ManifestEntry& e : entries)
    if (e.problem == problem && e.method == method && e.trial == trial) return &e;
  return nullptr;
}

fs::path manifest_path(const fs::path& out_dir) { return out_dir / "manifest.json"; }

fs::path trace_path(const fs::path& out_dir, std::string_view problem, std::string_view method,
                    std::size_t trial) {
  return out_dir / "traces" / std::string(problem) / std::string(method) /
         ("trial_" + std::to_string(trial) + ".csv");
}

fs::path design_path(const fs::path& out_dir, std::string_view problem, std::size_t trial) {
  return out_dir / "designs" / std::string(problem) / ("trial_" + std::to_string(trial) + ".csv");
}

Manifest read_manifest(const fs::path& out_dir) {
  const fs::path p = manifest_path(out_dir);
  if (!fs::exists(p)) throw ConfigError("no result store at " + out_dir.string());
  try {
    return Manifest::from_json(json::parse(read_text(p)));
  } catch (const json::exception& e) {
    throw ConfigError("unreadable manifest " + p.string() + ": " + e.what());
  }
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------- run

namespace {

struct Task {
  std::size_t entry;  // index into manifest entries
  ProblemSpec spec;
  MethodConfig method;
  const Matrix* design;
};

struct TrialResult {
  std::size_t task;
  std::optional<TrialTrace> trace;
  std::string error;
  double seconds = 0.0;
};

struct WorkerExit {};

using Message = std::variant<TrialResult, WorkerExit>;

/// Unbounded multi-producer, single-consumer channel.
class Channel {
 public:
  void send(Message m) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(m));
    }
    cv_.notify_one();
  }
  Message receive() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !queue_.empty(); });
    Message m = std::move(queue_.front());
    queue_.pop_front();
    return m;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Message> queue_;
};

void write_manifest(const fs::path& out_dir, const Manifest& m) {
  write_file_atomic(manifest_path(out_dir), m.to_json().dump(2) + "\n");
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg, std::ostream& log,
                          const std::atomic<bool>* stop) {
  validate_config(cfg);
  const fs::path& out = cfg.out_dir;
  fs::create_directories(out);

  Manifest manifest;
  const std::string hash = cfg.hash();
  if (fs::exists(manifest_path(out))) {
    manifest = read_manifest(out);
    if (manifest.config_hash != hash)
      throw ConfigError("store " + out.string() + " was produced by a different configuration (" +
                        manifest.config_hash + " vs " + hash +
                        "); choose another --out directory");
  } else {
    manifest.config_hash = hash;
    manifest.code_version = std::string(kCodeVersion);
    manifest.config = cfg.semantic_json();
  }

  // Schedule: problem -> trial -> method, one shared design per problem x trial.
  std::map<std::pair<std::string, std::size_t>, Matrix> designs;
  std::vector<Task> tasks;
  RunSummary summary;
  for (const std::string& pname : cfg.problems) {
    const ProblemSpec spec = make_problem(*parse_problem_id(pname), cfg.errata);
    for (std::size_t trial = 0; trial < cfg.n_trials; ++trial) {
      const std::uint64_t tseed = trial_seed(cfg.seed, pname, trial);
      const Matrix& design =
          designs.emplace(std::pair{pname, trial}, initial_design(spec, cfg.n_init, tseed))
              .first->second;
      const fs::path dpath = design_path(out, pname, trial);
      if (!fs::exists(dpath)) {
        std::ostringstream os;
        write_design_csv(os, design);
        write_file_atomic(dpath, os.str());
      }
      for (const std::string& mname : cfg.methods) {
        ++summary.scheduled;
        ManifestEntry* e = manifest.find(pname, mname, trial);
        if (!e) {
          ManifestEntry fresh;
          fresh.problem = pname;
          fresh.method = mname;
          fresh.trial = trial;
          fresh.seed = tseed;
          fresh.trace = fs::relative(trace_path(out, pname, mname, trial), out).generic_string();
          manifest.entries.push_back(fresh);
          e = &manifest.entries.back();
        }
        if (e->status == TrialStatus::done && trace_readable(out / e->trace)) {
          ++summary.reused;
          continue;
        }
        e->status = TrialStatus::pending;
        e->error.clear();
        MethodConfig m = *find_method(mname);
        m.pool_size = cfg.pool;
        m.n_init = cfg.n_init;
        m.n_iter = cfg.n_iter;
        m.seed = method_seed(tseed, mname);
        tasks.push_back({static_cast<std::size_t>(e - manifest.entries.data()), spec, m, &design});
      }
    }
  }

  const bool needs_ppd = std::any_of(tasks.begin(), tasks.end(), [](const Task& t) {
    return t.method.surrogate_path == SurrogatePath::ppd;
  });
  if (needs_ppd && !cfg.predictor_cmd.empty()) {
    try {
      ExternalPpdSurrogate probe(cfg.predictor_cmd);
      probe.handshake();
    } catch (const InferenceError& e) {
      throw ConfigError(std::string("external predictor handshake failed: ") + e.what());
    }
  }
  write_manifest(out, manifest);
  if (tasks.empty()) {
    log << "nothing to do: " << summary.reused << " trials already done in " << out.string()
        << "\n";
    return summary;
  }

  Channel channel;
  std::atomic<std::size_t> next{0};
  const std::size_t n_workers = std::min(cfg.workers, tasks.size());
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      std::unique_ptr<PpdSurrogate> surrogate;
      if (!cfg.predictor_cmd.empty())
        surrogate = std::make_unique<ExternalPpdSurrogate>(cfg.predictor_cmd);
      else
        surrogate = std::make_unique<ReferencePpdSurrogate>();
      while (!(stop && stop->load())) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) break;
        const Task& task = tasks[i];
        TrialResult r{i, std::nullopt, {}, 0.0};
        const auto t0 = std::chrono::steady_clock::now();
        try {
          r.trace = run_trial(task.spec, task.method, *task.design, surrogate.get());
        } catch (const std::exception& e) {
          r.error = e.what();
        }
        r.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        channel.send(std::move(r));
      }
      channel.send(WorkerExit{});
    });
  }

  // Single store writer.
  std::size_t live = n_workers;
  std::size_t finished = 0;
  std::vector<bool> completed(tasks.size(), false);
  while (live > 0) {
    Message msg = channel.receive();
    if (std::holds_alternative<WorkerExit>(msg)) {
      --live;
      continue;
    }
    TrialResult& r = std::get<TrialResult>(msg);
    const Task& task = tasks[r.task];
    ManifestEntry& e = manifest.entries[task.entry];
    completed[r.task] = true;
    ++finished;
    std::ostringstream prefix;
    prefix << "[" << finished << "/" << tasks.size() << "] " << e.problem << " " << e.method
           << " trial " << e.trial << ": ";
    if (r.trace) {
      try {
        std::ostringstream os;
        write_trace_csv(os, *r.trace);
        write_file_atomic(out / e.trace, os.str());
        e.status = TrialStatus::done;
        ++summary.executed;
        log << prefix.str() << "done in " << std::fixed << std::setprecision(1) << r.seconds
            << " s, best " << best_text(*r.trace) << "\n";
        log.unsetf(std::ios::floatfield);
      } catch (const std::exception& ex) {
        r.error = ex.what();
      }
    }
    if (!r.trace || e.status != TrialStatus::done) {
      e.status = TrialStatus::failed;
      e.error = r.error;
      ++summary.failed;
      log << prefix.str() << "FAILED: " << r.error << "\n";
    }
    write_manifest(out, manifest);
    log.flush();
  }
  for (std::thread& t : workers) t.join();

  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (!completed[i]) {
      manifest.entries[tasks[i].entry].status = TrialStatus::skipped;
      ++summary.skipped;
    }
  write_manifest(out, manifest);
  log << "run complete: " << summary.executed << " executed, " << summary.reused << " reused, "
      << summary.failed << " failed, " << summary.skipped << " skipped\n";
  return summary;
}

// ---------------------------------------------------------------- reports

std::vector<TrialTrace> load_traces(const fs::path& out_dir,
                                    const std::vector<std::string>& problems,
                                    const std::vector<std::string>& methods) {
  Manifest manifest = read_manifest(out_dir);
  std::vector<TrialTrace> traces;
  std::vector<std::string> missing;
  for (const std::string& p : problems)
    for (const std::string& m : methods) {
      std::vector<const ManifestEntry*> rows;
      for (const ManifestEntry& e : manifest.entries)
        if (e.problem == p && e.method == m) rows.push_back(&e);
      if (rows.empty()) {
        missing.push_back(p + " " + m + " (not in manifest)");
        continue;
      }
      std::sort(rows.begin(), rows.end(),
                [](const ManifestEntry* a, const ManifestEntry* b) { return a->trial < b->trial; });
      for (const ManifestEntry* e : rows) {
        const std::string label = p + " " + m + " trial " + std::to_string(e->trial);
        if (e->status != TrialStatus::done) {
          missing.push_back(label + " (" + std::string(to_string(e->status)) + ")");
          continue;
        }
        std::ifstream in(out_dir / e->trace);
        if (!in) {
          missing.push_back(label + " (trace file absent)");
          continue;
        }
        try {
          traces.push_back(read_trace_csv(in));
        } catch (const std::exception& ex) {
          missing.push_back(label + " (unreadable: " + ex.what() + ")");
        }
      }
    }
  if (!missing.empty()) {
    std::string msg = "missing traces:";
    for (const auto& s : missing) msg += "\n  " + s;
    throw ConfigError(msg);
  }
  return traces;
}

std::optional<ReportKind> parse_report_kind(std::string_view name) {
  for (ReportKind k : {ReportKind::feasibility, ReportKind::fixed_iteration,
                       ReportKind::fixed_runtime, ReportKind::ranking, ReportKind::pareto})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

std::string_view to_string(ReportKind kind) {
  switch (kind) {
    case ReportKind::feasibility: return "feasibility";
    case ReportKind::fixed_iteration: return "fixed_iteration";
    case ReportKind::fixed_runtime: return "fixed_runtime";
    case ReportKind::ranking: return "ranking";
    case ReportKind::pareto: return "pareto";
  }
  return "feasibility";
}

namespace {

void budget_rows(std::ostream& csv, json& rows, const std::vector<BudgetSummary>& summaries) {
  csv << "problem,method,budget,n_trials,n_feasible,n_infeasible,min,q1,median,q3,max\n";
  for (const BudgetSummary& s : summaries) {
    csv << s.problem << ',' << s.method << ',' << format_number(s.budget) << ',' << s.n_trials
        << ',' << s.n_feasible << ',' << s.n_infeasible << ',' << csv_number(s.min) << ','
        << csv_number(s.q1) << ',' << csv_number(s.median) << ',' << csv_number(s.q3) << ','
        << csv_number(s.max) << '\n';
    rows.push_back(to_json(s));
  }
}

void ranking_rows(std::ostream& csv, const RankReport& r) {
  const std::string metric = r.metric == RankMetric::performance ? "performance" : "time";
  for (std::size_t p = 0; p < r.problems.size(); ++p)
    for (std::size_t k = 0; k < r.methods.size(); ++k)
      csv << metric << ',' << r.problems[p] << ',' << r.methods[k] << ",rank,"
          << format_number(r.ranks(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)))
          << '\n';
  for (std::size_t k = 0; k < r.methods.size(); ++k)
    csv << metric << ",all," << r.methods[k] << ",mean_rank," << format_number(r.mean_ranks[k])
        << '\n';
  for (std::size_t c = 0; c < r.cliques.size(); ++c)
    for (std::size_t k : r.cliques[c])
      csv << metric << ",all," << r.methods[k] << ",clique," << (c + 1) << '\n';
  csv << metric << ",all,,friedman_statistic," << format_number(r.friedman_statistic) << '\n';
  csv << metric << ",all,,friedman_p," << format_number(r.friedman_p) << '\n';
}

}  // namespace

ReportOutput write_report(const fs::path& out_dir, ReportKind kind,
                          std::vector<std::string> problems, std::vector<std::string> methods,
                          const std::optional<BudgetSpec>& budget) {
  const Manifest manifest = read_manifest(out_dir);
  if (problems.empty()) problems = manifest.config.at("problems").get<std::vector<std::string>>();
  if (methods.empty()) methods = manifest.config.at("methods").get<std::vector<std::string>>();
  const std::vector<TrialTrace> traces = load_traces(out_dir, problems, methods);

  std::ostringstream csv;
  json doc;
  doc["kind"] = std::string(to_string(kind));
  doc["config_hash"] = manifest.config_hash;
  json rows = json::array();

  switch (kind) {
    case ReportKind::feasibility: {
      csv << "problem,method,ratio_percent,n_trials\n";
      for (const std::string& p : problems)
        for (const std::string& m : methods) {
          std::vector<TrialTrace> cell;
          for (const TrialTrace& t : traces)
            if (t.problem == p && t.method == m) cell.push_back(t);
          const double ratio = feasibility_ratio(cell);
          csv << p << ',' << m << ',' << format_number(ratio) << ',' << cell.size() << '\n';
          rows.push_back({{"problem", p}, {"method", m}, {"ratio_percent", ratio},
                          {"n_trials", cell.size()}});
        }
      break;
    }
    case ReportKind::fixed_iteration: {
      BudgetSpec b = budget.value_or(BudgetSpec{});
      if (b.kind != BudgetSpec::Kind::iteration)
        throw ConfigError("fixed_iteration reports take --budget iteration:k");
      const std::size_t k = b.iteration.value_or(manifest.config.at("iters").get<std::size_t>());
      budget_rows(csv, rows, fixed_iteration_report(traces, k));
      doc["iteration"] = k;
      break;
    }
    case ReportKind::fixed_runtime: {
      BudgetSpec b = budget.value_or(BudgetSpec{BudgetSpec::Kind::runtime_fastest, {}, 0.0});
      if (b.kind == BudgetSpec::Kind::iteration)
        throw ConfigError("fixed_runtime reports take --budget runtime:fastest or runtime:<ms>");
      const auto summaries = b.kind == BudgetSpec::Kind::runtime_fastest
                                 ? fixed_runtime_report(traces)
                                 : fixed_runtime_report(traces, b.runtime_ms);
      budget_rows(csv, rows, summaries);
      doc["budget"] = b.kind == BudgetSpec::Kind::runtime_fastest ? json("fastest")
                                                                   : number_or_null(b.runtime_ms);
      break;
    }
    case ReportKind::ranking: {
      const ResultMatrix matrix = build_result_matrix(traces, problems, methods);
      csv << "metric,problem,method,statistic,value\n";
      for (RankMetric metric : {RankMetric::performance, RankMetric::time}) {
        const RankReport r = critical_difference_ranking(matrix, metric);
        ranking_rows(csv, r);
        doc[metric == RankMetric::performance ? "performance" : "time"] = to_json(r);
      }
      break;
    }
    case ReportKind::pareto: {
      const ResultMatrix matrix = build_result_matrix(traces, problems, methods);
      csv << "problem,method,median_time_ms,median_best_value,pareto_rank\n";
      std::vector<double> rank_sum(methods.size(), 0.0);
      for (std::size_t p = 0; p < problems.size(); ++p) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t k = 0; k < methods.size(); ++k) {
          std::vector<double> times, values;
          for (const TrialOutcome& o : matrix.cell(p, k)) {
            times.push_back(o.total_ms);
            values.push_back(o.best_value.value_or(INFINITY));
          }
          pts.emplace_back(median_with_inf(times), median_with_inf(values));
        }
        const std::vector<std::size_t> ranks = pareto_rank(pts);
        for (std::size_t k = 0; k < methods.size(); ++k) {
          rank_sum[k] += static_cast<double>(ranks[k]);
          csv << problems[p] << ',' << methods[k] << ',' << format_number(pts[k].first) << ','
              << format_number(pts[k].second) << ',' << ranks[k] << '\n';
          rows.push_back({{"problem", problems[p]},
                          {"method", methods[k]},
                          {"median_time_ms", pts[k].first},
                          {"median_best_value", number_or_null(pts[k].second)},
                          {"pareto_rank", ranks[k]}});
        }
      }
      json mean = json::object();
      for (std::size_t k = 0; k < methods.size(); ++k) {
        const double avg = rank_sum[k] / static_cast<double>(problems.size());
        csv << "mean," << methods[k] << ",,," << format_number(avg) << '\n';
        mean[methods[k]] = avg;
      }
      doc["mean_pareto_rank"] = mean;
      break;
    }
  }
  if (kind != ReportKind::ranking) doc["rows"] = rows;

  ReportOutput files{out_dir / "reports" / (std::string(to_string(kind)) + ".csv"),
                     out_dir / "reports" / (std::string(to_string(kind)) + ".json")};
  write_file_atomic(files.csv, csv.str());
  write_file_atomic(files.json, doc.dump(2) + "\n");
  return files;
}

}  // namespace cbo
