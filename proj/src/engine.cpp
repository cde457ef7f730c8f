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

#include "cbo/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "cbo/errors.hpp"
#include "cbo/format.hpp"
#include "cbo/rng.hpp"

namespace cbo {
namespace {

constexpr double kDuplicateTolerance = 1e-9;

/// Before the first feasible observation the CEI variants rank candidates by
/// log EI + sum_j log P(g_j <= 0) (CEI+: log min(1, 2P)), with EI measured
/// against the objective value of the least-violating observation rather
/// than the unconstrained minimum. The objective then guides the search
/// toward the feasible region without being pulled into low-objective
/// infeasible areas; log space keeps tiny probabilities comparable.
double log_feasibility(std::span<const double> log_p, ConstraintMode mode) {
  double v = 0.0;
  for (double lp : log_p) v += mode == ConstraintMode::cei_plus ? std::min(0.0, lp + std::log(2.0)) : lp;
  return v;
}

/// Objective at the observation with the smallest total violation, each
/// constraint scaled by its standard deviation over the data.
double least_violation_objective(const Dataset& D) {
  const Eigen::Index G = D.g_mat.cols();
  Vector scale(G);
  for (Eigen::Index j = 0; j < G; ++j) {
    const auto c = D.g_mat.col(j);
    scale(j) = std::max(1e-12, std::sqrt((c.array() - c.mean()).square().mean()));
  }
  double best = std::numeric_limits<double>::infinity();
  double f = D.y(0);
  for (Eigen::Index i = 0; i < D.g_mat.rows(); ++i) {
    double v = 0.0;
    for (Eigen::Index j = 0; j < G; ++j) v += std::max(0.0, D.g_mat(i, j)) / scale(j);
    if (v < best) {
      best = v;
      f = D.y(i);
    }
  }
  return f;
}

constexpr double kInitialPatternStep = 0.1;
constexpr double kMinPatternStep = 1e-4;
constexpr std::size_t kPatternSteps = 50;

/// f_PF for every stored row at the current rho.
Vector penalized_objective(const Dataset& D, double rho) {
  Vector out(static_cast<Eigen::Index>(D.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out(i) = penalty_transform(D.y(i), std::span<const double>(D.g_mat.row(i).data(), D.n_constraints), rho);
  return out;
}

bool all_equal(const Vector& v) { return v.size() == 0 || (v.array() == v(0)).all(); }

/// Unit-cube point -> (snapped raw point, its unit-cube image).
std::pair<std::vector<double>, std::vector<double>> materialize(const ProblemSpec& spec,
                                                                std::span<const double> u) {
  std::vector<double> raw(spec.dimension), unit(spec.dimension);
  for (std::size_t j = 0; j < spec.dimension; ++j) {
    const Bound& b = spec.bounds[j];
    raw[j] = b.lower + std::clamp(u[j], 0.0, 1.0) * (b.upper - b.lower);
  }
  raw = clamp_and_snap(spec, raw);
  for (std::size_t j = 0; j < spec.dimension; ++j) {
    const Bound& b = spec.bounds[j];
    unit[j] = (raw[j] - b.lower) / (b.upper - b.lower);
  }
  return {std::move(raw), std::move(unit)};
}

/// Candidate indices sorted by acquisition value, best first (stable).
std::vector<std::size_t> ranked(const Vector& acq) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(acq.size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return acq(static_cast<Eigen::Index>(a)) > acq(static_cast<Eigen::Index>(b));
  });
  return idx;
}

std::span<const double> row_span(const Matrix& m, std::size_t i) {
  return {m.row(static_cast<Eigen::Index>(i)).data(), static_cast<std::size_t>(m.cols())};
}

/// Picks the chosen point unless it duplicates a stored row, in which case
/// the best non-duplicate pool candidate is used instead.
void finalize(const AcquisitionContext& ctx, NextEval& out, const std::vector<double>& unit,
              double value, const Vector& pool_acq) {
  auto [raw, snapped] = materialize(ctx.spec, unit);
  out.acquisition = value;
  if (ctx.data.min_distance(snapped) < kDuplicateTolerance) {
    for (std::size_t i : ranked(pool_acq)) {
      auto [r, s] = materialize(ctx.spec, row_span(ctx.pool_unit, i));
      if (ctx.data.min_distance(s) >= kDuplicateTolerance) {
        raw = std::move(r);
        snapped = std::move(s);
        const double v = pool_acq(static_cast<Eigen::Index>(i));
        out.acquisition = v;
        break;
      }
    }
  }
  out.x = std::move(raw);
  out.unit_x = std::move(snapped);
}

}  // namespace

std::string_view to_string(SurrogatePath path) { return path == SurrogatePath::gp ? "gp" : "ppd"; }

std::string_view to_string(ConstraintMode mode) {
  switch (mode) {
    case ConstraintMode::penalty:
      return "penalty";
    case ConstraintMode::cei:
      return "cei";
    case ConstraintMode::cei_plus:
      return "cei_plus";
  }
  return "?";
}

const std::vector<MethodConfig>& method_registry() {
  static const std::vector<MethodConfig> methods = [] {
    std::vector<MethodConfig> m;
    for (SurrogatePath path : {SurrogatePath::gp, SurrogatePath::ppd})
      for (auto [mode, suffix] : {std::pair{ConstraintMode::penalty, "pen"},
                                  std::pair{ConstraintMode::cei, "cei"},
                                  std::pair{ConstraintMode::cei_plus, "cei_plus"}}) {
        MethodConfig c;
        c.name = std::string(to_string(path)) + "_" + suffix;
        c.surrogate_path = path;
        c.constraint_mode = mode;
        m.push_back(c);
      }
    return m;
  }();
  return methods;
}

std::optional<MethodConfig> find_method(std::string_view name) {
  for (const MethodConfig& m : method_registry())
    if (m.name == name) return m;
  return std::nullopt;
}

bool TrialTrace::feasible_by(std::size_t row) const {
  for (std::size_t i = 0; i <= row && i < records.size(); ++i)
    if (records[i].feasible) return true;
  return false;
}

NextEval next_eval_gp(const AcquisitionContext& ctx, std::size_t restarts,
                      std::size_t refine_starts, GpTrialState* state) {
  const Dataset& D = ctx.data;
  if (D.size() == 0) throw std::invalid_argument("next_eval_gp: empty dataset");
  if (ctx.pool_unit.rows() == 0) throw std::invalid_argument("next_eval_gp: empty pool");
  const std::size_t G = D.n_constraints;
  const bool penalty = ctx.mode == ConstraintMode::penalty;
  const std::size_t n_models = penalty ? 1 : 1 + G;

  std::vector<Vector> targets;
  targets.push_back(penalty ? penalized_objective(D, ctx.penalty.rho) : D.y);
  if (!penalty)
    for (std::size_t j = 0; j < G; ++j) targets.push_back(D.g_mat.col(static_cast<Eigen::Index>(j)));

  NextEval out;
  const std::size_t fits_before = gp_fit_call_count();
  std::vector<GpModel> models;
  std::vector<TargetTransform> transforms;
  models.reserve(n_models);
  if (state != nullptr && state->warm.size() != n_models) state->warm.assign(n_models, std::nullopt);
  try {
    for (std::size_t k = 0; k < n_models; ++k) {
      TargetTransform tf;
      const Vector ys = fit_transform(
          targets[k], k == 0 ? TargetWarp::Kind::minimize : TargetWarp::Kind::constraint, tf);
      transforms.push_back(tf);
      GpConfig cfg;
      cfg.restarts = restarts;
      cfg.seed = derive_seed(ctx.seed, "gp-model", k);
      if (state != nullptr) cfg.warm_start = state->warm[k];
      models.push_back(gp_fit(D.X, ys, cfg, tf.scale));
      if (state != nullptr) state->warm[k] = models.back().hyper;
    }
  } catch (const NumericalError&) {
    out.gp_fits = gp_fit_call_count() - fits_before;
    out.degraded = true;
    if (state != nullptr) state->warm.assign(n_models, std::nullopt);
    CounterRng rng(derive_seed(ctx.seed, "gp-fallback"));
    const auto m = static_cast<std::size_t>(ctx.pool_unit.rows());
    const Vector uniform_acq = Vector::Zero(static_cast<Eigen::Index>(m));
    const std::size_t pick = rng.below(m);
    const auto u = row_span(ctx.pool_unit, pick);
    finalize(ctx, out, std::vector<double>(u.begin(), u.end()), 0.0, uniform_acq);
    return out;
  }
  out.gp_fits = gp_fit_call_count() - fits_before;

  // Before the first feasible observation, see log_feasibility.
  const bool seek_feasible = !penalty && !ctx.incumbent.feasible_found;
  const double f_star_raw = penalty         ? targets[0].minCoeff()
                            : seek_feasible ? least_violation_objective(D)
                                            : ctx.incumbent.f_star;
  const double f_star = transforms[0].apply(f_star_raw);
  std::vector<double> thresholds;
  for (std::size_t j = 1; j < n_models; ++j) thresholds.push_back(transforms[j].apply(0.0));

  const auto acquisition = [&](const Matrix& Q) {
    Vector value(Q.rows());
    if (seek_feasible) {
      const GpPrediction obj = gp_predict(models[0], Q);
      Matrix log_p(Q.rows(), static_cast<Eigen::Index>(G));
      for (std::size_t j = 0; j < G; ++j) {
        const GpPrediction c = gp_predict(models[j + 1], Q);
        for (Eigen::Index q = 0; q < Q.rows(); ++q)
          log_p(q, static_cast<Eigen::Index>(j)) =
              log_normal_cdf((thresholds[j] - c.mean(q)) / c.std(q));
      }
      for (Eigen::Index q = 0; q < Q.rows(); ++q)
        value(q) = log_expected_improvement_gaussian(f_star, obj.mean(q), obj.std(q)) +
                   log_feasibility(std::span<const double>(log_p.row(q).data(), G), ctx.mode);
      return value;
    }
    const GpPrediction obj = gp_predict(models[0], Q);
    for (Eigen::Index q = 0; q < Q.rows(); ++q)
      value(q) = expected_improvement_gaussian(f_star, obj.mean(q), obj.std(q));
    if (penalty) return value;
    Matrix pf(Q.rows(), static_cast<Eigen::Index>(G));
    for (std::size_t j = 0; j < G; ++j) {
      const GpPrediction c = gp_predict(models[j + 1], Q);
      for (Eigen::Index q = 0; q < Q.rows(); ++q)
        pf(q, static_cast<Eigen::Index>(j)) =
            prob_feasible_gaussian(c.mean(q) - thresholds[j], c.std(q));
    }
    for (Eigen::Index q = 0; q < Q.rows(); ++q) {
      const std::span<const double> p(pf.row(q).data(), G);
      value(q) = ctx.mode == ConstraintMode::cei ? cei(value(q), p) : cei_plus(value(q), p);
    }
    return value;
  };

  const Vector pool_acq = acquisition(ctx.pool_unit);
  const std::vector<std::size_t> order = ranked(pool_acq);
  std::vector<double> best(row_span(ctx.pool_unit, order[0]).begin(),
                           row_span(ctx.pool_unit, order[0]).end());
  double best_value = pool_acq(static_cast<Eigen::Index>(order[0]));

  if (!all_equal(targets[0])) {
    const std::size_t d = D.dimension();
    const std::size_t starts = std::min(refine_starts, order.size());
    for (std::size_t s = 0; s < starts; ++s) {
      const auto start = row_span(ctx.pool_unit, order[s]);
      std::vector<double> x = snap_unit(ctx.spec, start);
      double fx = pool_acq(static_cast<Eigen::Index>(order[s]));
      double step = kInitialPatternStep;
      Matrix polls(static_cast<Eigen::Index>(2 * d), static_cast<Eigen::Index>(d));
      for (std::size_t it = 0; it < kPatternSteps && step >= kMinPatternStep; ++it) {
        for (std::size_t j = 0; j < d; ++j)
          for (int sign = 0; sign < 2; ++sign) {
            std::vector<double> p = x;
            p[j] += sign == 0 ? step : -step;
            p = snap_unit(ctx.spec, p);
            const auto r = static_cast<Eigen::Index>(2 * j + static_cast<std::size_t>(sign));
            for (std::size_t c = 0; c < d; ++c) polls(r, static_cast<Eigen::Index>(c)) = p[c];
          }
        const Vector pv = acquisition(polls);
        Eigen::Index arg = 0;
        const double top = pv.maxCoeff(&arg);
        if (top > fx) {
          fx = top;
          x.assign(polls.row(arg).data(), polls.row(arg).data() + d);
        } else {
          step *= 0.5;
        }
      }
      if (fx > best_value) {
        best_value = fx;
        best = x;
      }
    }
  }
  finalize(ctx, out, best, best_value, pool_acq);
  return out;
}

NextEval next_eval_ppd(const AcquisitionContext& ctx, const PpdSurrogate& surrogate,
                       std::size_t bucket_count) {
  const Dataset& D = ctx.data;
  if (D.size() == 0) throw std::invalid_argument("next_eval_ppd: empty dataset");
  if (ctx.pool_unit.rows() == 0) throw std::invalid_argument("next_eval_ppd: empty pool");
  const bool penalty = ctx.mode == ConstraintMode::penalty;
  const std::size_t G = D.n_constraints;

  Matrix Y(static_cast<Eigen::Index>(D.size()), penalty ? 1 : static_cast<Eigen::Index>(1 + G));
  Vector fpf;
  if (penalty) {
    fpf = penalized_objective(D, ctx.penalty.rho);
    Y.col(0) = fpf;
  } else {
    Y.col(0) = D.y;
    if (G > 0) Y.rightCols(static_cast<Eigen::Index>(G)) = D.g_mat;
  }
  const std::size_t calls_before = surrogate.inference_call_count();
  const PpdPrediction pred =
      ppd_predict(surrogate, D.X, Y, ctx.pool_unit, bucket_count, TargetWarping::monotone);
  NextEval out;
  out.inference_calls = surrogate.inference_call_count() - calls_before;

  const bool seek_feasible = !penalty && !ctx.incumbent.feasible_found;
  const double f_star = pred.standardized_threshold(0, penalty         ? fpf.minCoeff()
                                                       : seek_feasible ? least_violation_objective(D)
                                                                       : ctx.incumbent.f_star);
  const auto& edges = pred.batch.edges;
  const auto m = static_cast<std::size_t>(ctx.pool_unit.rows());
  Vector acq(static_cast<Eigen::Index>(m));
  std::vector<double> pf(penalty ? 0 : G);
  if (seek_feasible) {  // see log_feasibility
    for (std::size_t q = 0; q < m; ++q) {
      for (std::size_t j = 0; j < G; ++j)
        pf[j] = std::log(prob_feasible_bucketed(edges, pred.batch.probs_for(q, j + 1),
                                                pred.standardized_threshold(j + 1)));
      acq(static_cast<Eigen::Index>(q)) =
          std::log(expected_improvement_bucketed(f_star, edges, pred.batch.probs_for(q, 0))) +
          log_feasibility(pf, ctx.mode);
    }
  } else {
    for (std::size_t q = 0; q < m; ++q) {
      double v = expected_improvement_bucketed(f_star, edges, pred.batch.probs_for(q, 0));
      if (!penalty) {
        for (std::size_t j = 0; j < G; ++j)
          pf[j] = prob_feasible_bucketed(edges, pred.batch.probs_for(q, j + 1),
                                         pred.standardized_threshold(j + 1));
        v = ctx.mode == ConstraintMode::cei ? cei(v, pf) : cei_plus(v, pf);
      }
      acq(static_cast<Eigen::Index>(q)) = v;
    }
  }
  const std::size_t arg = ranked(acq).front();
  const auto u = row_span(ctx.pool_unit, arg);
  finalize(ctx, out, std::vector<double>(u.begin(), u.end()), acq(static_cast<Eigen::Index>(arg)),
           acq);
  return out;
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

TrialTrace run_trial(const ProblemSpec& spec, const MethodConfig& method, const Matrix& init_design,
                     const PpdSurrogate* surrogate) {
  if (static_cast<std::size_t>(init_design.cols()) != spec.dimension)
    throw std::invalid_argument("run_trial: initial design has the wrong dimension");
  if (static_cast<std::size_t>(init_design.rows()) != method.n_init)
    throw std::invalid_argument("run_trial: initial design has " +
                                std::to_string(init_design.rows()) + " rows, n_init is " +
                                std::to_string(method.n_init));
  if (method.n_init == 0) throw std::invalid_argument("run_trial: n_init must be >= 1");

  std::unique_ptr<PpdSurrogate> owned;
  if (method.surrogate_path == SurrogatePath::ppd && surrogate == nullptr) {
    owned = reference_ppd_surrogate(method.bucket_count);
    surrogate = owned.get();
  }
  const bool penalty = method.constraint_mode == ConstraintMode::penalty;

  TrialTrace trace;
  trace.problem = spec.name;
  trace.method = method.name;
  trace.seed = method.seed;
  trace.errata_mode = spec.errata_mode;
  trace.started_at = utc_now();
  trace.dimension = spec.dimension;
  trace.n_constraints = spec.n_constraints;
  trace.records.reserve(method.n_init + method.n_iter);

  Dataset data(spec.dimension, spec.n_constraints);
  Incumbent incumbent;
  PenaltyState pen;
  GpTrialState gp_state;
  const auto t0 = std::chrono::steady_clock::now();

  const auto append = [&](std::size_t iteration, const std::vector<double>& x,
                          std::span<const double> unit) {
    const EvalResult eval = evaluate(spec, x);
    data.append(unit, x, eval);
    const Incumbent previous = incumbent;
    incumbent = incumbent_update(incumbent, eval, x);
    if (penalty && iteration > 0) pen = update_rho(pen, !(incumbent == previous));
    TraceRecord rec;
    rec.iteration = iteration;
    rec.x = x;
    rec.f = eval.f;
    rec.g = eval.g;
    rec.feasible = eval.feasible;
    rec.incumbent_f = incumbent.f_star;
    rec.rho = penalty ? pen.rho : std::numeric_limits<double>::quiet_NaN();
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    trace.records.push_back(std::move(rec));
  };

  const Matrix init_unit = to_unit(init_design, spec);
  for (Eigen::Index i = 0; i < init_design.rows(); ++i) {
    const std::vector<double> x(init_design.row(i).data(),
                                init_design.row(i).data() + init_design.cols());
    append(0, x, row_span(init_unit, static_cast<std::size_t>(i)));
  }

  for (std::size_t it = 1; it <= method.n_iter; ++it) {
    const CandidatePool pool = candidate_pool(spec, method.pool_size, method.seed, it);
    const Matrix pool_unit = to_unit(pool.points, spec);
    const AcquisitionContext ctx{spec,     data,      method.constraint_mode,
                                 pool_unit, pen,      incumbent,
                                 derive_seed(method.seed, "iteration", it)};
    NextEval next = method.surrogate_path == SurrogatePath::gp
                        ? next_eval_gp(ctx, method.restarts, method.refine_starts, &gp_state)
                        : next_eval_ppd(ctx, *surrogate, method.bucket_count);
    trace.gp_fits += next.gp_fits;
    trace.inference_calls += next.inference_calls;
    if (next.degraded) trace.degraded_iterations.push_back(it);
    append(it, next.x, next.unit_x);
  }
  return trace;
}

void write_trace_csv(std::ostream& out, const TrialTrace& t) {
  out << "# problem=" << t.problem << '\n'
      << "# method=" << t.method << '\n'
      << "# seed=" << t.seed << '\n'
      << "# errata_mode=" << to_string(t.errata_mode) << '\n'
      << "# started_at=" << t.started_at << '\n'
      << "# degraded_iterations=";
  for (std::size_t i = 0; i < t.degraded_iterations.size(); ++i)
    out << (i ? ";" : "") << t.degraded_iterations[i];
  out << '\n' << "iteration";
  for (std::size_t j = 1; j <= t.dimension; ++j) out << ",x_" << j;
  out << ",f";
  for (std::size_t j = 1; j <= t.n_constraints; ++j) out << ",g_" << j;
  out << ",feasible,incumbent_f,rho,wall_ms\n";
  for (const TraceRecord& r : t.records) {
    out << r.iteration;
    for (double v : r.x) out << ',' << format_number(v);
    out << ',' << format_number(r.f);
    for (double v : r.g) out << ',' << format_number(v);
    out << ',' << (r.feasible ? 1 : 0) << ',' << format_number(r.incumbent_f) << ','
        << format_number(r.rho) << ',' << format_number(r.wall_ms) << '\n';
  }
}

TrialTrace read_trace_csv(std::istream& in) {
  TrialTrace t;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  const auto bad = [&](const std::string& what) {
    return std::runtime_error("trace csv line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string_view body = trim(std::string_view(line).substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string key(body.substr(0, eq));
      const std::string value(body.substr(eq + 1));
      if (key == "problem") t.problem = value;
      else if (key == "method") t.method = value;
      else if (key == "seed") t.seed = std::stoull(value);
      else if (key == "errata_mode") {
        const auto m = parse_errata_mode(value);
        if (!m) throw bad("unknown errata mode '" + value + "'");
        t.errata_mode = *m;
      } else if (key == "started_at") t.started_at = value;
      else if (key == "degraded_iterations" && !value.empty()) {
        for (auto part : split(value, ';')) t.degraded_iterations.push_back(std::stoull(std::string(part)));
      }
      continue;
    }
    const auto cells = split(line, ',');
    if (!header_seen) {
      if (cells.empty() || cells[0] != "iteration") throw bad("missing header");
      for (auto c : cells) {
        if (c.starts_with("x_")) ++t.dimension;
        if (c.starts_with("g_")) ++t.n_constraints;
      }
      header_seen = true;
      continue;
    }
    const std::size_t expected = 1 + t.dimension + 1 + t.n_constraints + 4;
    if (cells.size() != expected) throw bad("expected " + std::to_string(expected) + " cells");
    TraceRecord r;
    std::size_t c = 0;
    r.iteration = std::stoull(std::string(cells[c++]));
    for (std::size_t j = 0; j < t.dimension; ++j) r.x.push_back(parse_number(cells[c++]));
    r.f = parse_number(cells[c++]);
    for (std::size_t j = 0; j < t.n_constraints; ++j) r.g.push_back(parse_number(cells[c++]));
    r.feasible = cells[c++] == "1";
    r.incumbent_f = parse_number(cells[c++]);
    r.rho = parse_number(cells[c++]);
    r.wall_ms = parse_number(cells[c++]);
    t.records.push_back(std::move(r));
  }
  if (!header_seen) throw std::runtime_error("trace csv: no header row");
  return t;
}

}  // namespace cbo
