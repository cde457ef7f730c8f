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

#include "cbo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>

#include <boost/math/distributions/chi_squared.hpp>

#include "cbo/distribution.hpp"

namespace cbo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t index_of(const std::vector<std::string>& names, const std::string& name) {
  const auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? names.size() : static_cast<std::size_t>(it - names.begin());
}

/// Median that tolerates +inf entries (an even count averages the two middle
/// values, which is +inf when either is).
double median_with_inf(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  const double a = v[n / 2 - 1];
  const double b = v[n / 2];
  if (std::isinf(a) || std::isinf(b)) return kInf;
  return 0.5 * (a + b);
}

/// Index of the last row whose predicate holds, or nullopt. Rows are
/// ordered, and both predicates used below are monotone.
template <typename Pred>
std::optional<std::size_t> last_row(const TrialTrace& t, Pred pred) {
  std::optional<std::size_t> out;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    if (!pred(t.records[i])) break;
    out = i;
  }
  return out;
}

std::optional<double> incumbent_at(const TrialTrace& t, std::optional<std::size_t> row) {
  if (!row || !t.feasible_by(*row)) return std::nullopt;
  return t.records[*row].incumbent_f;
}

struct GroupKey {
  std::string problem;
  std::string method;
  bool operator==(const GroupKey&) const = default;
};

/// Groups traces by (problem, method) in order of first appearance.
std::vector<std::pair<GroupKey, std::vector<const TrialTrace*>>> group_traces(
    std::span<const TrialTrace> traces) {
  std::vector<std::pair<GroupKey, std::vector<const TrialTrace*>>> groups;
  for (const TrialTrace& t : traces) {
    const GroupKey key{t.problem, t.method};
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.push_back({key, {}});
      it = groups.end() - 1;
    }
    it->second.push_back(&t);
  }
  return groups;
}

BudgetSummary summarize(const GroupKey& key, std::vector<std::optional<double>> values,
                        double budget) {
  BudgetSummary s;
  s.problem = key.problem;
  s.method = key.method;
  s.n_trials = values.size();
  s.budget = budget;
  std::vector<double> feasible;
  for (const auto& v : values)
    if (v) feasible.push_back(*v);
  s.n_feasible = feasible.size();
  s.n_infeasible = s.n_trials - s.n_feasible;
  std::sort(feasible.begin(), feasible.end());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const bool any = !feasible.empty();
  s.min = any ? feasible.front() : nan;
  s.q1 = any ? quantile_sorted(feasible, 0.25) : nan;
  s.median = any ? quantile_sorted(feasible, 0.5) : nan;
  s.q3 = any ? quantile_sorted(feasible, 0.75) : nan;
  s.max = any ? feasible.back() : nan;
  s.per_trial = std::move(values);
  return s;
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number_or_null(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty input");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || lo + 1 >= sorted.size()) return sorted[lo];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, 0.5);
}

TrialOutcome trial_outcome(const TrialTrace& trace) {
  TrialOutcome o;
  o.total_ms = trace.total_ms();
  if (!trace.records.empty()) o.best_value = incumbent_at(trace, trace.records.size() - 1);
  return o;
}

ResultMatrix build_result_matrix(std::span<const TrialTrace> traces,
                                 const std::vector<std::string>& problems,
                                 const std::vector<std::string>& methods) {
  ResultMatrix m;
  m.problems = problems;
  m.methods = methods;
  m.cells.assign(problems.size(), std::vector<std::vector<TrialOutcome>>(methods.size()));
  for (const TrialTrace& t : traces) {
    const std::size_t p = index_of(problems, t.problem);
    const std::size_t k = index_of(methods, t.method);
    if (p < problems.size() && k < methods.size()) m.cells[p][k].push_back(trial_outcome(t));
  }
  for (std::size_t p = 0; p < problems.size(); ++p)
    for (std::size_t k = 0; k < methods.size(); ++k) {
      if (m.cells[p][k].empty())
        throw std::invalid_argument("no traces for " + problems[p] + " x " + methods[k]);
      if (m.cells[p][k].size() != m.cells[p][0].size())
        throw std::invalid_argument("unequal trial counts on " + problems[p]);
    }
  return m;
}

double feasibility_ratio(std::span<const TrialTrace> traces) {
  if (traces.empty()) throw std::invalid_argument("feasibility_ratio: no trials");
  std::size_t ok = 0;
  for (const TrialTrace& t : traces)
    if (!t.records.empty() && t.feasible_by(t.records.size() - 1)) ++ok;
  return 100.0 * static_cast<double>(ok) / static_cast<double>(traces.size());
}

std::vector<double> holm_adjust(std::span<const double> pvals) {
  const std::size_t k = pvals.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
  std::vector<double> out(k);
  double running = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double scaled = std::min(1.0, static_cast<double>(k - i) * pvals[order[i]]);
    running = std::max(running, scaled);
    out[order[i]] = running;
  }
  return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

FriedmanResult friedman_test(const Matrix& values, bool lower_is_better) {
  const auto n = static_cast<std::size_t>(values.rows());
  const auto k = static_cast<std::size_t>(values.cols());
  if (n < 2 || k < 2) throw std::invalid_argument("friedman_test: need >= 2 problems and methods");
  FriedmanResult r;
  std::vector<double> rank_sum(k, 0.0);
  double tie_sum = 0.0;
  std::vector<double> row(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      row[j] = (lower_is_better ? 1.0 : -1.0) *
               values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    const std::vector<double> ranks = average_ranks(row);
    for (std::size_t j = 0; j < k; ++j) rank_sum[j] += ranks[j];
    std::vector<double> sorted = row;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t a = 0; a < k;) {
      std::size_t b = a;
      while (b + 1 < k && sorted[b + 1] == sorted[a]) ++b;
      const double t = static_cast<double>(b - a + 1);
      tie_sum += t * t * t - t;
      a = b + 1;
    }
  }
  const double dn = static_cast<double>(n);
  const double dk = static_cast<double>(k);
  for (std::size_t j = 0; j < k; ++j) r.mean_ranks.push_back(rank_sum[j] / dn);
  double ss = 0.0;
  for (double s : rank_sum) ss += s * s;
  const double raw = 12.0 / (dn * dk * (dk + 1.0)) * ss - 3.0 * dn * (dk + 1.0);
  const double correction = 1.0 - tie_sum / (dn * (dk * dk * dk - dk));
  if (correction <= 1e-12) return r;  // every block fully tied
  r.statistic = std::max(0.0, raw / correction);
  const boost::math::chi_squared_distribution<double> chi2(dk - 1.0);
  r.p_value = r.statistic == 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(chi2, r.statistic));
  return r;
}

double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("wilcoxon_signed_rank: length mismatch");
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) diff.push_back(a[i] - b[i]);
  const std::size_t n = diff.size();
  if (n == 0) return 1.0;
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(diff[i]);
  const std::vector<double> ranks = average_ranks(mag);
  double w_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (diff[i] > 0) w_plus += ranks[i];

  if (n <= 25) {
    // Exact null distribution of W+ over all 2^n sign assignments. Midranks
    // are multiples of 1/2, so doubled ranks are integers.
    std::vector<std::size_t> r2(n);
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      r2[i] = static_cast<std::size_t>(std::lround(2.0 * ranks[i]));
      total += r2[i];
    }
    std::vector<double> count(total + 1, 0.0);
    count[0] = 1.0;
    for (std::size_t r : r2)
      for (std::size_t s = total; s >= r; --s) {
        count[s] += count[s - r];
        if (s == r) break;
      }
    const auto w = static_cast<std::size_t>(std::lround(2.0 * w_plus));
    double lower = 0.0, upper = 0.0;
    for (std::size_t s = 0; s <= total; ++s) {
      if (s <= w) lower += count[s];
      if (s >= w) upper += count[s];
    }
    const double all = std::ldexp(1.0, static_cast<int>(n));
    return std::min(1.0, 2.0 * std::min(lower, upper) / all);
  }

  const double dn = static_cast<double>(n);
  double tie_term = 0.0;
  std::vector<double> sorted = mag;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double mean = dn * (dn + 1.0) / 4.0;
  const double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0 - tie_term / 48.0;
  if (var <= 0.0) return 1.0;
  const double z = (w_plus - mean) / std::sqrt(var);
  return std::min(1.0, 2.0 * (1.0 - normal_cdf(std::abs(z))));
}

RankReport critical_difference_ranking(const ResultMatrix& matrix, RankMetric metric,
                                       double alpha) {
  const std::size_t P = matrix.problems.size();
  const std::size_t K = matrix.methods.size();
  if (P == 0 || K == 0) throw std::invalid_argument("critical_difference_ranking: empty matrix");
  RankReport rep;
  rep.metric = metric;
  rep.alpha = alpha;
  rep.methods = matrix.methods;
  rep.problems = matrix.problems;
  rep.ranks = Matrix(P, K);

  for (std::size_t p = 0; p < P; ++p) {
    // (tier, score) per method, smaller is better.
    std::vector<std::pair<int, double>> key(K);
    for (std::size_t k = 0; k < K; ++k) {
      const auto& trials = matrix.cell(p, k);
      if (trials.size() != matrix.cell(p, 0).size())
        throw std::invalid_argument("critical_difference_ranking: matrix is not rectangular");
      std::vector<double> v;
      std::size_t feasible = 0;
      for (const TrialOutcome& o : trials) {
        if (metric == RankMetric::time) {
          v.push_back(o.total_ms);
        } else {
          v.push_back(o.best_value ? *o.best_value : kInf);
          feasible += o.best_value.has_value();
        }
      }
      const double med = median_with_inf(v);
      if (std::isfinite(med))
        key[k] = {0, med};
      else
        key[k] = {1, -static_cast<double>(feasible) / static_cast<double>(trials.size())};
    }
    std::vector<std::size_t> order(K);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
    for (std::size_t i = 0; i < K;) {
      std::size_t j = i;
      while (j + 1 < K && key[order[j + 1]] == key[order[i]]) ++j;
      const double r = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t t = i; t <= j; ++t)
        rep.ranks(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(order[t])) = r;
      i = j + 1;
    }
  }

  rep.mean_ranks.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    rep.mean_ranks[k] = rep.ranks.col(static_cast<Eigen::Index>(k)).mean();

  if (P >= 2 && K >= 2) {
    const FriedmanResult fr = friedman_test(rep.ranks, true);
    rep.friedman_statistic = fr.statistic;
    rep.friedman_p = fr.p_value;
  }
  rep.friedman_significant = rep.friedman_p < alpha;

  rep.pairwise_p = Matrix::Ones(K, K);
  rep.pairwise_p_adjusted = Matrix::Ones(K, K);
  std::vector<double> raw;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = a + 1; b < K; ++b) {
      const Vector ca = rep.ranks.col(static_cast<Eigen::Index>(a));
      const Vector cb = rep.ranks.col(static_cast<Eigen::Index>(b));
      const double pv = wilcoxon_signed_rank(std::span<const double>(ca.data(), P),
                                             std::span<const double>(cb.data(), P));
      raw.push_back(pv);
      pairs.emplace_back(a, b);
    }
  const std::vector<double> adj = holm_adjust(raw);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [a, b] = pairs[i];
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    rep.pairwise_p(ia, ib) = rep.pairwise_p(ib, ia) = raw[i];
    rep.pairwise_p_adjusted(ia, ib) = rep.pairwise_p_adjusted(ib, ia) = adj[i];
  }

  std::vector<std::size_t> by_rank(K);
  std::iota(by_rank.begin(), by_rank.end(), std::size_t{0});
  std::stable_sort(by_rank.begin(), by_rank.end(), [&](std::size_t a, std::size_t b) {
    return rep.mean_ranks[a] < rep.mean_ranks[b];
  });
  if (!rep.friedman_significant) {
    rep.cliques.push_back(by_rank);
    return rep;
  }
  const auto significant = [&](std::size_t a, std::size_t b) {
    return rep.pairwise_p_adjusted(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) <
           alpha;
  };
  std::size_t last_end = 0;
  bool have = false;
  for (std::size_t i = 0; i < K; ++i) {
    std::size_t j = i;
    while (j + 1 < K) {
      bool ok = true;
      for (std::size_t t = i; t <= j && ok; ++t) ok = !significant(by_rank[t], by_rank[j + 1]);
      if (!ok) break;
      ++j;
    }
    if (have && j <= last_end) continue;  // contained in the previous run
    rep.cliques.emplace_back(by_rank.begin() + static_cast<std::ptrdiff_t>(i),
                             by_rank.begin() + static_cast<std::ptrdiff_t>(j) + 1);
    last_end = j;
    have = true;
  }
  return rep;
}

std::vector<BudgetSummary> fixed_iteration_report(std::span<const TrialTrace> traces,
                                                  std::size_t k) {
  std::vector<BudgetSummary> out;
  for (const auto& [key, group] : group_traces(traces)) {
    std::vector<std::optional<double>> values;
    for (const TrialTrace* t : group)
      values.push_back(
          incumbent_at(*t, last_row(*t, [&](const TraceRecord& r) { return r.iteration <= k; })));
    out.push_back(summarize(key, std::move(values), static_cast<double>(k)));
  }
  return out;
}

std::vector<BudgetSummary> fixed_runtime_report(std::span<const TrialTrace> traces,
                                                std::optional<double> budget_ms) {
  const auto groups = group_traces(traces);
  std::map<std::string, double> budget;
  if (!budget_ms) {
    for (const auto& [key, group] : groups) {
      double slowest = 0.0;
      for (const TrialTrace* t : group) slowest = std::max(slowest, t->total_ms());
      auto [it, inserted] = budget.emplace(key.problem, slowest);
      if (!inserted) it->second = std::min(it->second, slowest);
    }
  }
  std::vector<BudgetSummary> out;
  for (const auto& [key, group] : groups) {
    const double T = budget_ms ? *budget_ms : budget.at(key.problem);
    std::vector<std::optional<double>> values;
    for (const TrialTrace* t : group)
      values.push_back(
          incumbent_at(*t, last_row(*t, [&](const TraceRecord& r) { return r.wall_ms <= T; })));
    out.push_back(summarize(key, std::move(values), T));
  }
  return out;
}

std::vector<std::size_t> pareto_rank(std::span<const std::pair<double, double>> points) {
  const std::size_t n = points.size();
  const auto dominates = [&](std::size_t a, std::size_t b) {
    const auto& [ta, va] = points[a];
    const auto& [tb, vb] = points[b];
    return ta <= tb && va <= vb && (ta < tb || va < vb);
  };
  std::vector<std::size_t> rank(n, 0);
  std::size_t assigned = 0;
  for (std::size_t front = 1; assigned < n; ++front) {
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
      if (rank[i] != 0) continue;
      bool dominated = false;
      for (std::size_t j = 0; j < n && !dominated; ++j)
        dominated = j != i && rank[j] == 0 && dominates(j, i);
      if (!dominated) current.push_back(i);
    }
    for (std::size_t i : current) rank[i] = front;
    assigned += current.size();
  }
  return rank;
}

nlohmann::json to_json(const RankReport& r) {
  nlohmann::json j;
  j["metric"] = r.metric == RankMetric::performance ? "performance" : "time";
  j["alpha"] = r.alpha;
  j["methods"] = r.methods;
  j["problems"] = r.problems;
  j["mean_ranks"] = r.mean_ranks;
  j["ranks"] = matrix_json(r.ranks);
  j["friedman_statistic"] = r.friedman_statistic;
  j["friedman_p"] = r.friedman_p;
  j["friedman_significant"] = r.friedman_significant;
  j["pairwise_p"] = matrix_json(r.pairwise_p);
  j["pairwise_p_adjusted"] = matrix_json(r.pairwise_p_adjusted);
  nlohmann::json cliques = nlohmann::json::array();
  for (const auto& c : r.cliques) {
    nlohmann::json names = nlohmann::json::array();
    for (std::size_t k : c) names.push_back(r.methods[k]);
    cliques.push_back(names);
  }
  j["cliques"] = cliques;
  return j;
}

nlohmann::json to_json(const BudgetSummary& s) {
  nlohmann::json j;
  j["problem"] = s.problem;
  j["method"] = s.method;
  j["n_trials"] = s.n_trials;
  j["n_feasible"] = s.n_feasible;
  j["n_infeasible"] = s.n_infeasible;
  j["min"] = number_or_null(s.min);
  j["q1"] = number_or_null(s.q1);
  j["median"] = number_or_null(s.median);
  j["q3"] = number_or_null(s.q3);
  j["max"] = number_or_null(s.max);
  j["budget"] = number_or_null(s.budget);
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& v : s.per_trial) trials.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
  j["per_trial"] = trials;
  return j;
}

}  // namespace cbo
