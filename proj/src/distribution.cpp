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

#include "cbo/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cbo {

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0); }

double log_normal_cdf(double z) noexcept {
  if (z > -37.0) return std::log(normal_cdf(z));
  // Asymptotic series of the Mills ratio; the truncation error is far below
  // double precision this deep in the tail.
  const double r = 1.0 / (z * z);
  const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
  return -0.5 * z * z - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double normal_pdf(double z) noexcept {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

PredictiveDistribution PredictiveDistribution::gaussian(double mean, double std) {
  if (!(std >= 0.0)) throw std::invalid_argument("PredictiveDistribution: std must be >= 0");
  PredictiveDistribution d;
  d.kind = Kind::gaussian;
  d.mean = mean;
  d.std = std;
  return d;
}

PredictiveDistribution PredictiveDistribution::bucketed(std::vector<double> edges,
                                                        std::vector<double> probs) {
  if (edges.size() != probs.size() + 1 || probs.empty())
    throw std::invalid_argument("PredictiveDistribution: need B >= 1 probs and B + 1 edges");
  if (const auto msg = check_edges(edges); !msg.empty())
    throw std::invalid_argument(std::string("PredictiveDistribution: ") + std::string(msg));
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("PredictiveDistribution: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("PredictiveDistribution: probabilities do not sum to 1");
  PredictiveDistribution d;
  d.kind = Kind::bucketed;
  d.edges = std::move(edges);
  d.probs = std::move(probs);
  return d;
}

std::vector<double> equal_width_edges(double lo, double hi, std::size_t buckets) {
  if (buckets == 0 || !(hi > lo)) throw std::invalid_argument("equal_width_edges: bad range");
  std::vector<double> e(buckets + 1);
  const double w = (hi - lo) / static_cast<double>(buckets);
  for (std::size_t k = 0; k <= buckets; ++k) e[k] = lo + w * static_cast<double>(k);
  e.back() = hi;
  return e;
}

void bucketize_gaussian_into(double mean, double std, std::span<const double> edges,
                             std::span<double> probs) {
  const std::size_t B = probs.size();
  // Telescoping CDF differences with the outer edges at -inf / +inf, so the
  // result sums to 1 up to rounding and the tails land in the end buckets.
  // Beyond 10 standard deviations the CDF is 0 or 1 to double precision
  // (the neglected mass is below 1e-23), so only the inner edges need erfc.
  const auto inner_begin = static_cast<std::size_t>(
      std::lower_bound(edges.begin() + 1, edges.end() - 1, mean - 10.0 * std) - edges.begin());
  const auto inner_end = static_cast<std::size_t>(
      std::upper_bound(edges.begin() + 1, edges.end() - 1, mean + 10.0 * std) - edges.begin());
  double prev = 0.0;
  for (std::size_t k = 0; k < B; ++k) {
    const std::size_t e = k + 1;  // upper edge of bucket k
    double next;
    if (e == B || e >= inner_end) next = 1.0;
    else if (e < inner_begin) next = 0.0;
    else next = normal_cdf((edges[e] - mean) / std);
    probs[k] = std::max(next - prev, 0.0);
    prev = std::max(prev, next);
  }
}

std::vector<double> bucketize_gaussian(double mean, double std, std::span<const double> edges) {
  if (edges.size() < 2) throw std::invalid_argument("bucketize_gaussian: need >= 2 edges");
  if (!(std > 0.0)) throw std::invalid_argument("bucketize_gaussian: std must be > 0");
  std::vector<double> probs(edges.size() - 1);
  bucketize_gaussian_into(mean, std, edges, probs);
  return probs;
}

double bucketed_mean(std::span<const double> edges, std::span<const double> probs) {
  double m = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) m += probs[k] * 0.5 * (edges[k] + edges[k + 1]);
  return m;
}

std::string_view check_edges(std::span<const double> edges) {
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (!std::isfinite(edges[k])) return "non-finite bucket edge";
    if (k > 0 && !(edges[k] > edges[k - 1])) return "bucket edges not strictly increasing";
  }
  return {};
}

}  // namespace cbo
