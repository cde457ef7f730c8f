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
#include <span>
#include <string_view>
#include <vector>

namespace cbo {

/// Per-query posterior predictive: Gaussian moments or a piecewise-constant
/// bucketed distribution.
struct PredictiveDistribution {
  enum class Kind { gaussian, bucketed };

  Kind kind = Kind::gaussian;
  double mean = 0.0;  // gaussian
  double std = 0.0;   // gaussian
  std::vector<double> edges;  // bucketed: B + 1 strictly increasing
  std::vector<double> probs;  // bucketed: B nonnegative, sum 1

  static PredictiveDistribution gaussian(double mean, double std);
  /// Throws std::invalid_argument unless the invariants hold.
  static PredictiveDistribution bucketed(std::vector<double> edges, std::vector<double> probs);

  std::size_t bucket_count() const noexcept { return probs.size(); }
};

double normal_cdf(double z) noexcept;
double normal_pdf(double z) noexcept;
/// log of normal_cdf, accurate in the far lower tail where the CDF underflows.
double log_normal_cdf(double z) noexcept;

/// B + 1 equally spaced edges from lo to hi.
std::vector<double> equal_width_edges(double lo, double hi, std::size_t buckets);

/// Gaussian mass per bucket, tails folded into the end buckets.
std::vector<double> bucketize_gaussian(double mean, double std, std::span<const double> edges);
/// Same, writing into a caller-provided buffer of edges.size() - 1 values.
void bucketize_gaussian_into(double mean, double std, std::span<const double> edges,
                             std::span<double> probs);

/// Midpoint-rule mean of a bucketed distribution.
double bucketed_mean(std::span<const double> edges, std::span<const double> probs);

/// Checks edge monotonicity and normalization; returns a message describing
/// the first violation, or an empty string.
std::string_view check_edges(std::span<const double> edges);

}  // namespace cbo
