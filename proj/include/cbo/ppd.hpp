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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cbo/dataset.hpp"
#include "cbo/distribution.hpp"
#include "cbo/types.hpp"

namespace cbo {

inline constexpr std::size_t kDefaultBucketCount = 1000;

/// Bucketed predictions for m queries x k targets on one shared edge grid.
struct PpdBatch {
  std::vector<double> edges;  // B + 1
  std::size_t n_query = 0;
  std::size_t n_targets = 0;
  std::vector<double> probs;  // [query][target][bucket], row-major

  std::size_t n_buckets() const noexcept { return edges.empty() ? 0 : edges.size() - 1; }
  std::span<const double> probs_for(std::size_t query, std::size_t target) const noexcept {
    return {probs.data() + (query * n_targets + target) * n_buckets(), n_buckets()};
  }
  PredictiveDistribution distribution(std::size_t query, std::size_t target) const;
};

/// A frozen, fit-free predictor mapping (training data, queries) to bucketed
/// predictive distributions for every target in one inference call.
class PpdSurrogate {
 public:
  virtual ~PpdSurrogate() = default;

  /// One inference. train_y is n x k, already standardized by the caller.
  /// The output is validated (shape, finiteness, normalization within 1e-6)
  /// and renormalized to sum to 1; any violation raises InferenceError.
  PpdBatch predict(const Matrix& train_x, const Matrix& train_y, const Matrix& query_x,
                   std::span<const double> edges) const;

  std::size_t inference_call_count() const noexcept { return calls_.load(); }

  /// Hash of everything that determines predictions. Never changes after
  /// construction: predict must not mutate the model.
  virtual std::uint64_t state_fingerprint() const = 0;
  virtual std::string describe() const = 0;

 protected:
  virtual std::vector<double> infer(const Matrix& train_x, const Matrix& train_y,
                                    const Matrix& query_x, std::span<const double> edges) const = 0;

 private:
  mutable std::atomic<std::size_t> calls_{0};
};

/// Kernel bandwidth in unit-cube coordinates. cross_validated picks, per
/// inference, the multiple of Scott's bandwidth with the smallest
/// leave-one-out error summed over the standardized targets.
struct BandwidthRule {
  enum class Kind { cross_validated, scott, silverman, fixed };
  Kind kind = Kind::cross_validated;
  double value = 0.0;  // fixed bandwidth when kind == fixed

  double bandwidth(std::size_t n, std::size_t d) const;
};

/// Nadaraya-Watson stand-in for a pre-trained PFN: per query, a
/// kernel-weighted Gaussian per target (weighted mean; variance = kernel
/// average of the neighbours' squared leave-one-out residuals plus a floor;
/// both shrunk towards the global moments by a prior pseudo-observation),
/// bucketized on the supplied grid.
class ReferencePpdSurrogate final : public PpdSurrogate {
 public:
  explicit ReferencePpdSurrogate(std::size_t bucket_count = kDefaultBucketCount,
                                 BandwidthRule rule = {}, double prior_weight = 0.05,
                                 double variance_floor = 1e-4);

  std::size_t bucket_count() const noexcept { return bucket_count_; }
  std::uint64_t state_fingerprint() const override;
  std::string describe() const override;

 protected:
  std::vector<double> infer(const Matrix& train_x, const Matrix& train_y, const Matrix& query_x,
                            std::span<const double> edges) const override;

 private:
  std::size_t bucket_count_;
  BandwidthRule rule_;
  double prior_weight_;
  double variance_floor_;
};

std::unique_ptr<PpdSurrogate> reference_ppd_surrogate(std::size_t bucket_count = kDefaultBucketCount,
                                                      BandwidthRule rule = {});

enum class PpdTargets { objective_only, objective_and_constraints };

/// Output handling before bucketing: plain standardization, or the monotone
/// warps of TargetWarp (column 0 as an objective to minimize, the remaining
/// columns as constraints) followed by standardization.
enum class TargetWarping { none, monotone };

/// Result of ppd_predict: bucketed distributions in transformed target
/// space, with the per-target transform needed to map thresholds.
struct PpdPrediction {
  PpdBatch batch;
  std::vector<TargetTransform> target_transform;  // one per target column

  /// Model-space threshold equivalent to "value <= raw_threshold".
  double standardized_threshold(std::size_t target, double raw_threshold = 0.0) const {
    return target_transform[target].apply(raw_threshold);
  }
};

/// Transforms each target column independently, builds the shared grid of
/// bucket_count equal-width buckets over [min - 3 spread, max + 3 spread] of
/// the transformed targets (spread = one standard deviation = 1), and
/// performs exactly one inference.
PpdPrediction ppd_predict(const PpdSurrogate& surrogate, const Matrix& train_x,
                          const Matrix& train_y_raw, const Matrix& query_x,
                          std::size_t bucket_count = kDefaultBucketCount,
                          TargetWarping warping = TargetWarping::none);

/// Dataset form: targets are the objective, optionally followed by every
/// constraint column.
PpdPrediction ppd_predict(const PpdSurrogate& surrogate, const Dataset& data, PpdTargets targets,
                          const Matrix& query_x, std::size_t bucket_count = kDefaultBucketCount,
                          TargetWarping warping = TargetWarping::none);

}  // namespace cbo
