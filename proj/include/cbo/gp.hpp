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
#include <optional>
#include <vector>

#include <Eigen/Cholesky>

#include "cbo/dataset.hpp"
#include "cbo/types.hpp"

namespace cbo {

/// Matern-5/2 ARD kernel hyperparameters plus constant mean and noise.
struct GpHyperparameters {
  Vector lengthscales;  // one per input dimension, > 0
  double signal_variance = 1.0;
  double noise_variance = 1e-4;  // total noise, >= the configured floor
  double mean = 0.0;
};

struct GpConfig {
  std::size_t restarts = 8;          // multi-start initializations R
  std::size_t refined_starts = 2;    // best starts handed to the local optimizer
  double tolerance = 1e-6;           // on LML change per optimizer iteration
  std::size_t max_iterations = 200;  // per local optimization
  double noise_floor = 1e-6;
  double max_jitter = 1e-4;
  std::uint64_t seed = 0;
  /// Hyperparameters from a previous fit; used as the first start.
  std::optional<GpHyperparameters> warm_start;
  /// Search box (natural units).
  double min_lengthscale = 0.005, max_lengthscale = 20.0;
  double min_signal_variance = 0.05, max_signal_variance = 20.0;
  double max_noise_variance = 1.0;
  double min_mean = -3.0, max_mean = 3.0;
};

/// Immutable fitted posterior. Safe to share across threads.
struct GpModel {
  GpHyperparameters hyper;
  Matrix X;                 // training inputs (unit cube)
  Vector y;                 // training targets (standardized space)
  Standardization scale;    // maps standardized predictions back to raw units
  Eigen::MatrixXd chol_L;   // lower Cholesky factor of K + (noise + jitter) I
  Vector alpha;             // (K + noise I)^-1 (y - mean)
  double jitter = 0.0;
  double lml = 0.0;
  /// Objective values accepted by the optimizer (non-decreasing), and the
  /// LML at every multi-start initialization.
  std::vector<double> lml_trace;
  std::vector<double> start_lml;
  std::size_t lml_evaluations = 0;  // optimizer cost diagnostic

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(X.cols()); }
};

struct GpPrediction {
  Vector mean;      // standardized space
  Vector std;       // standardized space, floored at 1e-9
  Vector raw_mean;  // de-standardized view
  Vector raw_std;
};

/// Matern-5/2 ARD covariance between two points.
double matern52(const double* a, const double* b, const GpHyperparameters& h) noexcept;

/// Log marginal likelihood at fixed hyperparameters. When grad is non-null it
/// receives the gradient with respect to the packed parameter vector
/// (log lengthscales, log signal variance, log(noise - floor), mean). Throws
/// NumericalError when the kernel matrix is not positive definite.
double gp_log_marginal_likelihood(const Matrix& X, const Vector& y, const GpHyperparameters& h,
                                  double noise_floor, Vector* grad = nullptr);

/// Packs/unpacks the optimizer's parameter vector.
Vector pack_hyperparameters(const GpHyperparameters& h, double noise_floor);
GpHyperparameters unpack_hyperparameters(const Vector& theta, double noise_floor);

/// Posterior at fixed hyperparameters, with jitter escalation.
GpModel gp_condition(const Matrix& X, const Vector& y, const GpHyperparameters& h,
                     double max_jitter = 1e-4, Standardization scale = {});

/// Maximizes LML over hyperparameters (multi-start, bounded quasi-Newton).
GpModel gp_fit(const Matrix& X, const Vector& y_std, const GpConfig& config,
               Standardization scale = {});

/// Batched posterior moments. Throws std::invalid_argument on dimension mismatch.
GpPrediction gp_predict(const GpModel& model, const Matrix& Xq);

/// Number of gp_fit calls made by this thread; tests use it to check the
/// fits-per-iteration law.
std::size_t gp_fit_call_count() noexcept;

}  // namespace cbo
