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

#include "cbo/problems.hpp"
#include "cbo/types.hpp"

namespace cbo {

/// Affine standardization y_std = (y - mean) / std, with std := 1 for
/// constant targets.
struct Standardization {
  double mean = 0.0;
  double std = 1.0;

  double apply(double y) const noexcept { return (y - mean) / std; }
  double invert(double z) const noexcept { return mean + std * z; }
};

Standardization fit_standardization(const Vector& y);

/// Monotone output warp applied before standardization so that a few huge
/// values (e.g. penalized or strongly violated points) do not flatten the
/// informative region of a target.
///   minimize:   w(y) = log1p((y - anchor) / scale)   anchor = min y
///   constraint: w(g) = sign(g) log1p(|g| / scale)     keeps w(0) = 0
/// scale is the median distance from the anchor, so typical values stay in
/// the near-linear part of log1p. Queries below the anchor are extended
/// linearly to keep w defined and monotone on the whole line.
inline constexpr double kHeavyTailRatio = 8.0;

struct TargetWarp {
  enum class Kind { identity, minimize, constraint };
  Kind kind = Kind::identity;
  double anchor = 0.0;
  double scale = 1.0;

  double apply(double y) const noexcept;
};

TargetWarp fit_objective_warp(const Vector& y);
TargetWarp fit_constraint_warp(const Vector& g);
Vector apply_warp(const TargetWarp& w, const Vector& y);

/// Warp followed by standardization; the model-space image of a raw value is
/// scale.apply(warp.apply(v)).
struct TargetTransform {
  TargetWarp warp;
  Standardization scale;

  double apply(double y) const noexcept { return scale.apply(warp.apply(y)); }
};

/// Robust tail test: max |y - median| exceeds ratio times the median
/// absolute deviation.
bool heavy_tailed(const Vector& y, double ratio = kHeavyTailRatio);

/// Fits the transform and returns the transformed targets. The requested
/// warp is applied only to heavy-tailed targets; others are standardized.
Vector fit_transform(const Vector& y, TargetWarp::Kind kind, TargetTransform& out);

/// Observations gathered during one trial.
struct Dataset {
  Matrix X;      // n x d, unit-cube coordinates
  Matrix raw_X;  // n x d, problem units
  Vector y;      // n objective values
  Vector y_std;  // standardized copy of y
  Standardization y_scale;
  Matrix g_mat;  // n x G constraint values
  std::size_t n_constraints = 0;

  Dataset() = default;
  Dataset(std::size_t d, std::size_t n_constraints);

  std::size_t size() const noexcept { return static_cast<std::size_t>(X.rows()); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(X.cols()); }

  /// Appends one evaluated point and refreshes the standardized copy.
  void append(std::span<const double> unit_x, std::span<const double> raw_x,
              const EvalResult& eval);

  /// Smallest max-norm distance from u to any stored unit-cube row.
  double min_distance(std::span<const double> unit_x) const;
};

}  // namespace cbo
