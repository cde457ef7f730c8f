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

#include "cbo/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <vector>
#include <limits>
#include <stdexcept>

namespace cbo {

Standardization fit_standardization(const Vector& y) {
  Standardization s;
  if (y.size() == 0) return s;
  s.mean = y.mean();
  if (y.size() > 1) {
    const double var = (y.array() - s.mean).square().sum() / static_cast<double>(y.size() - 1);
    const double sd = std::sqrt(var);
    // Relative threshold: values equal up to rounding count as constant.
    if (sd > 1e-12 * std::max(1.0, std::abs(s.mean))) s.std = sd;
  }
  return s;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  return m;
}

}  // namespace

double TargetWarp::apply(double y) const noexcept {
  switch (kind) {
    case Kind::identity:
      return y;
    case Kind::minimize: {
      const double u = (y - anchor) / scale;
      return u >= 0.0 ? std::log1p(u) : u;
    }
    case Kind::constraint: {
      const double u = y / scale;
      return u >= 0.0 ? std::log1p(u) : -std::log1p(-u);
    }
  }
  return y;
}

TargetWarp fit_objective_warp(const Vector& y) {
  TargetWarp w;
  w.kind = TargetWarp::Kind::minimize;
  if (y.size() == 0) return w;
  w.anchor = y.minCoeff();
  std::vector<double> dist;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y(i) > w.anchor) dist.push_back(y(i) - w.anchor);
  const double m = median_of(dist);
  w.scale = m > 0.0 && std::isfinite(m) ? m : 1.0;
  return w;
}

TargetWarp fit_constraint_warp(const Vector& g) {
  TargetWarp w;
  w.kind = TargetWarp::Kind::constraint;
  std::vector<double> mag;
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (g(i) != 0.0) mag.push_back(std::abs(g(i)));
  const double m = median_of(mag);
  w.scale = m > 0.0 && std::isfinite(m) ? m : 1.0;
  return w;
}

Vector apply_warp(const TargetWarp& w, const Vector& y) {
  Vector out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) out(i) = w.apply(y(i));
  return out;
}

bool heavy_tailed(const Vector& y, double ratio) {
  if (y.size() < 3) return false;
  const std::vector<double> v(y.data(), y.data() + y.size());
  const double med = median_of(v);
  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - med);
  const double max_dev = *std::max_element(dev.begin(), dev.end());
  const double mad = median_of(dev);
  if (max_dev == 0.0) return false;
  return !(mad > 0.0) || max_dev > ratio * mad;
}

Vector fit_transform(const Vector& y, TargetWarp::Kind kind, TargetTransform& out) {
  if (!heavy_tailed(y)) kind = TargetWarp::Kind::identity;
  out.warp = kind == TargetWarp::Kind::minimize     ? fit_objective_warp(y)
             : kind == TargetWarp::Kind::constraint ? fit_constraint_warp(y)
                                                    : TargetWarp{};
  const Vector warped = apply_warp(out.warp, y);
  out.scale = fit_standardization(warped);
  return (warped.array() - out.scale.mean) / out.scale.std;
}

Dataset::Dataset(std::size_t d, std::size_t g)
    : X(0, static_cast<Eigen::Index>(d)),
      raw_X(0, static_cast<Eigen::Index>(d)),
      g_mat(0, static_cast<Eigen::Index>(g)),
      n_constraints(g) {}

void Dataset::append(std::span<const double> unit_x, std::span<const double> raw_x,
                     const EvalResult& eval) {
  const std::size_t d = dimension();
  if (unit_x.size() != d || raw_x.size() != d || eval.g.size() != n_constraints)
    throw std::invalid_argument("Dataset::append: shape mismatch");
  const Eigen::Index n = X.rows();
  X.conservativeResize(n + 1, Eigen::NoChange);
  raw_X.conservativeResize(n + 1, Eigen::NoChange);
  g_mat.conservativeResize(n + 1, Eigen::NoChange);
  y.conservativeResize(n + 1);
  for (std::size_t j = 0; j < d; ++j) {
    X(n, static_cast<Eigen::Index>(j)) = unit_x[j];
    raw_X(n, static_cast<Eigen::Index>(j)) = raw_x[j];
  }
  for (std::size_t i = 0; i < n_constraints; ++i)
    g_mat(n, static_cast<Eigen::Index>(i)) = eval.g[i];
  y(n) = eval.f;
  y_scale = fit_standardization(y);
  y_std = (y.array() - y_scale.mean) / y_scale.std;
}

double Dataset::min_distance(std::span<const double> unit_x) const {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double dist = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      dist = std::max(dist, std::abs(X(i, j) - unit_x[static_cast<std::size_t>(j)]));
    best = std::min(best, dist);
  }
  return best;
}

}  // namespace cbo
