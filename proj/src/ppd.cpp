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

#include "cbo/ppd.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cbo/errors.hpp"
#include "cbo/format.hpp"
#include "cbo/rng.hpp"

namespace cbo {

PredictiveDistribution PpdBatch::distribution(std::size_t query, std::size_t target) const {
  const auto p = probs_for(query, target);
  return PredictiveDistribution::bucketed(edges, std::vector<double>(p.begin(), p.end()));
}

PpdBatch PpdSurrogate::predict(const Matrix& train_x, const Matrix& train_y,
                               const Matrix& query_x, std::span<const double> edges) const {
  if (train_x.rows() == 0) throw std::invalid_argument("ppd_predict: empty dataset");
  if (train_x.rows() != train_y.rows())
    throw std::invalid_argument("ppd_predict: train_x/train_y row mismatch");
  if (query_x.rows() == 0) throw std::invalid_argument("ppd_predict: no query points");
  if (query_x.cols() != train_x.cols())
    throw std::invalid_argument("ppd_predict: query dimension mismatch");
  if (const auto msg = check_edges(edges); !msg.empty() || edges.size() < 2)
    throw std::invalid_argument("ppd_predict: invalid edge grid");
  ++calls_;

  PpdBatch out;
  out.edges.assign(edges.begin(), edges.end());
  out.n_query = static_cast<std::size_t>(query_x.rows());
  out.n_targets = static_cast<std::size_t>(train_y.cols());
  out.probs = infer(train_x, train_y, query_x, edges);

  const std::size_t B = out.n_buckets();
  if (out.probs.size() != out.n_query * out.n_targets * B) {
    std::ostringstream msg;
    msg << describe() << ": protocol violation: expected " << out.n_query << "x" << out.n_targets
        << "x" << B << " probabilities, got " << out.probs.size();
    throw InferenceError(msg.str());
  }
  for (std::size_t q = 0; q < out.n_query; ++q)
    for (std::size_t t = 0; t < out.n_targets; ++t) {
      double* p = out.probs.data() + (q * out.n_targets + t) * B;
      double sum = 0.0;
      for (std::size_t k = 0; k < B; ++k) {
        if (!std::isfinite(p[k]) || p[k] < 0.0) {
          std::ostringstream msg;
          msg << describe() << ": protocol violation: probability " << format_number(p[k])
              << " at query " << q << ", target " << t << ", bucket " << k;
          throw InferenceError(msg.str());
        }
        sum += p[k];
      }
      if (std::abs(sum - 1.0) > 1e-6) {
        std::ostringstream msg;
        msg << describe() << ": protocol violation: probabilities for query " << q << ", target "
            << t << " sum to " << format_number(sum) << " (expected 1 within 1e-6)";
        throw InferenceError(msg.str());
      }
      for (std::size_t k = 0; k < B; ++k) p[k] /= sum;
    }
  return out;
}

namespace {

/// Leave-one-out Nadaraya-Watson predictions of one target at every training
/// point, with the prior pseudo-observation included.
Vector loo_fit(const Matrix& sq_dist, const Vector& y, double h, double prior_weight) {
  Matrix w = (-sq_dist.array() / (2.0 * h * h)).exp().matrix();
  w.diagonal().setZero();
  return ((w * y).array() + prior_weight * y.mean()) / (w.rowwise().sum().array() + prior_weight);
}

/// Leave-one-out choice among multiples of the base bandwidth.
double cross_validated_bandwidth(const Matrix& sq_dist, const Vector& y, double base,
                                 double prior_weight) {
  static constexpr std::array kMultiples{0.2, 0.3, 0.45, 0.65, 1.0, 1.5};
  if (y.size() < 3) return base;
  double best_h = base;
  double best_err = std::numeric_limits<double>::infinity();
  for (double mult : kMultiples) {
    const double err = (loo_fit(sq_dist, y, base * mult, prior_weight) - y).squaredNorm();
    if (err < best_err) {
      best_err = err;
      best_h = base * mult;
    }
  }
  return best_h;
}

}  // namespace

double BandwidthRule::bandwidth(std::size_t n, std::size_t d) const {
  constexpr double kUnitStd = 0.28867513459481287;  // std of U(0, 1)
  const double nn = static_cast<double>(std::max<std::size_t>(n, 1));
  const double dd = static_cast<double>(d);
  switch (kind) {
    case Kind::cross_validated:  // base of the search grid
    case Kind::scott:
      return kUnitStd * std::pow(nn, -1.0 / (dd + 4.0));
    case Kind::silverman:
      return kUnitStd * std::pow(4.0 / (dd + 2.0), 1.0 / (dd + 4.0)) * std::pow(nn, -1.0 / (dd + 4.0));
    case Kind::fixed:
      return value;
  }
  return value;
}

ReferencePpdSurrogate::ReferencePpdSurrogate(std::size_t bucket_count, BandwidthRule rule,
                                             double prior_weight, double variance_floor)
    : bucket_count_(bucket_count),
      rule_(rule),
      prior_weight_(prior_weight),
      variance_floor_(variance_floor) {
  if (bucket_count < 10) throw std::invalid_argument("reference_ppd_surrogate: bucket_count must be >= 10");
  if (rule.kind == BandwidthRule::Kind::fixed && !(rule.value > 0.0))
    throw std::invalid_argument("reference_ppd_surrogate: fixed bandwidth must be > 0");
  if (!(prior_weight >= 0.0) || !(variance_floor > 0.0))
    throw std::invalid_argument("reference_ppd_surrogate: bad prior weight or variance floor");
}

std::uint64_t ReferencePpdSurrogate::state_fingerprint() const {
  return hash_string(describe());
}

std::string ReferencePpdSurrogate::describe() const {
  std::ostringstream s;
  s << "reference_ppd(buckets=" << bucket_count_ << ", bandwidth="
    << (rule_.kind == BandwidthRule::Kind::cross_validated ? "cv"
        : rule_.kind == BandwidthRule::Kind::scott         ? "scott"
        : rule_.kind == BandwidthRule::Kind::silverman ? "silverman"
                                                       : "fixed:" + format_number(rule_.value))
    << ", prior_weight=" << format_number(prior_weight_)
    << ", variance_floor=" << format_number(variance_floor_) << ")";
  return s.str();
}

std::vector<double> ReferencePpdSurrogate::infer(const Matrix& train_x, const Matrix& train_y,
                                                 const Matrix& query_x,
                                                 std::span<const double> edges) const {
  const Eigen::Index n = train_x.rows(), d = train_x.cols(), k = train_y.cols();
  const Eigen::Index m = query_x.rows();
  const std::size_t B = edges.size() - 1;
  const double base = rule_.bandwidth(static_cast<std::size_t>(n), static_cast<std::size_t>(d));

  Matrix train_sq(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) train_sq(i, j) = (train_x.row(i) - train_x.row(j)).squaredNorm();
  Matrix query_sq(m, n);
  for (Eigen::Index q = 0; q < m; ++q)
    for (Eigen::Index i = 0; i < n; ++i) query_sq(q, i) = (query_x.row(q) - train_x.row(i)).squaredNorm();

  std::vector<double> out(static_cast<std::size_t>(m * k) * B);
  for (Eigen::Index t = 0; t < k; ++t) {
    const Vector y = train_y.col(t);
    const double h = rule_.kind == BandwidthRule::Kind::cross_validated
                         ? cross_validated_bandwidth(train_sq, y, base, prior_weight_)
                         : base;
    // Global moments: the prior pseudo-observation's location and spread.
    const double g_mean = y.mean();
    const double g_var = (y.array() - g_mean).square().mean();
    // Squared leave-one-out residuals measure how well the smoother predicts
    // near each training point; the predictive variance averages them.
    const Vector r2 = (loo_fit(train_sq, y, h, prior_weight_) - y).array().square().matrix();
    const Matrix w = (-query_sq.array() / (2.0 * h * h)).exp().matrix();
    const Vector wsum = w.rowwise().sum().array() + prior_weight_;
    const Vector mu = ((w * y).array() + prior_weight_ * g_mean) / wsum.array();
    const Vector resid = w * r2;
    for (Eigen::Index q = 0; q < m; ++q) {
      const double var =
          (resid(q) + prior_weight_ * (g_var + (g_mean - mu(q)) * (g_mean - mu(q)))) / wsum(q) +
          variance_floor_;
      double* p = out.data() + static_cast<std::size_t>(q * k + t) * B;
      bucketize_gaussian_into(mu(q), std::sqrt(var), edges, {p, B});
    }
  }
  return out;
}

std::unique_ptr<PpdSurrogate> reference_ppd_surrogate(std::size_t bucket_count,
                                                      BandwidthRule rule) {
  return std::make_unique<ReferencePpdSurrogate>(bucket_count, rule);
}

PpdPrediction ppd_predict(const PpdSurrogate& surrogate, const Matrix& train_x,
                          const Matrix& train_y_raw, const Matrix& query_x,
                          std::size_t bucket_count, TargetWarping warping) {
  if (train_y_raw.rows() == 0 || train_y_raw.cols() == 0)
    throw std::invalid_argument("ppd_predict: empty dataset");
  PpdPrediction pred;
  Matrix y_std(train_y_raw.rows(), train_y_raw.cols());
  double lo = 0.0, hi = 0.0;
  for (Eigen::Index t = 0; t < train_y_raw.cols(); ++t) {
    const TargetWarp::Kind kind = warping == TargetWarping::none ? TargetWarp::Kind::identity
                                  : t == 0                        ? TargetWarp::Kind::minimize
                                                                  : TargetWarp::Kind::constraint;
    TargetTransform tf;
    y_std.col(t) = fit_transform(train_y_raw.col(t), kind, tf);
    pred.target_transform.push_back(tf);
    lo = std::min(lo, y_std.col(t).minCoeff());
    hi = std::max(hi, y_std.col(t).maxCoeff());
  }
  const std::vector<double> edges = equal_width_edges(lo - 3.0, hi + 3.0, bucket_count);
  pred.batch = surrogate.predict(train_x, y_std, query_x, edges);
  return pred;
}

PpdPrediction ppd_predict(const PpdSurrogate& surrogate, const Dataset& data, PpdTargets targets,
                          const Matrix& query_x, std::size_t bucket_count,
                          TargetWarping warping) {
  const Eigen::Index k =
      targets == PpdTargets::objective_only ? 1 : 1 + static_cast<Eigen::Index>(data.n_constraints);
  Matrix Y(static_cast<Eigen::Index>(data.size()), k);
  Y.col(0) = data.y;
  if (k > 1) Y.rightCols(k - 1) = data.g_mat;
  return ppd_predict(surrogate, data.X, Y, query_x, bucket_count, warping);
}

}  // namespace cbo
