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

#include "cbo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "cbo/errors.hpp"
#include "cbo/format.hpp"
#include "cbo/rng.hpp"

namespace cbo {
namespace {

constexpr double kSqrt5 = 2.23606797749978969641;
constexpr double kStdFloor = 1e-9;
constexpr double kMinNoiseExcess = 1e-9;

thread_local std::size_t t_fit_calls = 0;

/// Matern-5/2 correlation as a function of the scaled distance r.
inline double matern_corr(double r) noexcept {
  const double s = kSqrt5 * r;
  return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

/// Pairwise squared coordinate differences, cached once per fit: the
/// optimizer re-evaluates the kernel many times on the same inputs.
struct PairCache {
  Eigen::Index n = 0;
  Eigen::Index d = 0;
  std::vector<Eigen::MatrixXd> sq_diff;  // per dimension, n x n

  explicit PairCache(const Matrix& X) : n(X.rows()), d(X.cols()), sq_diff(X.cols()) {
    for (Eigen::Index j = 0; j < d; ++j) {
      Eigen::MatrixXd& D = sq_diff[static_cast<std::size_t>(j)];
      D.resize(n, n);
      for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
          const double diff = X(a, j) - X(b, j);
          D(a, b) = diff * diff;
        }
    }
  }

  /// Scaled distances r_ab for the given lengthscales.
  Eigen::MatrixXd distances(const Vector& lengthscales) const {
    Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < d; ++j)
      r2.noalias() += sq_diff[static_cast<std::size_t>(j)] / (lengthscales(j) * lengthscales(j));
    return r2.cwiseSqrt();
  }
};

struct Bounds {
  Vector lower;
  Vector upper;
};

Bounds parameter_bounds(std::size_t d, const GpConfig& c) {
  const auto n = static_cast<Eigen::Index>(d) + 3;
  Bounds b{Vector(n), Vector(n)};
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d); ++j) {
    b.lower(j) = std::log(c.min_lengthscale);
    b.upper(j) = std::log(c.max_lengthscale);
  }
  const auto k = static_cast<Eigen::Index>(d);
  b.lower(k) = std::log(c.min_signal_variance);
  b.upper(k) = std::log(c.max_signal_variance);
  b.lower(k + 1) = std::log(kMinNoiseExcess);
  b.upper(k + 1) = std::log(c.max_noise_variance);
  b.lower(k + 2) = c.min_mean;
  b.upper(k + 2) = c.max_mean;
  return b;
}

Vector clamp(const Vector& x, const Bounds& b) { return x.cwiseMax(b.lower).cwiseMin(b.upper); }

/// Negative-LML objective with cached pair distances. Returns +inf when the
/// kernel matrix is numerically indefinite at this point.
class NegLml {
 public:
  NegLml(const Matrix& X, const Vector& y, double noise_floor)
      : cache_(X), y_(y), noise_floor_(noise_floor) {}

  double operator()(const Vector& theta, Vector* grad) const {
    ++evaluations;
    const GpHyperparameters h = unpack_hyperparameters(theta, noise_floor_);
    const Eigen::Index n = cache_.n;
    const Eigen::MatrixXd r = cache_.distances(h.lengthscales);
    Eigen::MatrixXd corr(n, n);
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index a = 0; a < n; ++a) corr(a, b) = matern_corr(r(a, b));
    Eigen::MatrixXd K = h.signal_variance * corr;
    K.diagonal().array() += h.noise_variance;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const Vector resid = y_.array() - h.mean;
    const Vector alpha = llt.solve(resid);
    const Eigen::MatrixXd& L = llt.matrixLLT();
    double log_det_half = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det_half += std::log(L(i, i));
    const double lml = -0.5 * resid.dot(alpha) - log_det_half -
                       0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    if (!std::isfinite(lml)) return std::numeric_limits<double>::infinity();
    if (grad != nullptr) {
      const Eigen::Index d = cache_.d;
      grad->resize(d + 3);
      Eigen::MatrixXd W = alpha * alpha.transpose();
      W -= llt.solve(Eigen::MatrixXd::Identity(n, n));
      // dK/dlog(ell_j) = sigma^2 (5/3)(1 + sqrt5 r) exp(-sqrt5 r) (diff_j/ell_j)^2.
      Eigen::MatrixXd M(n, n);
      for (Eigen::Index b = 0; b < n; ++b)
        for (Eigen::Index a = 0; a < n; ++a) {
          const double s = kSqrt5 * r(a, b);
          M(a, b) = W(a, b) * h.signal_variance * (5.0 / 3.0) * (1.0 + s) * std::exp(-s);
        }
      for (Eigen::Index j = 0; j < d; ++j) {
        const double ell = h.lengthscales(j);
        (*grad)(j) =
            -0.5 * M.cwiseProduct(cache_.sq_diff[static_cast<std::size_t>(j)]).sum() / (ell * ell);
      }
      (*grad)(d) = -0.5 * h.signal_variance * W.cwiseProduct(corr).sum();
      (*grad)(d + 1) = -0.5 * W.trace() * (h.noise_variance - noise_floor_);
      (*grad)(d + 2) = -alpha.sum();
    }
    return -lml;
  }

  mutable std::size_t evaluations = 0;

 private:
  PairCache cache_;
  const Vector& y_;
  double noise_floor_;
};

struct LocalResult {
  Vector theta;
  double value;  // negative LML
  std::vector<double> trace;  // LML after each accepted step
};

/// Bounded quasi-Newton: BFGS on u with theta = lo + (hi - lo) * sigmoid(u),
/// which keeps every iterate strictly inside the box. Only improving steps
/// are accepted, so the LML trace is monotone.
LocalResult minimize_box(const NegLml& fn, const Vector& theta0, const Bounds& box,
                         const GpConfig& c) {
  const Eigen::Index n = theta0.size();
  const Vector width = box.upper - box.lower;
  const auto to_theta = [&](const Vector& u) {
    return Vector(box.lower.array() + width.array() / (1.0 + (-u.array()).exp()));
  };
  const auto objective = [&](const Vector& u, Vector* grad) {
    const Vector theta = to_theta(u);
    Vector g_theta;
    const double v = fn(theta, grad != nullptr ? &g_theta : nullptr);
    if (grad != nullptr && std::isfinite(v)) {
      const Eigen::ArrayXd s = 1.0 / (1.0 + (-u.array()).exp());
      *grad = g_theta.array() * width.array() * s * (1.0 - s);
    }
    return v;
  };
  Vector u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double frac = std::clamp((theta0(i) - box.lower(i)) / width(i), 1e-6, 1.0 - 1e-6);
    u(i) = std::log(frac / (1.0 - frac));
  }
  Vector g;
  double f = objective(u, &g);
  LocalResult res{to_theta(u), f, {}};
  if (!std::isfinite(f)) return res;
  res.trace.push_back(-f);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  for (std::size_t it = 0; it < c.max_iterations; ++it) {
    if (g.cwiseAbs().maxCoeff() < 1e-10) break;
    Vector p = -(H * g);
    double slope = p.dot(g);
    if (!(slope < 0.0)) {
      H.setIdentity();
      p = -g;
      slope = p.dot(g);
    }
    // Cap the first trial step at 3 units in the transformed space.
    const double pmax = p.cwiseAbs().maxCoeff();
    double t = pmax > 3.0 ? 3.0 / pmax : 1.0;
    bool accepted = false;
    Vector u_new, g_new;
    double f_new = f;
    for (int ls = 0; ls < 30; ++ls) {
      u_new = u + t * p;
      f_new = objective(u_new, &g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * t * slope && f_new < f) {
        accepted = true;
        break;
      }
      // Quadratic interpolation of the backtracking step, safeguarded.
      double t_next = 0.5 * t;
      if (std::isfinite(f_new)) {
        const double denom = 2.0 * (f_new - f - t * slope);
        if (denom > 0.0) t_next = std::clamp(-slope * t * t / denom, 0.1 * t, 0.5 * t);
      }
      t = t_next;
    }
    if (!accepted) {
      if (H.isIdentity()) break;
      H.setIdentity();  // retry once along steepest descent
      scaled = false;
      continue;
    }
    const Vector s = u_new - u;
    const Vector yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12) {
      if (!scaled) {
        H *= sy / yv.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Vector Hy = H * yv;
      H += ((sy + yv.dot(Hy)) * rho * rho) * (s * s.transpose()) -
           rho * (Hy * s.transpose() + s * Hy.transpose());
    }
    const double improvement = f - f_new;
    u = u_new;
    g = g_new;
    f = f_new;
    res.trace.push_back(-f);
    if (improvement < c.tolerance) break;
  }
  res.theta = to_theta(u);
  res.value = f;
  return res;
}

GpHyperparameters default_hyperparameters(std::size_t d) {
  GpHyperparameters h;
  h.lengthscales = Vector::Constant(static_cast<Eigen::Index>(d),
                                    std::clamp(0.25 * std::sqrt(static_cast<double>(d)), 0.1, 2.0));
  h.signal_variance = 1.0;
  h.noise_variance = 1e-4;
  h.mean = 0.0;
  return h;
}

}  // namespace

double matern52(const double* a, const double* b, const GpHyperparameters& h) noexcept {
  double r2 = 0.0;
  for (Eigen::Index j = 0; j < h.lengthscales.size(); ++j) {
    const double diff = (a[j] - b[j]) / h.lengthscales(j);
    r2 += diff * diff;
  }
  return h.signal_variance * matern_corr(std::sqrt(r2));
}

Vector pack_hyperparameters(const GpHyperparameters& h, double noise_floor) {
  const Eigen::Index d = h.lengthscales.size();
  Vector theta(d + 3);
  theta.head(d) = h.lengthscales.array().log();
  theta(d) = std::log(h.signal_variance);
  theta(d + 1) = std::log(std::max(h.noise_variance - noise_floor, kMinNoiseExcess));
  theta(d + 2) = h.mean;
  return theta;
}

GpHyperparameters unpack_hyperparameters(const Vector& theta, double noise_floor) {
  const Eigen::Index d = theta.size() - 3;
  GpHyperparameters h;
  h.lengthscales = theta.head(d).array().exp();
  h.signal_variance = std::exp(theta(d));
  h.noise_variance = noise_floor + std::exp(theta(d + 1));
  h.mean = theta(d + 2);
  return h;
}

double gp_log_marginal_likelihood(const Matrix& X, const Vector& y, const GpHyperparameters& h,
                                  double noise_floor, Vector* grad) {
  if (X.rows() != y.size()) throw std::invalid_argument("gp_log_marginal_likelihood: X/y size");
  NegLml fn(X, y, noise_floor);
  const double v = fn(pack_hyperparameters(h, noise_floor), grad);
  if (!std::isfinite(v))
    throw NumericalError("gp_log_marginal_likelihood: kernel matrix not positive definite");
  if (grad != nullptr) *grad = -*grad;
  return -v;
}

GpModel gp_condition(const Matrix& X, const Vector& y, const GpHyperparameters& h,
                     double max_jitter, Standardization scale) {
  if (X.rows() != y.size()) throw std::invalid_argument("gp_condition: X/y size mismatch");
  if (X.rows() == 0) throw std::invalid_argument("gp_condition: empty training set");
  if (h.lengthscales.size() != X.cols())
    throw std::invalid_argument("gp_condition: lengthscale count != input dimension");
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) K(a, b) = K(b, a) = matern52(&X(a, 0), &X(b, 0), h);
  K.diagonal().array() += h.noise_variance;

  GpModel m;
  m.hyper = h;
  m.X = X;
  m.y = y;
  m.scale = scale;
  double jitter = 0.0;
  while (true) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(Kj);
    if (llt.info() == Eigen::Success) {
      m.chol_L = llt.matrixL();
      m.jitter = jitter;
      break;
    }
    jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
    if (jitter > max_jitter * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "GP kernel matrix is ill-conditioned: Cholesky failed even with diagonal jitter "
          << format_number(max_jitter) << " (n=" << n << ", noise variance "
          << format_number(h.noise_variance) << "); training inputs are likely near-duplicates";
      throw NumericalError(msg.str());
    }
  }
  const Vector resid = y.array() - h.mean;
  m.alpha = m.chol_L.triangularView<Eigen::Lower>().solve(resid);
  m.chol_L.triangularView<Eigen::Lower>().transpose().solveInPlace(m.alpha);
  double log_det_half = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det_half += std::log(m.chol_L(i, i));
  m.lml = -0.5 * resid.dot(m.alpha) - log_det_half -
          0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  return m;
}

GpModel gp_fit(const Matrix& X, const Vector& y_std, const GpConfig& config,
               Standardization scale) {
  ++t_fit_calls;
  if (X.rows() != y_std.size()) throw std::invalid_argument("gp_fit: X/y size mismatch");
  if (X.rows() == 0) throw std::invalid_argument("gp_fit: empty training set");
  const auto d = static_cast<std::size_t>(X.cols());
  if (X.rows() == 1) {
    // Prior model centred on the single observation with unit signal.
    GpHyperparameters h = default_hyperparameters(d);
    h.noise_variance = config.noise_floor;
    h.mean = y_std(0);
    GpModel m = gp_condition(X, y_std, h, config.max_jitter, scale);
    m.lml_trace = {m.lml};
    m.start_lml = {m.lml};
    return m;
  }

  const Bounds box = parameter_bounds(d, config);
  const NegLml fn(X, y_std, config.noise_floor);

  std::vector<Vector> starts;
  if (config.warm_start) starts.push_back(clamp(pack_hyperparameters(*config.warm_start, config.noise_floor), box));
  starts.push_back(clamp(pack_hyperparameters(default_hyperparameters(d), config.noise_floor), box));
  CounterRng rng(derive_seed(config.seed, "gp-starts"));
  while (starts.size() < std::max<std::size_t>(config.restarts, 1)) {
    Vector theta(box.lower.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i)
      theta(i) = box.lower(i) + rng.uniform() * (box.upper(i) - box.lower(i));
    // Random starts with tiny noise are rarely useful; keep noise moderate.
    theta(static_cast<Eigen::Index>(d) + 1) = std::log(1e-3) + rng.uniform() * std::log(1e2);
    starts.push_back(theta);
  }
  starts.resize(std::max<std::size_t>(config.restarts, 1));

  std::vector<std::pair<double, std::size_t>> ranked;
  std::vector<double> start_lml;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const double v = fn(starts[k], nullptr);
    start_lml.push_back(-v);
    ranked.emplace_back(v, k);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  LocalResult best{starts[ranked.front().second], ranked.front().first, {-ranked.front().first}};
  // A warm start from the previous iteration is usually already near the
  // optimum; refining only the best start then keeps per-iteration cost low.
  const std::size_t wanted = config.warm_start ? 1 : std::max<std::size_t>(config.refined_starts, 1);
  const std::size_t n_refine = std::min(wanted, ranked.size());
  for (std::size_t k = 0; k < n_refine; ++k) {
    if (!std::isfinite(ranked[k].first)) break;
    LocalResult r = minimize_box(fn, starts[ranked[k].second], box, config);
    if (r.value < best.value || (k == 0 && r.value <= best.value)) best = std::move(r);
  }
  if (!std::isfinite(best.value)) {
    // Every start was indefinite; fall back to a noisy default and let the
    // jitter escalation decide.
    best.theta = starts.front();
  }
  GpModel m = gp_condition(X, y_std, unpack_hyperparameters(best.theta, config.noise_floor),
                           config.max_jitter, scale);
  m.lml_trace = std::move(best.trace);
  m.start_lml = std::move(start_lml);
  m.lml_evaluations = fn.evaluations;
  return m;
}

GpPrediction gp_predict(const GpModel& model, const Matrix& Xq) {
  if (Xq.cols() != model.X.cols())
    throw std::invalid_argument("gp_predict: query dimension " + std::to_string(Xq.cols()) +
                                " != model dimension " + std::to_string(model.X.cols()));
  const Eigen::Index m = Xq.rows();
  const Eigen::Index n = model.X.rows();
  const GpHyperparameters& h = model.hyper;
  Eigen::MatrixXd Ks(n, m);  // column q = k(X, x_q)
  for (Eigen::Index q = 0; q < m; ++q)
    for (Eigen::Index a = 0; a < n; ++a) Ks(a, q) = matern52(&model.X(a, 0), &Xq(q, 0), h);
  GpPrediction p;
  p.mean = (Ks.transpose() * model.alpha).array() + h.mean;
  model.chol_L.triangularView<Eigen::Lower>().solveInPlace(Ks);
  const Vector reduction = Ks.colwise().squaredNorm().transpose();
  p.std.resize(m);
  for (Eigen::Index q = 0; q < m; ++q)
    p.std(q) = std::max(std::sqrt(std::max(h.signal_variance - reduction(q), 0.0)), kStdFloor);
  p.raw_mean = p.mean.array() * model.scale.std + model.scale.mean;
  p.raw_std = p.std * model.scale.std;
  return p;
}

std::size_t gp_fit_call_count() noexcept { return t_fit_calls; }

}  // namespace cbo
