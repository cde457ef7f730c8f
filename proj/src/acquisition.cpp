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

#include "cbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cbo {

double penalty_transform(double f, std::span<const double> g, double rho) {
  double violation = 0.0;
  for (double gi : g) {
    const double v = std::max(0.0, gi);
    violation += v * v;
  }
  return violation == 0.0 ? f : f + rho * violation;
}

PenaltyState update_rho(PenaltyState state, bool improved) {
  if (improved) {
    state.stall_count = 0;
    return state;
  }
  if (++state.stall_count >= kStallLimit) {
    state.rho *= kRhoGrowth;
    state.stall_count = 0;
  }
  return state;
}

double expected_improvement_gaussian(double f_star, double mean, double std) {
  const double diff = f_star - mean;
  if (!(std > 0.0)) return std::max(0.0, diff);
  const double z = diff / std;
  return std::max(0.0, diff * normal_cdf(z) + std * normal_pdf(z));
}

double expected_improvement_bucketed(double f_star, std::span<const double> edges,
                                     std::span<const double> probs) {
  double ei = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double c = 0.5 * (edges[k] + edges[k + 1]);
    if (c >= f_star) break;  // edges ascend, so no later bucket improves
    ei += probs[k] * (f_star - c);
  }
  return ei;
}

double expected_improvement(double f_star, const PredictiveDistribution& d) {
  return d.kind == PredictiveDistribution::Kind::gaussian
             ? expected_improvement_gaussian(f_star, d.mean, d.std)
             : expected_improvement_bucketed(f_star, d.edges, d.probs);
}

double log_expected_improvement_gaussian(double f_star, double mean, double std) {
  if (!(std > 0.0)) return std::log(std::max(f_star - mean, 0.0));
  const double z = (f_star - mean) / std;
  if (z > -30.0) return std::log(std) + std::log(z * normal_cdf(z) + normal_pdf(z));
  // Far tail: z Phi(z) + phi(z) = phi(z) / z^2 * (1 - 3 / z^2 + 15 / z^4 - ...).
  const double z2 = z * z;
  return std::log(std) - 0.5 * z2 - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(z2) +
         std::log1p(-3.0 / z2 + 15.0 / (z2 * z2));
}

double prob_feasible_gaussian(double g_mean, double g_std) {
  if (!(g_std > 0.0)) return g_mean <= 0.0 ? 1.0 : 0.0;
  return normal_cdf(-g_mean / g_std);
}

double prob_feasible_bucketed(std::span<const double> edges, std::span<const double> probs,
                              double threshold) {
  double p = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (edges[k + 1] <= threshold) {
      p += probs[k];
    } else {
      if (edges[k] < threshold)
        p += probs[k] * (threshold - edges[k]) / (edges[k + 1] - edges[k]);
      break;
    }
  }
  return std::clamp(p, 0.0, 1.0);
}

double prob_feasible(const PredictiveDistribution& d, double threshold) {
  return d.kind == PredictiveDistribution::Kind::gaussian
             ? prob_feasible_gaussian(d.mean - threshold, d.std)
             : prob_feasible_bucketed(d.edges, d.probs, threshold);
}

double cei(double ei, std::span<const double> pfeas) {
  if (pfeas.size() < 5) {
    double v = ei;
    for (double p : pfeas) v *= p;
    return v;
  }
  if (ei <= 0.0) return 0.0;
  double log_v = std::log(ei);
  for (double p : pfeas) {
    if (p <= 0.0) return 0.0;
    log_v += std::log(p);
  }
  return std::exp(log_v);
}

double cei_plus(double ei, std::span<const double> pfeas) {
  std::vector<double> factors(pfeas.size());
  std::transform(pfeas.begin(), pfeas.end(), factors.begin(),
                 [](double p) { return std::min(1.0, 2.0 * p); });
  return cei(ei, factors);
}

Incumbent incumbent_update(const Incumbent& inc, const EvalResult& eval,
                           std::span<const double> x) {
  bool replace;
  if (eval.feasible)
    replace = !inc.feasible_found || eval.f < inc.f_star;
  else
    replace = !inc.feasible_found && eval.f < inc.f_star;
  if (!replace) return inc;
  return Incumbent{eval.f, inc.feasible_found || eval.feasible,
                   std::vector<double>(x.begin(), x.end())};
}

}  // namespace cbo
