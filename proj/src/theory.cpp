// Copyright 2026 The ovlsgd Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================
#include "ovl/theory.hpp"

#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "ovl/error.hpp"

namespace ovl {

BoundParams BoundParams::make(double alpha, double beta, std::int64_t K, std::int64_t d) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw ConfigError(fmt::format("alpha and beta must be positive, got {} and {}", alpha, beta));
  }
  if (K < 1 || K > d) throw ConfigError(fmt::format("K={} outside [1, {}]", K, d));
  BoundParams bp{alpha, beta, K, d, 0, 0, 0, 0, 0};
  if (K == d) {
    bp.p = 1.0;
    bp.q = 0.0;
  } else {
    bp.p = static_cast<double>(K) / static_cast<double>(d);
    bp.q = static_cast<double>(d - K) / static_cast<double>(d);
  }
  bp.c = bp.q * (1.0 + alpha) * (1.0 + beta);
  bp.B = bp.q * (1.0 + beta) * (1.0 + 1.0 / alpha);
  bp.D = 1.0 + bp.q / beta;
  if (!(bp.c < 1.0)) {
    throw ConfigError(fmt::format("c = q(1+alpha)(1+beta) = {} must be < 1; shrink alpha/beta or raise K", bp.c));
  }
  return bp;
}

void ProblemConstants::validate() const {
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError(fmt::format("L must be positive and finite, got {}", L));
  if (!(sigma_sq >= 0.0) || !std::isfinite(sigma_sq)) throw ConfigError("sigma^2 must be >= 0 and finite");
  if (!(G > 0.0) || !std::isfinite(G)) throw ConfigError("G must be positive and finite");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be >= 0 and finite");
}

double max_stepsize(double L, std::int64_t h_max) { return 1.0 / (8.0 * L * static_cast<double>(h_max)); }

void validate_stepsize(double eta, double L, std::int64_t h_max) {
  const double limit = max_stepsize(L, h_max);
  if (!(eta > 0.0) || !(eta <= limit)) {
    throw ConfigError(fmt::format("stepsize {} outside (0, 1/(8 L H_max)] = (0, {}] (L={}, H_max={})", eta,
                                  limit, L, h_max));
  }
}

RateBound rate_bound(const ProblemConstants& consts, const TimingAggregates& agg, const BoundParams& bp, double eta,
                     std::int64_t n, std::int64_t R) {
  consts.validate();
  if (n < 1 || R < 1) throw ConfigError("rate bound needs n >= 1 and R >= 1");
  validate_stepsize(eta, consts.L, agg.h_max);

  const double L = consts.L;
  const double nn = static_cast<double>(n);
  const double g2 = consts.G * consts.G;
  const double drift_scale = 6.0 * L * L * eta * eta * g2 / (nn * agg.h_bar);

  RateBound rb{};
  rb.optimization = 4.0 * consts.delta / (eta * agg.h_bar * static_cast<double>(R));
  rb.noise = 4.0 * L * eta * consts.sigma_sq / nn;
  rb.local_drift = drift_scale * static_cast<double>(agg.psi_h);
  rb.disagreement = drift_scale * static_cast<double>(agg.h_max) *
                    (bp.B * static_cast<double>(agg.s_n) + bp.D * static_cast<double>(agg.s_q)) / (1.0 - bp.c);
  rb.total = rb.optimization + rb.noise + rb.local_drift + rb.disagreement;
  return rb;
}

double disagreement_budget(const TimingAggregates& agg, const BoundParams& bp) {
  return static_cast<double>(agg.psi_h) +
         static_cast<double>(agg.h_max) *
             (bp.B * static_cast<double>(agg.s_n) + bp.D * static_cast<double>(agg.s_q)) / (1.0 - bp.c);
}

std::int64_t round_complexity(const ProblemConstants& consts, const TimingAggregates& agg, const BoundParams& bp,
                              std::int64_t n, double epsilon, double c_R) {
  consts.validate();
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(c_R > 0.0)) throw ConfigError("c_R must be positive");
  const double nn = static_cast<double>(n);
  const double dl = consts.delta * consts.L;
  const double X = disagreement_budget(agg, bp);
  const double noise_term = dl * consts.sigma_sq / (nn * epsilon * agg.h_bar);
  const double drift_term =
      dl * consts.G * std::sqrt(X) / (std::pow(epsilon, 1.5) * agg.h_bar * std::sqrt(nn * agg.h_bar));
  const double det_term = dl * static_cast<double>(agg.h_max) / (epsilon * agg.h_bar);
  return static_cast<std::int64_t>(std::ceil(c_R * (noise_term + drift_term + det_term)));
}

TimeComplexity time_complexity(std::int64_t rounds, const TimingPlan& plan) {
  const TimingAggregates agg = aggregates(plan);
  TimeComplexity tc{};
  tc.seconds = rounds * plan.round_duration();
  tc.tau_h = agg.tau_h;
  // tau_H * Hbar = (num/den) * (sum H / n) with den = sum H and num = duration * n.
  std::int64_t sum_h = 0;
  for (std::int64_t h : plan.H) sum_h += h;
  const auto n = static_cast<std::int64_t>(plan.workers());
  tc.harmonic_identity_holds =
      agg.tau_h_den == sum_h && rounds * agg.tau_h_num * sum_h == tc.seconds * agg.tau_h_den * n;
  return tc;
}

BoundParams tune_bound_params(std::int64_t K, std::int64_t d, const TimingAggregates& agg) {
  if (K == d) return BoundParams::make(1.0, 1.0, K, d);
  double best = std::numeric_limits<double>::infinity();
  double best_alpha = 0.0, best_beta = 0.0;
  // Log grid, 40 points per decade over [1e-6, 1e3].
  for (int a = -240; a <= 120; ++a) {
    const double alpha = std::pow(10.0, a / 40.0);
    for (int b = -240; b <= 120; ++b) {
      const double beta = std::pow(10.0, b / 40.0);
      const double q = static_cast<double>(d - K) / static_cast<double>(d);
      const double c = q * (1.0 + alpha) * (1.0 + beta);
      if (!(c < 1.0)) continue;
      const double B = q * (1.0 + beta) * (1.0 + 1.0 / alpha);
      const double D = 1.0 + q / beta;
      const double value = (B * static_cast<double>(agg.s_n) + D * static_cast<double>(agg.s_q)) / (1.0 - c);
      if (value < best) {
        best = value;
        best_alpha = alpha;
        best_beta = beta;
      }
    }
  }
  if (!std::isfinite(best)) throw ConfigError("no (alpha, beta) on the search grid gives c < 1");
  return BoundParams::make(best_alpha, best_beta, K, d);
}

}  // namespace ovl
