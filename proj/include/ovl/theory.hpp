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
#pragma once

#include <cstdint>

#include "ovl/timing.hpp"

namespace ovl {

/// Sparsification constants of the convergence bound. p = K/d, q = 1 - p,
/// c = q(1+alpha)(1+beta), B = q(1+beta)(1+1/alpha), D = 1 + q/beta.
struct BoundParams {
  double alpha;
  double beta;
  std::int64_t K;
  std::int64_t d;
  double p;
  double q;
  double c;
  double B;
  double D;

  /// Throws ConfigError unless alpha, beta > 0, 1 <= K <= d and c < 1.
  static BoundParams make(double alpha, double beta, std::int64_t K, std::int64_t d);
};

struct ProblemConstants {
  double L = 1.0;
  double sigma_sq = 0.0;
  double G = 1.0;
  double delta = 0.0;

  void validate() const;
};

struct RateBound {
  double optimization;   // 4 delta / (eta Hbar R)
  double noise;          // 4 L eta sigma^2 / n
  double local_drift;    // 6 L^2 eta^2 G^2 Psi_H / (n Hbar)
  double disagreement;   // 6 L^2 eta^2 G^2 H_max (B S_N + D S_Q) / (n Hbar (1 - c))
  double total;
};

/// 1 / (8 L H_max)
double max_stepsize(double L, std::int64_t h_max);

/// Throws ConfigError quoting the admissible maximum when eta is outside (0, 1/(8 L H_max)].
void validate_stepsize(double eta, double L, std::int64_t h_max);

/// Right-hand side of the average-iterate stationarity bound, term by term.
RateBound rate_bound(const ProblemConstants& consts, const TimingAggregates& agg, const BoundParams& bp, double eta,
                     std::int64_t n, std::int64_t R);

/// X = Psi_H + H_max (B S_N + D S_Q) / (1 - c)
double disagreement_budget(const TimingAggregates& agg, const BoundParams& bp);

inline constexpr double kDefaultRoundConstant = 12.0;

/// ceil(c_R * (delta L sigma^2/(n eps Hbar) + delta L G sqrt(X)/(eps^1.5 Hbar sqrt(n Hbar))
///             + delta L H_max/(eps Hbar)))
std::int64_t round_complexity(const ProblemConstants& consts, const TimingAggregates& agg, const BoundParams& bp,
                              std::int64_t n, double epsilon, double c_R = kDefaultRoundConstant);

struct TimeComplexity {
  std::int64_t seconds;  // R (M tau + zeta)
  double tau_h;
  bool harmonic_identity_holds;  // R (M tau + zeta) == R tau_H Hbar, checked in exact integers
};

TimeComplexity time_complexity(std::int64_t rounds, const TimingPlan& plan);

/// Grid search over (alpha, beta) minimizing (B S_N + D S_Q)/(1 - c) subject to c < 1.
/// Throws ConfigError if K = 0.
BoundParams tune_bound_params(std::int64_t K, std::int64_t d, const TimingAggregates& agg);

}  // namespace ovl
