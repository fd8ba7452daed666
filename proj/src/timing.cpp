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
#include "ovl/timing.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/core.h>
#include <fmt/ranges.h>

#include "ovl/error.hpp"

namespace ovl {

std::int64_t checked_lcm(std::span<const std::int64_t> values) {
  std::int64_t acc = 1;
  for (std::int64_t v : values) {
    if (v < 1) throw ConfigError(fmt::format("step times must be positive integers, got {}", v));
    const std::int64_t g = std::gcd(acc, v);
    const std::int64_t step = v / g;
    if (acc > kMaxTau / step) {
      throw ConfigError(fmt::format("lcm of step times {} exceeds 2^32", fmt::join(values, ",")));
    }
    acc *= step;
  }
  return acc;
}

TimingPlan build_plan(std::span<const std::int64_t> taus, std::int64_t M, std::int64_t zeta) {
  if (taus.empty()) throw ConfigError("timing: need at least one worker");
  if (M < 1) throw ConfigError(fmt::format("timing: M must be >= 1, got {}", M));
  if (zeta < 0) throw ConfigError(fmt::format("timing: zeta must be >= 0, got {}", zeta));

  TimingPlan plan;
  plan.taus.assign(taus.begin(), taus.end());
  plan.M = M;
  plan.zeta = zeta;
  plan.tau = checked_lcm(taus);
  if (zeta % plan.tau != 0) {
    const std::int64_t lower = zeta / plan.tau * plan.tau;
    throw ConfigError(fmt::format("zeta must be a multiple of {} (lcm of step times); nearest valid values: {} or {}",
                                  plan.tau, lower, lower + plan.tau));
  }
  if (M > kMaxTau / plan.tau) throw ConfigError("timing: M * tau overflows");

  for (std::int64_t t : taus) {
    plan.N.push_back(M * plan.tau / t);
    plan.Q.push_back(zeta / t);
    plan.H.push_back(plan.N.back() + plan.Q.back());
  }
  return plan;
}

std::int64_t sum_of_squares_below(std::int64_t h) {
  return (h - 1) * h * (2 * h - 1) / 6;
}

TimingAggregates aggregates(const TimingPlan& plan) {
  TimingAggregates agg;
  const auto n = static_cast<double>(plan.workers());
  std::int64_t sum_n = 0, sum_h = 0;
  for (std::size_t i = 0; i < plan.workers(); ++i) {
    sum_n += plan.N[i];
    sum_h += plan.H[i];
    agg.h_max = std::max(agg.h_max, plan.H[i]);
    agg.s_n += plan.N[i] * plan.N[i];
    agg.s_q += plan.Q[i] * plan.Q[i];
    agg.psi_h += sum_of_squares_below(plan.H[i]);
  }
  agg.n_bar = static_cast<double>(sum_n) / n;
  agg.h_bar = static_cast<double>(sum_h) / n;
  // n / sum(1/tau_i) == (M*tau + zeta) * n / sum(H_i), since 1/tau_i = H_i / (M*tau + zeta).
  agg.tau_h_num = plan.round_duration() * static_cast<std::int64_t>(plan.workers());
  agg.tau_h_den = sum_h;
  agg.tau_h = static_cast<double>(plan.round_duration()) * n / static_cast<double>(sum_h);
  return agg;
}

}  // namespace ovl
