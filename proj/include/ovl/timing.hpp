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
#include <span>
#include <vector>

namespace ovl {

/// Per-round step counts on the integer time grid.
///
/// Worker i needs taus[i] seconds per local step; tau = lcm(taus). A round
/// spends M*tau seconds computing, then zeta seconds communicating, where zeta
/// is a multiple of tau. Worker i takes N[i] = M*tau/taus[i] steps before the
/// message is sent and Q[i] = zeta/taus[i] while it is in flight.
struct TimingPlan {
  std::vector<std::int64_t> taus;
  std::int64_t M = 1;
  std::int64_t zeta = 0;
  std::int64_t tau = 1;
  std::vector<std::int64_t> N;
  std::vector<std::int64_t> Q;
  std::vector<std::int64_t> H;

  std::size_t workers() const { return taus.size(); }
  std::int64_t compute_window() const { return M * tau; }
  std::int64_t round_duration() const { return M * tau + zeta; }
};

struct TimingAggregates {
  double n_bar = 0.0;
  double h_bar = 0.0;
  std::int64_t h_max = 0;
  std::int64_t s_n = 0;
  std::int64_t s_q = 0;
  std::int64_t psi_h = 0;
  double tau_h = 0.0;
  // tau_h as an exact fraction.
  std::int64_t tau_h_num = 0;
  std::int64_t tau_h_den = 1;
};

/// Largest lcm accepted by build_plan.
inline constexpr std::int64_t kMaxTau = std::int64_t{1} << 32;

/// Throws ConfigError for empty/non-positive taus, M < 1, zeta < 0, an lcm
/// above kMaxTau, or zeta off the tau grid (the message names the nearest
/// valid values).
TimingPlan build_plan(std::span<const std::int64_t> taus, std::int64_t M, std::int64_t zeta);

/// lcm with overflow/limit detection; throws ConfigError past kMaxTau.
std::int64_t checked_lcm(std::span<const std::int64_t> values);

TimingAggregates aggregates(const TimingPlan& plan);

/// sum_{t=0}^{h-1} t^2
std::int64_t sum_of_squares_below(std::int64_t h);

}  // namespace ovl
