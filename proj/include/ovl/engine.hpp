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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ovl/objective.hpp"
#include "ovl/timing.hpp"
#include "ovl/vector.hpp"

namespace ovl {

enum class Method {
  sync_sgd,
  fedavg_full,
  local_sparse,
  overlap_overwrite,
  overlap_delay_corrected,
};

inline constexpr Method kAllMethods[] = {Method::sync_sgd, Method::fedavg_full, Method::local_sparse,
                                         Method::overlap_overwrite, Method::overlap_delay_corrected};

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);

/// Overlap methods keep stepping while the message is in flight; the others
/// idle through the communication window.
bool is_overlap(Method m);

/// Round-local trajectory of one worker: x (round start) -> y (after N_i
/// steps, what is sent) -> z (after Q_i more steps, when the reply lands).
/// For blocking methods z == y.
struct WorkerState {
  ModelVector x;
  ModelVector y;
  ModelVector z;
  std::int64_t steps_taken_this_round = 0;
  std::int64_t total_steps = 0;
};

/// Step counts a method actually runs per round, and the round's length.
struct RoundSchedule {
  std::vector<std::int64_t> pre_steps;
  std::vector<std::int64_t> overlap_steps;
  std::int64_t duration = 0;
};

/// Everything a round needs besides the worker states.
struct RoundContext {
  Method method = Method::overlap_delay_corrected;
  TimingPlan plan;
  /// Compute window (seconds) used by blocking methods; defaults to M*tau.
  std::optional<std::int64_t> blocking_window;
  std::size_t k = 1;
  double eta = 0.1;
  std::uint64_t root_seed = 0;
};

struct RoundOutcome {
  std::vector<ModelVector> next{};
  Mask mask;
  ModelVector message{};
  std::int64_t duration = 0;
  std::vector<std::int64_t> steps{};
  /// G_r: sum over local times of the worker-averaged applied gradients,
  /// i.e. (1/n) sum_i sum_t g_{i,t}. Diagnostic only.
  ModelVector gradient_sum{};
  std::int64_t examples_processed = 0;
  std::int64_t coordinates_sent = 0;
};

/// Validates method/plan/k/dimension compatibility; throws ConfigError.
/// Reasons are collected into one message.
void check_compatible(const RoundContext& ctx, std::size_t dim);

/// Per-worker step counts and round length for the configured method.
RoundSchedule schedule_for(const RoundContext& ctx);

/// `count` sequential SGD steps from `start`; step t uses sample key
/// (worker, round, first_step + t). Adds every applied gradient into
/// `gradient_sum` when given. Throws DivergenceError if any coordinate leaves
/// [-1e100, 1e100] or becomes non-finite.
ModelVector run_local_steps(const ModelVector& start, std::int64_t count, double eta, const GradientOracle& oracle,
                            std::uint32_t worker, std::uint32_t round, std::uint32_t first_step,
                            ModelVector* gradient_sum = nullptr);

/// z + Proj_s(y_bar - y): on-mask ybar_j + (z_j - y_j), off-mask z_j.
ModelVector merge_delay_corrected(const ModelVector& z, const ModelVector& y, const ModelVector& y_bar, const Mask& s);

/// On-mask m_j, off-mask z_j.
ModelVector merge_overwrite(const ModelVector& z, const ModelVector& m, const Mask& s);

/// The round's shared Rand-K mask, drawn from the (mask, round) stream.
Mask round_mask(std::size_t dim, std::size_t k, std::uint64_t root_seed, std::uint32_t round);

/// Server message (1/n) sum_i Proj_s(y_i).
ModelVector server_message(std::span<const WorkerState> states, const Mask& s);

/// Next-round models from the states' (y, z) under the method's merge rule.
std::vector<ModelVector> merge_all(std::span<const WorkerState> states, Method method, const Mask& s);

/// Runs one round. Fills each state's y, z and step counters; leaves x at x^r.
/// Call advance() to move to x^{r+1}.
RoundOutcome run_round(std::vector<WorkerState>& states, const RoundContext& ctx, const GradientOracle& oracle,
                       std::uint32_t round);

void advance(std::vector<WorkerState>& states, const RoundOutcome& outcome);

/// n workers all starting at x0.
std::vector<WorkerState> initial_states(std::size_t n_workers, const ModelVector& x0);

inline constexpr double kDivergenceBound = 1e100;

}  // namespace ovl
