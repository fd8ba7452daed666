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
#include "ovl/engine.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>
#include <fmt/ranges.h>

#include "ovl/error.hpp"
#include "ovl/kernels.hpp"

namespace ovl {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::sync_sgd:
      return "sync_sgd";
    case Method::fedavg_full:
      return "fedavg_full";
    case Method::local_sparse:
      return "local_sparse";
    case Method::overlap_overwrite:
      return "overlap_overwrite";
    case Method::overlap_delay_corrected:
      return "overlap_delay_corrected";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

bool is_overlap(Method m) { return m == Method::overlap_overwrite || m == Method::overlap_delay_corrected; }

namespace {

bool uses_full_mask(Method m) { return m == Method::sync_sgd || m == Method::fedavg_full; }

}  // namespace

void check_compatible(const RoundContext& ctx, std::size_t dim) {
  std::vector<std::string> problems;
  const TimingPlan& plan = ctx.plan;
  if (dim == 0) problems.emplace_back("model dimension must be positive");
  if (ctx.k < 1 || ctx.k > dim) problems.push_back(fmt::format("K={} outside [1, {}]", ctx.k, dim));
  if (!(ctx.eta > 0.0) || !std::isfinite(ctx.eta)) problems.push_back(fmt::format("eta must be > 0, got {}", ctx.eta));
  if (plan.workers() == 0) problems.emplace_back("no workers");
  if (ctx.blocking_window) {
    if (*ctx.blocking_window < 1 || *ctx.blocking_window % plan.tau != 0) {
      problems.push_back(fmt::format("blocking compute window {} must be a positive multiple of tau={}",
                                     *ctx.blocking_window, plan.tau));
    }
  }
  switch (ctx.method) {
    case Method::sync_sgd: {
      const bool equal_taus =
          std::adjacent_find(plan.taus.begin(), plan.taus.end(), std::not_equal_to<>()) == plan.taus.end();
      if (!equal_taus) problems.push_back(fmt::format("sync_sgd requires equal step times, got ({})", fmt::join(plan.taus, ",")));
      if (plan.M != 1) problems.push_back(fmt::format("sync_sgd requires M=1, got {}", plan.M));
      if (plan.zeta != 0) problems.push_back(fmt::format("sync_sgd requires zeta=0, got {}", plan.zeta));
      if (ctx.k != dim) problems.push_back(fmt::format("sync_sgd requires K=d={}, got K={}", dim, ctx.k));
      if (ctx.blocking_window && *ctx.blocking_window != plan.tau) {
        problems.emplace_back("sync_sgd requires the compute window to equal tau");
      }
      break;
    }
    case Method::fedavg_full:
      if (ctx.k != dim) problems.push_back(fmt::format("fedavg_full requires K=d={}, got K={}", dim, ctx.k));
      break;
    default:
      break;
  }
  if (!problems.empty()) {
    throw ConfigError(fmt::format("{} is not runnable: {}", to_string(ctx.method), fmt::join(problems, "; ")));
  }
}

RoundSchedule schedule_for(const RoundContext& ctx) {
  const TimingPlan& plan = ctx.plan;
  RoundSchedule s;
  if (is_overlap(ctx.method)) {
    s.pre_steps = plan.N;
    s.overlap_steps = plan.Q;
    s.duration = plan.round_duration();
    return s;
  }
  const std::int64_t window = ctx.blocking_window.value_or(plan.compute_window());
  for (std::int64_t t : plan.taus) s.pre_steps.push_back(window / t);
  s.overlap_steps.assign(plan.workers(), 0);
  s.duration = window + plan.zeta;
  return s;
}

ModelVector run_local_steps(const ModelVector& start, std::int64_t count, double eta, const GradientOracle& oracle,
                            std::uint32_t worker, std::uint32_t round, std::uint32_t first_step,
                            ModelVector* gradient_sum) {
  if (count < 0) throw UsageError("run_local_steps: negative step count");
  if (!(eta > 0.0)) throw UsageError("run_local_steps: eta must be positive");
  const auto& k = kernels::active();
  ModelVector w = start;
  for (std::int64_t t = 0; t < count; ++t) {
    const auto step = static_cast<std::uint32_t>(first_step + t);
    ModelVector g;
    try {
      g = oracle.gradient(w, SampleKey{worker, round, step});
    } catch (const NumericError& e) {
      throw DivergenceError(round, fmt::format("worker {} step {}: {}", worker, step, e.what()));
    }
    k.axpy(-eta, g.data(), w.data(), w.dim());
    const double peak = k.max_abs(w.data(), w.dim());
    if (!(peak <= kDivergenceBound)) {
      throw DivergenceError(round, fmt::format("worker {} step {}: |w| reached {}", worker, step, peak));
    }
    if (gradient_sum != nullptr) k.axpy(1.0, g.data(), gradient_sum->data(), g.dim());
  }
  return w;
}

ModelVector merge_delay_corrected(const ModelVector& z, const ModelVector& y, const ModelVector& y_bar, const Mask& s) {
  require_same_dim(z.dim(), y.dim(), "merge_delay_corrected");
  require_same_dim(z.dim(), y_bar.dim(), "merge_delay_corrected");
  require_same_dim(z.dim(), s.dim(), "merge_delay_corrected");
  ModelVector out = z;
  for (std::uint32_t j : s.indices()) out[j] = y_bar[j] + (z[j] - y[j]);
  return out;
}

ModelVector merge_overwrite(const ModelVector& z, const ModelVector& m, const Mask& s) {
  require_same_dim(z.dim(), m.dim(), "merge_overwrite");
  require_same_dim(z.dim(), s.dim(), "merge_overwrite");
  ModelVector out = z;
  for (std::uint32_t j : s.indices()) out[j] = m[j];
  return out;
}

Mask round_mask(std::size_t dim, std::size_t k, std::uint64_t root_seed, std::uint32_t round) {
  RngStream rng(root_seed, StreamKey{Purpose::mask, round, 0, 0});
  return sample_rand_k(dim, k, rng);
}

namespace {

std::vector<ModelVector> collect(std::span<const WorkerState> states, ModelVector WorkerState::*field) {
  std::vector<ModelVector> out;
  out.reserve(states.size());
  for (const auto& st : states) out.push_back(st.*field);
  return out;
}

}  // namespace

ModelVector server_message(std::span<const WorkerState> states, const Mask& s) {
  std::vector<ModelVector> sent;
  sent.reserve(states.size());
  for (const auto& st : states) sent.push_back(project_mask(st.y, s));
  return average(sent);
}

std::vector<ModelVector> merge_all(std::span<const WorkerState> states, Method method, const Mask& s) {
  std::vector<ModelVector> next;
  next.reserve(states.size());
  switch (method) {
    case Method::sync_sgd:
    case Method::fedavg_full: {
      const ModelVector y_bar = average(collect(states, &WorkerState::y));
      next.assign(states.size(), y_bar);
      break;
    }
    case Method::local_sparse:
    case Method::overlap_overwrite: {
      const ModelVector m = server_message(states, s);
      for (const auto& st : states) next.push_back(merge_overwrite(st.z, m, s));
      break;
    }
    case Method::overlap_delay_corrected: {
      const ModelVector y_bar = average(collect(states, &WorkerState::y));
      for (const auto& st : states) next.push_back(merge_delay_corrected(st.z, st.y, y_bar, s));
      break;
    }
  }
  return next;
}

RoundOutcome run_round(std::vector<WorkerState>& states, const RoundContext& ctx, const GradientOracle& oracle,
                       std::uint32_t round) {
  const std::size_t n = states.size();
  if (n != ctx.plan.workers()) {
    throw ConfigError(fmt::format("{} worker states for a {}-worker timing plan", n, ctx.plan.workers()));
  }
  const std::size_t d = oracle.dim();
  for (const auto& st : states) require_same_dim(st.x.dim(), d, "run_round");

  const RoundSchedule sched = schedule_for(ctx);
  const Mask mask = uses_full_mask(ctx.method) ? Mask::full(d) : round_mask(d, ctx.k, ctx.root_seed, round);

  RoundOutcome out{.mask = mask};
  out.duration = sched.duration;
  out.gradient_sum = ModelVector(d);
  const auto per_call = static_cast<std::int64_t>(oracle.examples_per_call());

  if (ctx.method == Method::sync_sgd) {
    // One gradient per worker at the shared point, one averaged step.
    std::vector<ModelVector> grads;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(states[i].x == states[0].x)) throw UsageError("sync_sgd: worker models disagree");
      grads.push_back(oracle.gradient(states[i].x, SampleKey{static_cast<std::uint32_t>(i), round, 0}));
      auto& st = states[i];
      st.y = axpy(-ctx.eta, grads.back(), st.x);
      st.z = st.y;
      st.steps_taken_this_round = 1;
      st.total_steps += 1;
      out.steps.push_back(1);
    }
    out.gradient_sum = average(grads);
    ModelVector next = axpy(-ctx.eta, out.gradient_sum, states[0].x);
    if (!(kernels::active().max_abs(next.data(), d) <= kDivergenceBound)) {
      throw DivergenceError(round, "sync_sgd step left the divergence bound");
    }
    out.message = out.gradient_sum;
    out.next.assign(n, next);
    out.examples_processed = per_call * static_cast<std::int64_t>(n);
    out.coordinates_sent = 2 * static_cast<std::int64_t>(n * d);
    return out;
  }

  std::vector<ModelVector> worker_grads(n, ModelVector(d));
  for (std::size_t i = 0; i < n; ++i) {
    auto& st = states[i];
    const auto w = static_cast<std::uint32_t>(i);
    const std::int64_t pre = sched.pre_steps[i];
    const std::int64_t post = sched.overlap_steps[i];
    st.y = run_local_steps(st.x, pre, ctx.eta, oracle, w, round, 0, &worker_grads[i]);
    st.z = post > 0 ? run_local_steps(st.y, post, ctx.eta, oracle, w, round, static_cast<std::uint32_t>(pre),
                                      &worker_grads[i])
                    : st.y;
    st.steps_taken_this_round = pre + post;
    st.total_steps += pre + post;
    out.steps.push_back(pre + post);
    out.examples_processed += per_call * (pre + post);
  }
  out.gradient_sum = average(worker_grads);
  out.message = server_message(states, mask);
  out.next = merge_all(states, ctx.method, mask);
  out.coordinates_sent = 2 * static_cast<std::int64_t>(n * mask.k());
  return out;
}

void advance(std::vector<WorkerState>& states, const RoundOutcome& outcome) {
  if (outcome.next.size() != states.size()) throw UsageError("advance: outcome/state size mismatch");
  for (std::size_t i = 0; i < states.size(); ++i) {
    states[i].x = outcome.next[i];
    states[i].steps_taken_this_round = 0;
  }
}

std::vector<WorkerState> initial_states(std::size_t n_workers, const ModelVector& x0) {
  if (n_workers == 0) throw ConfigError("need at least one worker");
  require_finite(x0, "initial model");
  return std::vector<WorkerState>(n_workers, WorkerState{x0, x0, x0, 0, 0});
}

}  // namespace ovl
