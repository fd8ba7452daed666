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
// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <unistd.h>

#include "ovl/config.hpp"
#include "ovl/data.hpp"
#include "ovl/engine.hpp"
#include "ovl/metrics.hpp"
#include "ovl/rng.hpp"
#include "ovl/suite.hpp"
#include "ovl/theory.hpp"
#include "ovl/timing.hpp"

using namespace ovl;

namespace {

const std::filesystem::path kConfigDir = std::filesystem::path(OVL_SOURCE_DIR) / "configs";

struct Verdict {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;  // 0 = no limit
  std::function<Verdict()> body;
};

ModelVector mean_of(const std::vector<WorkerState>& states) {
  std::vector<ModelVector> xs;
  for (const auto& s : states) xs.push_back(s.x);
  return average(xs);
}

Dataset small_logistic(std::size_t dim, std::size_t n, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.dim = dim;
  spec.n_examples = n;
  spec.separation = 2.0;
  spec.seed = seed;
  return make_synthetic(spec);
}

// ---------------------------------------------------------------------------

Verdict average_evolution() {
  RngStream pick(2024, StreamKey{Purpose::test, 1, 0, 0});
  const std::int64_t tau_choices[] = {1, 2, 3, 4, 6};
  double worst = 0.0;
  int configs = 0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 1 + pick.uniform_index(8);
    const std::size_t d = 1 + pick.uniform_index(50);
    const std::size_t k = 1 + pick.uniform_index(d);
    std::vector<std::int64_t> taus;
    for (std::size_t i = 0; i < n; ++i) taus.push_back(tau_choices[pick.uniform_index(5)]);
    const std::int64_t M = 1 + static_cast<std::int64_t>(pick.uniform_index(3));
    const std::int64_t tau = checked_lcm(taus);
    const std::int64_t zeta = tau * static_cast<std::int64_t>(pick.uniform_index(3));
    const std::uint64_t seed = 1000 + c;

    RoundContext ctx;
    ctx.method = Method::overlap_delay_corrected;
    ctx.plan = build_plan(taus, M, zeta);
    ctx.k = k;
    ctx.eta = 0.01 + 0.05 * pick.uniform();
    ctx.root_seed = seed;

    std::unique_ptr<GradientOracle> oracle;
    Dataset data;
    if (c % 2 == 0) {
      ModelVector a(d);
      for (std::size_t j = 0; j < d; ++j) a[j] = 0.1 + pick.uniform();
      oracle = std::make_unique<QuadraticOracle>(a, 0.5, seed);
    } else {
      data = small_logistic(d, 64, seed);
      std::vector<std::vector<std::uint32_t>> shards(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::uint32_t e = 0; e < data.size(); ++e) shards[i].push_back(e);
      }
      RegularizerParams reg{0.01 * (c % 3), 1.0};
      oracle = std::make_unique<LogisticOracle>(data, shards, 4, reg, seed);
    }

    ModelVector x0(d);
    for (std::size_t j = 0; j < d; ++j) x0[j] = pick.normal();
    auto states = initial_states(n, x0);
    for (std::uint32_t r = 0; r < 5; ++r) {
      const ModelVector x_bar = mean_of(states);
      // Replay every worker's local steps independently to get G_r.
      ModelVector g_sum(d);
      for (std::size_t i = 0; i < n; ++i) {
        ModelVector w = states[i].x;
        for (std::int64_t t = 0; t < ctx.plan.H[i]; ++t) {
          const ModelVector g =
              oracle->gradient(w, SampleKey{static_cast<std::uint32_t>(i), r, static_cast<std::uint32_t>(t)});
          for (std::size_t j = 0; j < d; ++j) {
            w[j] -= ctx.eta * g[j];
            g_sum[j] += g[j];
          }
        }
      }
      const RoundOutcome out = run_round(states, ctx, *oracle, r);
      advance(states, out);
      const ModelVector next_bar = mean_of(states);
      double err = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double expected = x_bar[j] - ctx.eta * g_sum[j] / static_cast<double>(n);
        err += (next_bar[j] - expected) * (next_bar[j] - expected);
      }
      worst = std::max(worst, std::sqrt(err) / (1.0 + norm(x_bar)));
    }
    ++configs;
  }
  return {worst <= 1e-10, fmt::format("{} configs, max ||err||/(1+||xbar||) = {:.3e} (tol 1e-10)", configs, worst)};
}

Verdict mask_expectation() {
  RngStream pick(77, StreamKey{Purpose::test, 2, 0, 0});
  double worst = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    const std::size_t n = 2 + pick.uniform_index(6);
    const std::size_t d = 5 + pick.uniform_index(46);
    const std::size_t k = 1 + pick.uniform_index(d);
    std::vector<WorkerState> states(n);
    std::vector<ModelVector> ys, zs, vs;
    for (auto& st : states) {
      st.x = ModelVector(d);
      st.y = ModelVector(d);
      st.z = ModelVector(d);
      for (std::size_t j = 0; j < d; ++j) {
        st.y[j] = pick.normal();
        st.z[j] = st.y[j] + 0.5 * pick.normal();
      }
      ys.push_back(st.y);
      zs.push_back(st.z);
      vs.push_back(subtract(st.z, st.y));
    }
    const double p = static_cast<double>(k) / static_cast<double>(d);
    const double q = 1.0 - p;
    // Independent evaluation of Z and V.
    auto spread = [&](const std::vector<ModelVector>& v) {
      double total = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        double m = 0.0;
        for (const auto& x : v) m += x[j];
        m /= static_cast<double>(n);
        for (const auto& x : v) total += (x[j] - m) * (x[j] - m);
      }
      return total;
    };
    const double expected = q * spread(zs) + p * spread(vs);
    double acc = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
      const Mask s = round_mask(d, k, 9000 + inst, static_cast<std::uint32_t>(t));
      acc += disagreement(merge_all(states, Method::overlap_delay_corrected, s));
    }
    const double mean = acc / trials;
    worst = std::max(worst, std::abs(mean - expected) / expected);
  }
  return {worst <= 0.02, fmt::format("10 instances x 1e4 masks, max relative deviation {:.4f} (tol 0.02)", worst)};
}

Verdict minibatch_equivalence() {
  const std::size_t n = 4, d = 20;
  const std::vector<std::int64_t> taus(n, 2);
  const Dataset data = small_logistic(d, 400, 5);
  std::vector<std::vector<std::uint32_t>> shards(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t e = 0; e < data.size(); ++e) shards[i].push_back(e);
  }
  const LogisticOracle oracle(data, shards, 16, RegularizerParams{0.01, 1.0}, 5);
  const Method methods[] = {Method::sync_sgd, Method::local_sparse, Method::overlap_overwrite,
                            Method::overlap_delay_corrected};
  std::map<Method, std::vector<ModelVector>> traj;
  for (Method m : methods) {
    RoundContext ctx;
    ctx.method = m;
    ctx.plan = build_plan(taus, 1, 0);
    ctx.k = d;
    ctx.eta = 0.2;
    ctx.root_seed = 5;
    auto states = initial_states(n, ModelVector(d));
    for (std::uint32_t r = 0; r < 50; ++r) {
      advance(states, run_round(states, ctx, oracle, r));
      for (const auto& st : states) traj[m].push_back(st.x);
    }
  }
  double worst = 0.0;
  for (Method m : methods) {
    for (std::size_t t = 0; t < traj[m].size(); ++t) {
      for (std::size_t j = 0; j < d; ++j) {
        worst = std::max(worst, std::abs(traj[m][t][j] - traj[Method::sync_sgd][t][j]));
      }
    }
  }
  return {worst <= 1e-12, fmt::format("50 rounds, 4 methods vs sync_sgd, max |dx| = {:.3e} (tol 1e-12)", worst)};
}

Verdict step_counts() {
  const std::vector<std::int64_t> taus{1, 2, 3, 6};
  const TimingPlan a = build_plan(taus, 3, 6);
  const TimingPlan b = build_plan(taus, 1, 96);
  const bool ok = a.N == std::vector<std::int64_t>{18, 9, 6, 3} && a.Q == std::vector<std::int64_t>{6, 3, 2, 1} &&
                  a.round_duration() == 24 && b.Q == std::vector<std::int64_t>{96, 48, 32, 16};
  return {ok, fmt::format("N=({},{},{},{}) Q=({},{},{},{}) duration={} stress Q=({},{},{},{})", a.N[0], a.N[1], a.N[2],
                          a.N[3], a.Q[0], a.Q[1], a.Q[2], a.Q[3], a.round_duration(), b.Q[0], b.Q[1], b.Q[2],
                          b.Q[3])};
}

std::map<Method, double> mean_final_loss(const ExperimentConfig& cfg) {
  SuiteOptions opts;
  opts.write_files = false;
  const SuiteResult res = run_suite(cfg, opts);
  std::map<Method, double> sum;
  std::map<Method, int> count;
  for (const auto& r : res.runs) {
    if (r.diverged || r.records.empty()) throw std::runtime_error("run diverged");
    sum[r.method] += r.records.back().train_loss;
    count[r.method] += 1;
  }
  for (auto& [m, s] : sum) s /= count[m];
  return sum;
}

Verdict method_ordering() {
  const ExperimentConfig cfg = load_config(kConfigDir / "method_ordering.yaml");
  auto mean = mean_final_loss(cfg);
  const double dc = mean[Method::overlap_delay_corrected];
  const double ow = mean[Method::overlap_overwrite];
  const double ls = mean[Method::local_sparse];
  return {dc < ow && ow < ls,
          fmt::format("mean final loss over {} seeds: delay_corrected={:.10f} overwrite={:.10f} local_sparse={:.10f}",
                      cfg.seeds.size(), dc, ow, ls)};
}

Verdict long_delay_amplification() {
  const ExperimentConfig long_delay = load_config(kConfigDir / "merge_long_delay.yaml");
  const ExperimentConfig short_delay = load_config(kConfigDir / "merge_long_compute.yaml");
  auto a = mean_final_loss(long_delay);
  auto b = mean_final_loss(short_delay);
  const double gap_long = a[Method::overlap_overwrite] - a[Method::overlap_delay_corrected];
  const double gap_short = b[Method::overlap_overwrite] - b[Method::overlap_delay_corrected];
  return {gap_long > gap_short,
          fmt::format("overwrite - delay_corrected: (M=2, zeta=24) {:.4e} vs (M=8, zeta=6) {:.4e}", gap_long,
                      gap_short)};
}

Verdict rand_k_statistics() {
  const std::size_t d = 40, k = 12;
  const int trials = 100000;
  ModelVector x(d);
  RngStream pick(5, StreamKey{Purpose::test, 7, 0, 0});
  for (std::size_t j = 0; j < d; ++j) x[j] = (pick.uniform() < 0.5 ? -1.0 : 1.0) * (0.5 + pick.uniform());
  std::vector<double> hits(d, 0.0);
  ModelVector proj_sum(d);
  for (int t = 0; t < trials; ++t) {
    const Mask s = round_mask(d, k, 31337, static_cast<std::uint32_t>(t));
    for (std::uint32_t j : s.indices()) {
      hits[j] += 1.0;
      proj_sum[j] += x[j];
    }
  }
  const double p = static_cast<double>(k) / static_cast<double>(d);
  double worst_freq = 0.0, err_sq = 0.0, ref_sq = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    worst_freq = std::max(worst_freq, std::abs(hits[j] / trials - p));
    const double diff = proj_sum[j] / trials - p * x[j];
    err_sq += diff * diff;
    ref_sq += p * x[j] * p * x[j];
  }
  const double rel = std::sqrt(err_sq / ref_sq);
  return {worst_freq <= 0.01 && rel <= 0.02,
          fmt::format("1e5 masks d={} K={}: max |freq - K/d| = {:.5f} (tol 0.01), mean projection rel err {:.5f} "
                      "(tol 0.02)",
                      d, k, worst_freq, rel)};
}

Verdict gradient_correctness() {
  const std::size_t d = 12;
  const Dataset data = small_logistic(d, 60, 99);
  RngStream pick(8, StreamKey{Purpose::test, 8, 0, 0});
  double worst = 0.0;
  for (int point = 0; point < 50; ++point) {
    const RegularizerParams reg = point % 2 == 0 ? RegularizerParams{0.0, 1.0} : RegularizerParams{0.3, 0.7};
    ModelVector w(d);
    for (std::size_t j = 0; j < d; ++j) w[j] = pick.normal();
    const ModelVector g = full_gradient(w, data, reg);
    double err = 0.0, ref = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(w[j]));
      ModelVector wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      const double fd = (objective_value(wp, data, reg) - objective_value(wm, data, reg)) / (wp[j] - wm[j]);
      err += (fd - g[j]) * (fd - g[j]);
      ref += g[j] * g[j];
    }
    worst = std::max(worst, std::sqrt(err) / std::max(std::sqrt(ref), 1e-8));
  }
  return {worst <= 1e-5, fmt::format("50 points, max relative error {:.3e} (tol 1e-5)", worst)};
}

Verdict theory_specializations() {
  std::vector<std::string> failures;
  const BoundParams full = BoundParams::make(0.3, 0.7, 50, 50);
  if (!(full.c == 0.0 && full.B == 0.0 && full.D == 1.0)) failures.push_back("K=d constants");

  const ProblemConstants pc{2.0, 0.5, 1.5, 3.0};
  const TimingPlan no_delay = build_plan(std::vector<std::int64_t>{1, 2, 3, 6}, 3, 0);
  const TimingAggregates agg0 = aggregates(no_delay);
  if (agg0.s_q != 0) failures.push_back("S_Q != 0 at zeta=0");
  const BoundParams sparse = BoundParams::make(0.1, 0.1, 30, 100);
  BoundParams no_d = sparse;
  no_d.D = 0.0;
  const double eta0 = max_stepsize(pc.L, agg0.h_max);
  if (rate_bound(pc, agg0, sparse, eta0, 4, 10).disagreement != rate_bound(pc, agg0, no_d, eta0, 4, 10).disagreement) {
    failures.push_back("term4 has an S_Q part at zeta=0");
  }

  const std::int64_t n = 8, R = 40;
  const TimingPlan mb = build_plan(std::vector<std::int64_t>(n, 1), 1, 0);
  const TimingAggregates agg1 = aggregates(mb);
  const BoundParams dense = BoundParams::make(1.0, 1.0, 10, 10);
  const double eta = max_stepsize(pc.L, agg1.h_max);
  const RateBound rb = rate_bound(pc, agg1, dense, eta, n, R);
  const double expected = 4.0 * pc.delta / (eta * R) + 4.0 * pc.L * eta * pc.sigma_sq / n;
  if (!(agg1.h_bar == 1.0 && agg1.h_max == 1 && agg1.psi_h == 0 && agg1.s_n == n)) failures.push_back("aggregates");
  if (!(rb.local_drift == 0.0 && rb.disagreement == 0.0)) failures.push_back("term3/term4 nonzero");
  if (rb.total != expected) failures.push_back(fmt::format("total {} != {}", rb.total, expected));

  bool accepted = true, rejected = false;
  try {
    validate_stepsize(1.0 / (8.0 * pc.L * 24), pc.L, 24);
  } catch (const ConfigError&) {
    accepted = false;
  }
  try {
    validate_stepsize(std::nextafter(1.0 / (8.0 * pc.L * 24), 1.0), pc.L, 24);
  } catch (const ConfigError&) {
    rejected = true;
  }
  if (!accepted || !rejected) failures.push_back("stepsize validator");

  std::string detail = "K=d, zeta=0, minibatch and stepsize checks exact";
  if (!failures.empty()) {
    detail = "failed:";
    for (const auto& f : failures) detail += " [" + f + "]";
  }
  return {failures.empty(), detail};
}

Verdict communication_accounting() {
  auto make = [](double p) {
    const std::string yaml = fmt::format(R"(
name: comm
dataset: {{synthetic: {{dim: 100, n_examples: 1000, separation: 1.0, seed: 3}}}}
taus: [1, 2, 3, 6]
M: 3
zeta: 6
methods: [local_sparse, overlap_overwrite, overlap_delay_corrected]
eta: 0.05
batch_size: 32
p: {}
rounds: 7
seeds: [4]
)",
                                         p);
    return validate_config_text(yaml, std::filesystem::temp_directory_path());
  };
  const ExperimentConfig lo = make(0.01);
  const ExperimentConfig hi = make(0.3);
  std::vector<std::string> failures;
  std::map<Method, std::int64_t> bits_lo, bits_hi;
  for (const ExperimentConfig* cfg : {&lo, &hi}) {
    const Dataset full = load_dataset(*cfg);
    const SeedArtifacts art = prepare_seed(*cfg, full, cfg->seeds[0]);
    const auto n = static_cast<std::int64_t>(cfg->workers());
    const auto K = static_cast<std::int64_t>(cfg->k);
    const auto B = static_cast<std::int64_t>(cfg->batch_size);
    const std::int64_t R = cfg->rounds;
    for (Method m : cfg->methods) {
      const RunResult run = run_method(*cfg, art, m);
      const MetricsRecord& last = run.records.back();
      const auto& steps = is_overlap(m) ? cfg->plan.H : cfg->plan.N;
      const std::int64_t sum_steps = std::accumulate(steps.begin(), steps.end(), std::int64_t{0});
      if (last.comm_bits != 2 * n * K * 32 * R) failures.push_back(fmt::format("{} bits", to_string(m)));
      if (last.processed_examples != B * R * sum_steps) failures.push_back(fmt::format("{} examples", to_string(m)));
      (cfg == &lo ? bits_lo : bits_hi)[m] = last.comm_bits;
    }
  }
  for (const auto& [m, b] : bits_lo) {
    if (b * static_cast<std::int64_t>(hi.k) != bits_hi[m] * static_cast<std::int64_t>(lo.k)) {
      failures.push_back(fmt::format("{} ratio", to_string(m)));
    }
  }
  std::string detail = fmt::format("K(0.01)={} K(0.3)={}, bits ratio {}/{} matches; closed forms exact", lo.k, hi.k,
                                   bits_lo.begin()->second, bits_hi.begin()->second);
  if (!failures.empty()) {
    detail = "mismatch:";
    for (const auto& f : failures) detail += " " + f;
  }
  return {failures.empty(), detail};
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[std::filesystem::relative(e.path(), dir).string()] = ss.str();
  }
  return files;
}

Verdict determinism() {
  ExperimentConfig cfg = load_config(kConfigDir / "method_ordering.yaml");
  cfg.seeds = {1, 2};
  cfg.rounds = 5;
  const auto root = std::filesystem::temp_directory_path() / fmt::format("ovl_accept_det_{}", ::getpid());
  std::filesystem::remove_all(root);
  SuiteOptions opts;
  opts.output_dir = root;
  run_suite(cfg, opts);
  const auto first = snapshot(root);
  run_suite(cfg, opts);
  const auto second = snapshot(root);
  std::filesystem::remove_all(root);
  std::size_t bytes = 0;
  for (const auto& [k, v] : first) bytes += v.size();
  return {first == second && first.size() == 2 * 3 * 2 + 1,
          fmt::format("{} files, {} bytes, identical across two runs", first.size(), bytes)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "average-evolution identity", 10, average_evolution},
      {2, "mask-expectation identity", 30, mask_expectation},
      {3, "minibatch SGD equivalence", 5, minibatch_equivalence},
      {4, "step-count exactness", 0, step_counts},
      {5, "method ordering", 120, method_ordering},
      {6, "long-delay amplification", 240, long_delay_amplification},
      {7, "Rand-K statistics", 0, rand_k_statistics},
      {8, "gradient correctness", 0, gradient_correctness},
      {9, "theory specializations", 0, theory_specializations},
      {10, "communication accounting", 0, communication_accounting},
      {11, "determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
      v.pass = false;
      v.detail += fmt::format("; runtime {:.2f}s over the {:.0f}s limit", secs, c.time_limit_s);
    }
    if (!v.pass) ++failed;
    fmt::print("[{}] criterion {:2d} {}: {} ({:.2f}s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail, secs);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
