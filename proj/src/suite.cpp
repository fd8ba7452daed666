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
#include "ovl/suite.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/core.h>
#include <yaml-cpp/yaml.h>
#include "json.hpp"

#include "ovl/error.hpp"

namespace ovl {

Dataset load_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset.synthetic) return make_synthetic(*cfg.dataset.synthetic);
  return read_libsvm(cfg.dataset.path.string(), cfg.dataset.dimension);
}

SeedArtifacts prepare_seed(const ExperimentConfig& cfg, const Dataset& full, std::uint64_t seed) {
  SeedArtifacts art;
  art.seed = seed;
  TrainValSplit split = split_train_val(full, cfg.val_fraction, seed);
  art.train = std::move(split.train);
  art.val = std::move(split.val);
  if (cfg.normalize) {
    const auto stats = NormalizationStats::fit(art.train);
    stats.apply(art.train);
    if (!art.val.empty()) stats.apply(art.val);
  }
  const std::size_t n = cfg.workers();
  switch (cfg.partition) {
    case PartitionMode::shared:
      art.partition = partition_shared(art.train.size(), n);
      break;
    case PartitionMode::shard:
      art.partition = partition_shard(art.train.size(), n, seed);
      break;
    case PartitionMode::dirichlet:
      art.partition = partition_dirichlet(art.train, n, cfg.dirichlet_alpha, seed);
      break;
  }
  return art;
}

RunResult run_method(const ExperimentConfig& cfg, const SeedArtifacts& art, Method method) {
  RunResult res;
  res.seed = art.seed;
  res.method = method;
  if (cfg.rounds == 0) return res;

  const LogisticOracle oracle(art.train, art.partition.assignments, cfg.batch_size, cfg.regularizer, art.seed);
  RoundContext ctx;
  ctx.method = method;
  ctx.plan = cfg.plan;
  ctx.blocking_window = cfg.compute_window;
  ctx.k = cfg.k;
  ctx.eta = cfg.eta;
  ctx.root_seed = art.seed;
  check_compatible(ctx, cfg.dim);

  EvalData eval;
  eval.train = &art.train;
  eval.val = art.val.empty() ? nullptr : &art.val;
  eval.reg = cfg.regularizer;
  eval.per_worker = cfg.eval_per_worker;

  auto states = initial_states(cfg.workers(), ModelVector(cfg.dim));
  Counters counters;
  res.records.push_back(measure_round(states, counters, eval, cfg.value_bit_width));
  for (std::int64_t r = 0; r < cfg.rounds; ++r) {
    try {
      const RoundOutcome out = run_round(states, ctx, oracle, static_cast<std::uint32_t>(r));
      accumulate(counters, out);
      advance(states, out);
    } catch (const DivergenceError& e) {
      res.diverged = true;
      res.diverged_round = r;
      res.message = e.what();
      return res;
    }
    if ((r + 1) % cfg.eval_every == 0 || r + 1 == cfg.rounds) {
      const MetricsRecord rec = measure_round(states, counters, eval, cfg.value_bit_width);
      if (!std::isfinite(rec.train_loss)) {
        res.diverged = true;
        res.diverged_round = r;
        res.message = fmt::format("round {}: non-finite training loss", r);
        return res;
      }
      res.records.push_back(rec);
    }
  }
  return res;
}

bool SuiteResult::any_diverged() const {
  for (const auto& r : runs) {
    if (r.diverged) return true;
  }
  return false;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
    out << content;
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("write failed for {}", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot rename {} to {}: {}", tmp.string(), path.string(), ec.message()));
}

namespace {

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string seed_dir_name(std::uint64_t seed) { return fmt::format("seed{}", seed); }

}  // namespace

std::string manifest_yaml(const ExperimentConfig& cfg, const std::vector<SeedArtifacts>& seeds,
                          const std::vector<RunResult>& runs, std::uint64_t dataset_fingerprint) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  emit_config(cfg, out);

  out << YAML::Key << "derived" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "d" << YAML::Value << cfg.dim;
  out << YAML::Key << "K" << YAML::Value << cfg.k;
  out << YAML::Key << "tau" << YAML::Value << cfg.plan.tau;
  out << YAML::Key << "N" << YAML::Value << YAML::Flow << cfg.plan.N;
  out << YAML::Key << "Q" << YAML::Value << YAML::Flow << cfg.plan.Q;
  out << YAML::Key << "H" << YAML::Value << YAML::Flow << cfg.plan.H;
  out << YAML::Key << "round_duration" << YAML::Value << cfg.plan.round_duration();
  out << YAML::Key << "blocking_compute_window" << YAML::Value
      << cfg.compute_window.value_or(cfg.plan.compute_window());
  out << YAML::Key << "initialization" << YAML::Value << "zeros";
  out << YAML::Key << "dataset_fingerprint" << YAML::Value << hex64(dataset_fingerprint);
  out << YAML::Key << "seeds" << YAML::Value << YAML::BeginSeq;
  for (const auto& art : seeds) {
    out << YAML::BeginMap;
    out << YAML::Key << "seed" << YAML::Value << art.seed;
    out << YAML::Key << "n_train" << YAML::Value << art.train.size();
    out << YAML::Key << "n_val" << YAML::Value << art.val.size();
    out << YAML::Key << "train_fingerprint" << YAML::Value << hex64(fingerprint(art.train));
    out << YAML::Key << "val_fingerprint" << YAML::Value << hex64(fingerprint(art.val));
    out << YAML::Key << "partition_fingerprint" << YAML::Value << hex64(fingerprint(art.partition));
    if (!art.partition.warnings.empty()) {
      out << YAML::Key << "partition_warnings" << YAML::Value << art.partition.warnings;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;

  out << YAML::Key << "runs" << YAML::Value << YAML::BeginSeq;
  for (const auto& r : runs) {
    const std::string stem = fmt::format("{}/{}", seed_dir_name(r.seed), to_string(r.method));
    out << YAML::BeginMap;
    out << YAML::Key << "seed" << YAML::Value << r.seed;
    out << YAML::Key << "method" << YAML::Value << std::string(to_string(r.method));
    out << YAML::Key << "status" << YAML::Value << (r.diverged ? "diverged" : "ok");
    if (r.diverged_round) {
      out << YAML::Key << "diverged_round" << YAML::Value << *r.diverged_round;
      out << YAML::Key << "message" << YAML::Value << r.message;
    }
    out << YAML::Key << "rows" << YAML::Value << r.records.size();
    if (!r.records.empty()) {
      out << YAML::Key << "final_train_loss" << YAML::Value << format_double(r.records.back().train_loss);
    }
    out << YAML::Key << "csv" << YAML::Value << stem + ".csv";
    out << YAML::Key << "jsonl" << YAML::Value << stem + ".jsonl";
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  if (!out.good()) throw std::logic_error(fmt::format("manifest emitter: {}", out.GetLastError()));
  return std::string(out.c_str()) + "\n";
}

SuiteResult run_suite(const ExperimentConfig& cfg, const SuiteOptions& options) {
  SuiteResult result;
  const std::filesystem::path root = options.output_dir.value_or(cfg.output_dir);
  result.run_dir = root / cfg.name;
  result.manifest = result.run_dir / "manifest.yaml";

  const Dataset full = load_dataset(cfg);
  if (full.dim != cfg.dim) {
    throw ConfigError(fmt::format("dataset dimension {} differs from the validated {}", full.dim, cfg.dim));
  }
  std::vector<SeedArtifacts> seeds;
  for (std::uint64_t seed : cfg.seeds) seeds.push_back(prepare_seed(cfg, full, seed));
  if (cfg.rounds > 0) {
    for (const auto& art : seeds) {
      for (std::size_t i = 0; i < art.partition.workers(); ++i) {
        if (art.partition.assignments[i].empty()) {
          throw ConfigError(fmt::format("seed {}: worker {} received no training examples under the {} partition; "
                                        "use another seed, a larger alpha or fewer workers",
                                        art.seed, i, to_string(cfg.partition)));
        }
      }
    }
  }
  for (const SeedArtifacts& art : seeds) {
    const std::uint64_t seed = art.seed;
    for (Method m : cfg.methods) {
      RunResult run = run_method(cfg, art, m);
      const std::filesystem::path stem = result.run_dir / seed_dir_name(seed) / std::string(to_string(m));
      run.csv = stem.string() + ".csv";
      run.jsonl = stem.string() + ".jsonl";
      if (options.write_files) {
        std::ostringstream csv, jsonl;
        write_metrics_csv(csv, run.records);
        write_metrics_jsonl(jsonl, run.records);
        write_file_atomic(run.csv, csv.str());
        write_file_atomic(run.jsonl, jsonl.str());
      }
      result.runs.push_back(std::move(run));
    }
  }
  if (options.write_files) {
    write_file_atomic(result.manifest, manifest_yaml(cfg, seeds, result.runs, fingerprint(full)));
  }
  return result;
}

TheoryReport theory_report(const ExperimentConfig& cfg) {
  TheoryReport rep;
  rep.aggregates = aggregates(cfg.plan);
  const auto& th = cfg.theory;
  const auto K = static_cast<std::int64_t>(cfg.k);
  const auto d = static_cast<std::int64_t>(cfg.dim);
  if (th.alpha && th.beta) {
    rep.bound = BoundParams::make(*th.alpha, *th.beta, K, d);
  } else {
    rep.bound = tune_bound_params(K, d, rep.aggregates);
    rep.bound_params_tuned = true;
  }

  const bool need_estimates = !th.L || !th.sigma_sq || !th.G || !th.delta;
  if (need_estimates) {
    const Dataset full = load_dataset(cfg);
    const SeedArtifacts art = prepare_seed(cfg, full, cfg.seeds.front());
    const ModelVector x0(cfg.dim);
    const LogisticOracle oracle(art.train, art.partition.assignments, cfg.batch_size, cfg.regularizer,
                                art.seed);
    const ModelVector grad = full_gradient(x0, art.train, cfg.regularizer);
    const MomentEstimate mom = estimate_moments(oracle, x0, grad, cfg.workers(), th.estimate_samples);
    if (!th.L) {
      rep.constants.L = logistic_smoothness_bound(art.train, cfg.regularizer);
      rep.estimated.emplace_back("L");
    }
    if (!th.sigma_sq) {
      rep.constants.sigma_sq = mom.sigma_sq;
      rep.estimated.emplace_back("sigma_sq");
    }
    if (!th.G) {
      rep.constants.G = std::sqrt(mom.second_moment);
      rep.estimated.emplace_back("G");
    }
    if (!th.delta) {
      // Logistic loss and the regularizer are non-negative, so f* >= 0.
      rep.constants.delta = objective_value(x0, art.train, cfg.regularizer);
      rep.estimated.emplace_back("delta");
    }
  }
  if (th.L) rep.constants.L = *th.L;
  if (th.sigma_sq) rep.constants.sigma_sq = *th.sigma_sq;
  if (th.G) rep.constants.G = *th.G;
  if (th.delta) rep.constants.delta = *th.delta;

  rep.max_eta = max_stepsize(rep.constants.L, rep.aggregates.h_max);
  rep.eta_admissible = cfg.eta > 0.0 && cfg.eta <= rep.max_eta;
  const auto n = static_cast<std::int64_t>(cfg.workers());
  if (rep.eta_admissible && cfg.rounds > 0) {
    rep.rate = rate_bound(rep.constants, rep.aggregates, rep.bound, cfg.eta, n, cfg.rounds);
  }
  rep.round_complexity = round_complexity(rep.constants, rep.aggregates, rep.bound, n, th.epsilon, th.c_R);
  rep.time_for_config_rounds = time_complexity(cfg.rounds, cfg.plan);
  rep.time_for_round_complexity = time_complexity(rep.round_complexity, cfg.plan);
  return rep;
}

std::string theory_report_json(const ExperimentConfig& cfg, const TheoryReport& rep) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["name"] = cfg.name;
  j["n"] = cfg.workers();
  j["d"] = cfg.dim;
  j["K"] = cfg.k;
  j["eta"] = cfg.eta;
  j["rounds"] = cfg.rounds;
  const auto& a = rep.aggregates;
  j["timing"] = {{"tau", cfg.plan.tau},        {"N", cfg.plan.N},         {"Q", cfg.plan.Q},
                 {"H", cfg.plan.H},            {"round_duration", cfg.plan.round_duration()},
                 {"h_bar", a.h_bar},           {"h_max", a.h_max},        {"s_n", a.s_n},
                 {"s_q", a.s_q},               {"psi_h", a.psi_h},        {"tau_h", a.tau_h}};
  const auto& b = rep.bound;
  j["bound_params"] = {{"alpha", b.alpha}, {"beta", b.beta}, {"p", b.p}, {"q", b.q},
                       {"c", b.c},         {"B", b.B},       {"D", b.D}, {"tuned", rep.bound_params_tuned}};
  const auto& c = rep.constants;
  j["constants"] = {{"L", c.L}, {"sigma_sq", c.sigma_sq}, {"G", c.G}, {"delta", c.delta}, {"estimated", rep.estimated}};
  j["disagreement_budget_X"] = disagreement_budget(a, b);
  j["stepsize"] = {{"max_eta", rep.max_eta}, {"admissible", rep.eta_admissible}};
  if (rep.rate) {
    j["rate_bound"] = {{"term1_optimization", rep.rate->optimization},
                       {"term2_noise", rep.rate->noise},
                       {"term3_local_drift", rep.rate->local_drift},
                       {"term4_disagreement", rep.rate->disagreement},
                       {"total", rep.rate->total}};
  } else {
    j["rate_bound"] = nullptr;
    j["rate_bound_note"] = rep.eta_admissible ? "rounds = 0"
                                              : fmt::format("eta={} exceeds 1/(8 L H_max)={}", cfg.eta, rep.max_eta);
  }
  j["complexity"] = {{"epsilon", cfg.theory.epsilon},
                     {"c_R", cfg.theory.c_R},
                     {"rounds", rep.round_complexity},
                     {"time_seconds", rep.time_for_round_complexity.seconds},
                     {"config_rounds_time_seconds", rep.time_for_config_rounds.seconds},
                     {"harmonic_identity_holds", rep.time_for_round_complexity.harmonic_identity_holds &&
                                                     rep.time_for_config_rounds.harmonic_identity_holds}};
  return j.dump(2) + "\n";
}

std::filesystem::path generate_data(const std::filesystem::path& spec_path,
                                    const std::optional<std::filesystem::path>& output_override) {
  YAML::Node node;
  try {
    node = YAML::LoadFile(spec_path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigValidationError({{"<yaml>", e.what(), ""}});
  }
  if (!node.IsMap()) throw ConfigValidationError({{"<root>", "data spec must be a mapping", ""}});
  std::vector<ConfigIssue> issues;
  SyntheticSpec spec;
  std::filesystem::path output;
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    try {
      if (key == "dim") spec.dim = kv.second.as<std::size_t>();
      else if (key == "n_examples") spec.n_examples = kv.second.as<std::size_t>();
      else if (key == "separation") spec.separation = kv.second.as<double>();
      else if (key == "seed") spec.seed = kv.second.as<std::uint64_t>();
      else if (key == "output") output = kv.second.as<std::string>();
      else issues.push_back({key, "unknown key", "allowed keys: dim, n_examples, separation, seed, output"});
    } catch (const YAML::Exception&) {
      issues.push_back({key, "bad value", ""});
    }
  }
  if (spec.dim == 0) issues.push_back({"dim", "must be positive", ""});
  if (spec.n_examples < 2) issues.push_back({"n_examples", "must be at least 2", ""});
  if (!(spec.separation >= 0.0) || !std::isfinite(spec.separation)) {
    issues.push_back({"separation", "must be a finite non-negative number", ""});
  }
  if (output_override) output = *output_override;
  if (output.empty()) issues.push_back({"output", "missing", "set 'output' or pass --out"});
  if (!issues.empty()) throw ConfigValidationError(std::move(issues));
  if (output.is_relative() && !output_override) output = std::filesystem::absolute(spec_path).parent_path() / output;
  write_file_atomic(output, to_libsvm(make_synthetic(spec)));
  return output;
}

}  // namespace ovl
