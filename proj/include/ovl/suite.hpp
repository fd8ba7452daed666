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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ovl/config.hpp"
#include "ovl/metrics.hpp"
#include "ovl/theory.hpp"

namespace ovl {

/// Data artifacts shared by every method of one seed.
struct SeedArtifacts {
  std::uint64_t seed = 0;
  Dataset train;
  Dataset val;
  Partition partition;
};

/// Loads (or generates) the configured dataset.
Dataset load_dataset(const ExperimentConfig& cfg);

/// Split, normalization (fit on train) and worker partition for one seed.
SeedArtifacts prepare_seed(const ExperimentConfig& cfg, const Dataset& full, std::uint64_t seed);

struct RunResult {
  std::uint64_t seed = 0;
  Method method = Method::overlap_delay_corrected;
  bool diverged = false;
  std::optional<std::int64_t> diverged_round;
  std::string message;
  std::vector<MetricsRecord> records;
  std::filesystem::path csv;
  std::filesystem::path jsonl;
};

/// One (method, seed) run: x0 = 0 on every worker, rounds 0..R-1, a metrics
/// row for the initial state and after every eval_every-th and the final round.
/// A divergence stops the run and is reported in the result, not thrown.
RunResult run_method(const ExperimentConfig& cfg, const SeedArtifacts& art, Method method);

struct SuiteOptions {
  /// Overrides the config's output_dir.
  std::optional<std::filesystem::path> output_dir;
  /// When false nothing is written to disk.
  bool write_files = true;
};

struct SuiteResult {
  std::filesystem::path run_dir;
  std::filesystem::path manifest;
  std::vector<RunResult> runs;

  bool any_diverged() const;
};

/// Every (method, seed) pair with shared data artifacts. Writes
/// {output_dir}/{name}/seed{s}/{method}.csv and .jsonl plus
/// {output_dir}/{name}/manifest.yaml, each atomically.
SuiteResult run_suite(const ExperimentConfig& cfg, const SuiteOptions& options = {});

/// Replaces `path` with `content` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// The manifest text: resolved config, derived quantities, artifact
/// fingerprints and per-run status. Deterministic.
std::string manifest_yaml(const ExperimentConfig& cfg, const std::vector<SeedArtifacts>& seeds,
                          const std::vector<RunResult>& runs, std::uint64_t dataset_fingerprint);

struct TheoryReport {
  TimingAggregates aggregates;
  BoundParams bound;
  bool bound_params_tuned = false;
  ProblemConstants constants;
  /// Which of L, sigma_sq, G, delta were estimated rather than given.
  std::vector<std::string> estimated;
  double max_eta = 0.0;
  bool eta_admissible = false;
  std::optional<RateBound> rate;
  std::int64_t round_complexity = 0;
  TimeComplexity time_for_config_rounds{};
  TimeComplexity time_for_round_complexity{};
};

/// Bound constants and terms for the config's first sparse method setting
/// (K from p). Unset constants are estimated on the first seed's data at x0=0.
TheoryReport theory_report(const ExperimentConfig& cfg);

/// JSON text of the report (one object, trailing newline).
std::string theory_report_json(const ExperimentConfig& cfg, const TheoryReport& report);

/// Reads a synthetic-data spec (YAML: dim, n_examples, separation, seed,
/// output) and writes the LIBSVM file; returns the written path.
std::filesystem::path generate_data(const std::filesystem::path& spec_path,
                                    const std::optional<std::filesystem::path>& output_override);

}  // namespace ovl
