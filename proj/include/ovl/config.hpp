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
#include <string_view>
#include <vector>

#include "ovl/data.hpp"
#include "ovl/engine.hpp"
#include "ovl/error.hpp"
#include "ovl/objective.hpp"
#include "ovl/timing.hpp"

namespace YAML {
class Emitter;
class Node;
}  // namespace YAML

namespace ovl {

struct DatasetConfig {
  /// Exactly one of `synthetic` and `path` is set.
  std::optional<SyntheticSpec> synthetic;
  std::filesystem::path path;
  std::optional<std::size_t> dimension;
};

/// Inputs of the bound calculator. Unset constants are estimated from the
/// data; unset alpha/beta are tuned by grid search.
struct TheoryConfig {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> L;
  std::optional<double> sigma_sq;
  std::optional<double> G;
  std::optional<double> delta;
  double epsilon = 0.01;
  double c_R = 12.0;
  std::size_t estimate_samples = 64;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::filesystem::path output_dir = "runs";
  DatasetConfig dataset;
  bool normalize = false;
  double val_fraction = 0.0;
  PartitionMode partition = PartitionMode::shared;
  double dirichlet_alpha = 0.5;
  std::vector<std::int64_t> taus;
  std::int64_t M = 1;
  std::int64_t zeta = 0;
  std::optional<std::int64_t> compute_window;
  std::vector<Method> methods;
  double eta = 0.1;
  std::size_t batch_size = 1;
  double p = 1.0;
  std::int64_t rounds = 1;
  std::vector<std::uint64_t> seeds{1};
  RegularizerParams regularizer;
  std::int64_t value_bit_width = 32;
  std::int64_t eval_every = 1;
  bool eval_per_worker = false;
  TheoryConfig theory;

  /// Filled by validation.
  std::size_t dim = 0;
  std::size_t k = 0;
  TimingPlan plan;

  std::size_t workers() const { return taus.size(); }
};

struct ConfigIssue {
  std::string field;
  std::string message;
  std::string hint;
};

/// Every problem found in a config, not just the first.
class ConfigValidationError : public ConfigError {
 public:
  explicit ConfigValidationError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

std::string format_issue(const ConfigIssue& issue);

/// K = max(1, round_half_up(p * d)).
std::size_t mask_size(double p, std::size_t dim);

/// Parses and cross-checks a config tree. Relative paths resolve against
/// `base_dir`. A dataset file without an explicit `dimension` is read to
/// learn d. Throws ConfigValidationError listing every issue.
ExperimentConfig validate_config(const YAML::Node& root, const std::filesystem::path& base_dir);

/// Same, from YAML text.
ExperimentConfig validate_config_text(std::string_view text, const std::filesystem::path& base_dir);

/// Reads `path` and validates it relative to its directory.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Writes the resolved config's keys into an open YAML map (every default
/// spelled out, paths absolute). Feeding them back to validate_config yields
/// the same config.
void emit_config(const ExperimentConfig& cfg, YAML::Emitter& out);

/// Top-level keys validate_config accepts but ignores (manifest sections).
inline constexpr std::string_view kManifestOnlyKeys[] = {"derived", "runs"};

}  // namespace ovl
