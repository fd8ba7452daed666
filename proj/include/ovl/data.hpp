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
#include <string>
#include <string_view>
#include <vector>

#include "ovl/objective.hpp"

namespace ovl {

/// Parse LIBSVM text ("label idx:val idx:val ..." with 1-based increasing
/// indices). Raw labels are mapped to {-1, +1}: labels already in {-1, +1}
/// are kept, otherwise the numerically smaller of two distinct values becomes
/// -1. A single non-{-1,+1} label value maps by sign (> 0 is +1).
///
/// `dim` overrides the inferred dimension (max index seen) and must be at
/// least that large. Throws ParseError (with line number) on malformed lines,
/// ConfigError on an empty input or more than two label values.
Dataset parse_libsvm(std::string_view text, std::optional<std::size_t> dim = std::nullopt);

/// Reads a LIBSVM file, transparently decompressing gzip.
Dataset read_libsvm(const std::string& path, std::optional<std::size_t> dim = std::nullopt);

/// Inverse of parse_libsvm for {-1, +1} labels; zero features are omitted and
/// values are printed in shortest round-trip form.
std::string to_libsvm(const Dataset& data);

struct TrainValSplit {
  Dataset train;
  Dataset val;
  std::vector<std::uint32_t> val_indices;
};

/// Uniform split without replacement: |val| = floor(n * val_fraction).
/// Both parts keep the original relative example order.
TrainValSplit split_train_val(const Dataset& data, double val_fraction, std::uint64_t seed);

struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> stdev;

  static constexpr double kStdevFloor = 1e-12;

  /// Population mean/stdev per feature; stdev floored at kStdevFloor.
  static NormalizationStats fit(const Dataset& train);
  void apply(Dataset& data) const;
};

enum class PartitionMode { shared, shard, dirichlet };

struct Partition {
  PartitionMode mode = PartitionMode::shared;
  double alpha = 0.0;
  std::vector<std::vector<std::uint32_t>> assignments;
  /// Human-readable notes, e.g. workers that received no examples.
  std::vector<std::string> warnings;

  std::size_t workers() const { return assignments.size(); }
};

/// Every worker samples from the whole training set.
Partition partition_shared(std::size_t n_examples, std::size_t n_workers);

/// Random permutation split into contiguous, near-equal disjoint shards.
Partition partition_shard(std::size_t n_examples, std::size_t n_workers, std::uint64_t seed);

/// For each label class: Dirichlet(alpha, ..., alpha) proportions over the
/// workers, turned into counts by largest-remainder rounding, applied to a
/// shuffled list of that class's examples. Disjoint cover of the training set.
Partition partition_dirichlet(const Dataset& train, std::size_t n_workers, double alpha, std::uint64_t seed);

std::string_view to_string(PartitionMode mode);

/// Two Gaussian blobs in R^d: x = y * mu + N(0, I) with ||mu|| = separation / 2
/// along a random direction, and exactly balanced labels in random order.
struct SyntheticSpec {
  std::size_t dim = 100;
  std::size_t n_examples = 8000;
  double separation = 1.0;
  std::uint64_t seed = 1;
};

Dataset make_synthetic(const SyntheticSpec& spec);

/// FNV-1a over the raw bytes of features and labels; used to fingerprint
/// artifacts in run manifests.
std::uint64_t fingerprint(const Dataset& data);
std::uint64_t fingerprint(const Partition& partition);

}  // namespace ovl
