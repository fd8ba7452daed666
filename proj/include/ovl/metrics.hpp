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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ovl/engine.hpp"
#include "ovl/objective.hpp"

namespace ovl {

/// One row of a run's metric stream. Validation fields are empty when the run
/// has no validation split.
struct MetricsRecord {
  std::int64_t round = 0;
  std::int64_t logical_time = 0;
  double train_loss = 0.0;
  std::optional<double> val_loss;
  double train_accuracy = 0.0;
  std::optional<double> val_accuracy;
  double grad_norm = 0.0;
  double disagreement_x = 0.0;
  std::int64_t processed_examples = 0;
  std::int64_t comm_coordinates = 0;
  std::int64_t comm_bits = 0;
  /// Only filled when per-worker evaluation is requested (JSONL only).
  std::vector<double> worker_train_loss;

  bool operator==(const MetricsRecord&) const = default;
};

/// Spread of the round's displacement vectors across workers:
/// u_i = y_i - x_i, v_i = z_i - y_i, and the y and z iterates themselves.
struct DriftDiagnostics {
  double u_sq = 0.0;
  double v_sq = 0.0;
  double y_sq = 0.0;
  double z_sq = 0.0;
};

DriftDiagnostics drift_diagnostics(std::span<const WorkerState> states);

/// Fraction of examples with sign(<x, w>) == y, predicting +1 on a tie.
double accuracy(const ModelVector& w, const Dataset& data);

struct EvalData {
  const Dataset* train = nullptr;
  const Dataset* val = nullptr;  // may be null or empty
  RegularizerParams reg;
  bool per_worker = false;
};

/// Cumulative counters carried between rounds.
struct Counters {
  std::int64_t round = 0;
  std::int64_t logical_time = 0;
  std::int64_t processed_examples = 0;
  std::int64_t comm_coordinates = 0;
};

/// Adds one round's time, examples and communicated coordinates.
void accumulate(Counters& counters, const RoundOutcome& outcome);

/// Evaluates the worker-average model of `states` (their x) on full batches.
MetricsRecord measure_round(std::span<const WorkerState> states, const Counters& counters, const EvalData& eval,
                            std::int64_t value_bit_width);

inline constexpr const char* kMetricsCsvHeader =
    "round,logical_time,train_loss,val_loss,train_accuracy,val_accuracy,grad_norm,disagreement_x,"
    "processed_examples,comm_coordinates,comm_bits";

/// Header plus one line per record; doubles in shortest round-trip form.
void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> records);
/// One JSON object per line.
void write_metrics_jsonl(std::ostream& out, std::span<const MetricsRecord> records);

/// Parses what write_metrics_csv wrote. Throws ParseError.
std::vector<MetricsRecord> read_metrics_csv(std::istream& in);
std::vector<MetricsRecord> read_metrics_jsonl(std::istream& in);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace ovl
