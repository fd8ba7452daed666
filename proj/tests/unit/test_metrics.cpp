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
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "ovl/data.hpp"
#include "ovl/error.hpp"
#include "ovl/metrics.hpp"

using namespace ovl;

namespace {

WorkerState state_at(ModelVector x) { return WorkerState{x, x, x, 0, 0}; }

}  // namespace

TEST_CASE("disagreement and drift diagnostics") {
  const Dataset d = make_synthetic(SyntheticSpec{1, 10, 1.0, 1});
  EvalData eval;
  eval.train = &d;
  std::vector<WorkerState> same{state_at(ModelVector{0.5}), state_at(ModelVector{0.5})};
  CHECK(measure_round(same, {}, eval, 32).disagreement_x == 0.0);
  std::vector<WorkerState> apart{state_at(ModelVector{0.0}), state_at(ModelVector{2.0})};
  CHECK(measure_round(apart, {}, eval, 32).disagreement_x == 2.0);

  std::vector<WorkerState> s(2);
  s[0] = WorkerState{ModelVector{0}, ModelVector{1}, ModelVector{1}, 0, 0};
  s[1] = WorkerState{ModelVector{0}, ModelVector{3}, ModelVector{3}, 0, 0};
  const DriftDiagnostics dd = drift_diagnostics(s);
  CHECK(dd.u_sq == 2.0);
  CHECK(dd.v_sq == 0.0);
  CHECK(dd.y_sq == 2.0);
  CHECK(dd.z_sq == 2.0);
}

TEST_CASE("accuracy tie rule") {
  const Dataset d = make_synthetic(SyntheticSpec{3, 100, 1.0, 2});
  CHECK(accuracy(ModelVector(3), d) == 0.5);
}

TEST_CASE("measurement fields") {
  const Dataset train = make_synthetic(SyntheticSpec{2, 20, 1.0, 3});
  EvalData eval;
  eval.train = &train;
  eval.per_worker = true;
  Counters c{3, 72, 1000, 60};
  std::vector<WorkerState> st{state_at(ModelVector{0.1, 0.2}), state_at(ModelVector{0.3, 0.0})};
  const MetricsRecord r = measure_round(st, c, eval, 32);
  CHECK(r.round == 3);
  CHECK(r.comm_bits == 60 * 32);
  CHECK_FALSE(r.val_loss.has_value());
  CHECK(r.worker_train_loss.size() == 2);
  CHECK(r.train_loss == objective_value(ModelVector{0.2, 0.1}, train, {}));
  CHECK(r.grad_norm == norm(full_gradient(ModelVector{0.2, 0.1}, train, {})));
}

TEST_CASE("counters accumulate one round") {
  RoundOutcome o{.mask = Mask::full(1)};
  o.duration = 24;
  o.examples_processed = 100;
  o.coordinates_sent = 16;
  Counters c;
  accumulate(c, o);
  accumulate(c, o);
  CHECK(c.round == 2);
  CHECK(c.logical_time == 48);
  CHECK(c.processed_examples == 200);
  CHECK(c.comm_coordinates == 32);
}

TEST_CASE("csv and jsonl round trip") {
  std::vector<MetricsRecord> recs(2);
  recs[0] = {0, 0, 0.6931471805599453, 0.7, 0.5, 0.5, 0.25, 0.0, 0, 0, 0, {}};
  recs[1] = {1, 24, 0.1 + 0.2, std::nullopt, 0.875, std::nullopt, 1e-300, 3.0, 12288, 240, 7680, {0.5, 1.0 / 3.0}};

  std::ostringstream csv;
  write_metrics_csv(csv, recs);
  CHECK(csv.str().rfind(std::string(kMetricsCsvHeader) + "\n", 0) == 0);
  CHECK(csv.str().find('\r') == std::string::npos);
  std::istringstream csv_in(csv.str());
  auto back = read_metrics_csv(csv_in);
  REQUIRE(back.size() == 2);
  recs[1].worker_train_loss.clear();
  CHECK(back == recs);

  recs[1].worker_train_loss = {0.5, 1.0 / 3.0};
  std::ostringstream jsonl;
  write_metrics_jsonl(jsonl, recs);
  std::istringstream jsonl_in(jsonl.str());
  CHECK(read_metrics_jsonl(jsonl_in) == recs);
}

TEST_CASE("empty run writes only the header") {
  std::ostringstream csv;
  write_metrics_csv(csv, {});
  CHECK(csv.str() == std::string(kMetricsCsvHeader) + "\n");
  std::ostringstream jsonl;
  write_metrics_jsonl(jsonl, {});
  CHECK(jsonl.str().empty());
}

TEST_CASE("csv parse errors carry line numbers") {
  std::istringstream bad(std::string(kMetricsCsvHeader) + "\n1,2,3\n");
  try {
    read_metrics_csv(bad);
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-300) == "1e-300");
}
