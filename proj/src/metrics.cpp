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
#include "ovl/metrics.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/core.h>
#include "json.hpp"

#include "ovl/error.hpp"
#include "ovl/kernels.hpp"

namespace ovl {

DriftDiagnostics drift_diagnostics(std::span<const WorkerState> states) {
  std::vector<ModelVector> u, v, y, z;
  for (const auto& st : states) {
    u.push_back(subtract(st.y, st.x));
    v.push_back(subtract(st.z, st.y));
    y.push_back(st.y);
    z.push_back(st.z);
  }
  return {disagreement(u), disagreement(v), disagreement(y), disagreement(z)};
}

double accuracy(const ModelVector& w, const Dataset& data) {
  if (data.empty()) throw UsageError("accuracy: empty dataset");
  const auto& k = kernels::active();
  std::size_t correct = 0;
  for (std::size_t e = 0; e < data.size(); ++e) {
    const auto x = data.row(e);
    const double pred = k.dot(x.data(), w.data(), w.dim()) >= 0.0 ? 1.0 : -1.0;
    if (pred == data.labels[e]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

void accumulate(Counters& counters, const RoundOutcome& outcome) {
  counters.round += 1;
  counters.logical_time += outcome.duration;
  counters.processed_examples += outcome.examples_processed;
  counters.comm_coordinates += outcome.coordinates_sent;
}

MetricsRecord measure_round(std::span<const WorkerState> states, const Counters& counters, const EvalData& eval,
                            std::int64_t value_bit_width) {
  if (eval.train == nullptr) throw UsageError("measure_round: no training data");
  std::vector<ModelVector> xs;
  for (const auto& st : states) xs.push_back(st.x);
  const ModelVector x_bar = average(xs);

  MetricsRecord rec;
  rec.round = counters.round;
  rec.logical_time = counters.logical_time;
  rec.processed_examples = counters.processed_examples;
  rec.comm_coordinates = counters.comm_coordinates;
  rec.comm_bits = counters.comm_coordinates * value_bit_width;
  rec.train_loss = objective_value(x_bar, *eval.train, eval.reg);
  rec.train_accuracy = accuracy(x_bar, *eval.train);
  rec.grad_norm = norm(full_gradient(x_bar, *eval.train, eval.reg));
  rec.disagreement_x = disagreement(xs);
  if (eval.val != nullptr && !eval.val->empty()) {
    rec.val_loss = objective_value(x_bar, *eval.val, eval.reg);
    rec.val_accuracy = accuracy(x_bar, *eval.val);
  }
  if (eval.per_worker) {
    for (const auto& x : xs) rec.worker_train_loss.push_back(objective_value(x, *eval.train, eval.reg));
  }
  return rec;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(line, fmt::format("bad number '{}'", s));
  return v;
}

std::int64_t parse_int(std::string_view s, std::size_t line) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(line, fmt::format("bad integer '{}'", s));
  return v;
}

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> records) {
  out << kMetricsCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.round << ',' << r.logical_time << ',' << format_double(r.train_loss) << ',' << opt_field(r.val_loss)
        << ',' << format_double(r.train_accuracy) << ',' << opt_field(r.val_accuracy) << ','
        << format_double(r.grad_norm) << ',' << format_double(r.disagreement_x) << ',' << r.processed_examples << ','
        << r.comm_coordinates << ',' << r.comm_bits << '\n';
  }
}

void write_metrics_jsonl(std::ostream& out, std::span<const MetricsRecord> records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["round"] = r.round;
    j["logical_time"] = r.logical_time;
    j["train_loss"] = r.train_loss;
    j["val_loss"] = opt_json(r.val_loss);
    j["train_accuracy"] = r.train_accuracy;
    j["val_accuracy"] = opt_json(r.val_accuracy);
    j["grad_norm"] = r.grad_norm;
    j["disagreement_x"] = r.disagreement_x;
    j["processed_examples"] = r.processed_examples;
    j["comm_coordinates"] = r.comm_coordinates;
    j["comm_bits"] = r.comm_bits;
    if (!r.worker_train_loss.empty()) j["worker_train_loss"] = r.worker_train_loss;
    out << j.dump() << '\n';
  }
}

std::vector<MetricsRecord> read_metrics_csv(std::istream& in) {
  std::vector<MetricsRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != kMetricsCsvHeader) throw ParseError(1, "unexpected metrics header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest = line;
    for (;;) {
      const std::size_t comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 11) throw ParseError(line_no, fmt::format("expected 11 fields, got {}", f.size()));
    MetricsRecord r;
    r.round = parse_int(f[0], line_no);
    r.logical_time = parse_int(f[1], line_no);
    r.train_loss = parse_double(f[2], line_no);
    if (!f[3].empty()) r.val_loss = parse_double(f[3], line_no);
    r.train_accuracy = parse_double(f[4], line_no);
    if (!f[5].empty()) r.val_accuracy = parse_double(f[5], line_no);
    r.grad_norm = parse_double(f[6], line_no);
    r.disagreement_x = parse_double(f[7], line_no);
    r.processed_examples = parse_int(f[8], line_no);
    r.comm_coordinates = parse_int(f[9], line_no);
    r.comm_bits = parse_int(f[10], line_no);
    records.push_back(r);
  }
  if (line_no == 0) throw ParseError(1, "missing metrics header");
  return records;
}

std::vector<MetricsRecord> read_metrics_jsonl(std::istream& in) {
  std::vector<MetricsRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    MetricsRecord r;
    r.round = j.at("round").get<std::int64_t>();
    r.logical_time = j.at("logical_time").get<std::int64_t>();
    r.train_loss = j.at("train_loss").get<double>();
    if (!j.at("val_loss").is_null()) r.val_loss = j.at("val_loss").get<double>();
    r.train_accuracy = j.at("train_accuracy").get<double>();
    if (!j.at("val_accuracy").is_null()) r.val_accuracy = j.at("val_accuracy").get<double>();
    r.grad_norm = j.at("grad_norm").get<double>();
    r.disagreement_x = j.at("disagreement_x").get<double>();
    r.processed_examples = j.at("processed_examples").get<std::int64_t>();
    r.comm_coordinates = j.at("comm_coordinates").get<std::int64_t>();
    r.comm_bits = j.at("comm_bits").get<std::int64_t>();
    if (j.contains("worker_train_loss")) r.worker_train_loss = j.at("worker_train_loss").get<std::vector<double>>();
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace ovl
