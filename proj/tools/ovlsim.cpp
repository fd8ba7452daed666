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
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/core.h>
#include <fmt/ranges.h>

#include "CLI11.hpp"
#include "ovl/config.hpp"
#include "ovl/error.hpp"
#include "ovl/kernels.hpp"
#include "ovl/suite.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitDiverged = 2;

void print_issues(const ovl::ConfigValidationError& e) {
  fmt::print(stderr, "invalid config ({} issue(s)):\n", e.issues().size());
  for (const auto& is : e.issues()) fmt::print(stderr, "  {}\n", ovl::format_issue(is));
}

int cmd_validate(const std::string& path) {
  const ovl::ExperimentConfig cfg = ovl::load_config(path);
  fmt::print("ok: {} (d={}, K={}, n={}, tau={}, N=({}), Q=({}), round duration {})\n", cfg.name, cfg.dim, cfg.k,
             cfg.workers(), cfg.plan.tau, fmt::join(cfg.plan.N, ","), fmt::join(cfg.plan.Q, ","),
             cfg.plan.round_duration());
  return kExitOk;
}

int cmd_run(const std::string& path, const std::optional<std::string>& out_dir) {
  const ovl::ExperimentConfig cfg = ovl::load_config(path);
  ovl::SuiteOptions opts;
  if (out_dir) opts.output_dir = std::filesystem::absolute(*out_dir);
  const ovl::SuiteResult res = ovl::run_suite(cfg, opts);
  for (const auto& r : res.runs) {
    if (r.diverged) {
      fmt::print(stderr, "seed {} {}: diverged at round {}: {}\n", r.seed, ovl::to_string(r.method),
                 r.diverged_round.value_or(-1), r.message);
    } else if (!r.records.empty()) {
      fmt::print("seed {} {}: final train loss {}\n", r.seed, ovl::to_string(r.method),
                 ovl::format_double(r.records.back().train_loss));
    }
  }
  fmt::print("manifest: {}\n", res.manifest.string());
  return res.any_diverged() ? kExitDiverged : kExitOk;
}

int cmd_theory(const std::string& path) {
  const ovl::ExperimentConfig cfg = ovl::load_config(path);
  const ovl::TheoryReport rep = ovl::theory_report(cfg);
  std::cout << ovl::theory_report_json(cfg, rep);
  return kExitOk;
}

int cmd_gen_data(const std::string& path, const std::optional<std::string>& out) {
  std::optional<std::filesystem::path> override_path;
  if (out) override_path = std::filesystem::path(*out);
  const auto written = ovl::generate_data(path, override_path);
  fmt::print("wrote {}\n", written.string());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-driven simulator for local SGD with overlapped sparse averaging"};
  app.require_subcommand(1);
  std::string kernels = "auto";
  app.add_option("--kernels", kernels, "Vector kernels: auto, scalar, avx2, neon")->capture_default_str();

  std::string config_path;
  std::optional<std::string> out_dir;
  auto* run = app.add_subcommand("run", "Run every (method, seed) pair of a config");
  run->add_option("config", config_path, "Experiment config (YAML)")->required();
  run->add_option("--out", out_dir, "Override the config's output_dir");

  auto* theory = app.add_subcommand("theory", "Print bound constants and terms as JSON");
  theory->add_option("config", config_path, "Experiment config (YAML)")->required();

  auto* validate = app.add_subcommand("validate", "Check a config and print derived quantities");
  validate->add_option("config", config_path, "Experiment config (YAML)")->required();

  std::string spec_path;
  std::optional<std::string> data_out;
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic two-blob dataset in LIBSVM format");
  gen->add_option("spec", spec_path, "Data spec (YAML: dim, n_examples, separation, seed, output)")->required();
  gen->add_option("--out", data_out, "Override the spec's output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (!ovl::kernels::select(kernels)) {
      fmt::print(stderr, "kernels '{}' not available on this machine\n", kernels);
      return kExitInvalid;
    }
    if (*run) return cmd_run(config_path, out_dir);
    if (*theory) return cmd_theory(config_path);
    if (*validate) return cmd_validate(config_path);
    if (*gen) return cmd_gen_data(spec_path, data_out);
  } catch (const ovl::ConfigValidationError& e) {
    print_issues(e);
    return kExitInvalid;
  } catch (const ovl::DivergenceError& e) {
    fmt::print(stderr, "diverged: {}\n", e.what());
    return kExitDiverged;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitInvalid;
  }
  return kExitInvalid;
}
