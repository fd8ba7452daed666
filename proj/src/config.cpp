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
#include "ovl/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>
#include <fmt/ranges.h>
#include <yaml-cpp/yaml.h>

#include "ovl/metrics.hpp"

namespace ovl {

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::string out = fmt::format("{} config issue(s)", issues.size());
  for (const auto& is : issues) out += "\n  " + format_issue(is);
  return out;
}

template <typename T>
constexpr const char* type_name() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else if constexpr (std::is_floating_point_v<T>) return "a number";
  else return "a string";
}

class Reader {
 public:
  std::vector<ConfigIssue> issues;

  void add(std::string field, std::string message, std::string hint = {}) {
    issues.push_back({std::move(field), std::move(message), std::move(hint)});
  }

  template <typename T>
  bool read(const YAML::Node& node, const std::string& field, T& out) {
    if (!node || node.IsNull()) return false;
    if (!node.IsScalar()) {
      add(field, fmt::format("expected {}", type_name<T>()));
      return false;
    }
    try {
      if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        // yaml-cpp happily converts "1.5" to 1 for some types; be strict.
        const std::string raw = node.Scalar();
        if (raw.find_first_of(".eE") != std::string::npos) throw YAML::BadConversion(node.Mark());
        if constexpr (std::is_unsigned_v<T>) {
          if (!raw.empty() && raw[0] == '-') throw YAML::BadConversion(node.Mark());
        }
      }
      out = node.as<T>();
      return true;
    } catch (const YAML::Exception&) {
      add(field, fmt::format("expected {}, got '{}'", type_name<T>(), node.Scalar()));
      return false;
    }
  }

  template <typename T>
  bool read_list(const YAML::Node& node, const std::string& field, std::vector<T>& out) {
    if (!node || node.IsNull()) return false;
    if (!node.IsSequence()) {
      add(field, fmt::format("expected a list of {} values", type_name<T>()));
      return false;
    }
    std::vector<T> values;
    bool ok = true;
    for (std::size_t i = 0; i < node.size(); ++i) {
      T v{};
      if (read(node[i], fmt::format("{}[{}]", field, i), v)) values.push_back(v);
      else ok = false;
    }
    if (ok) out = std::move(values);
    return ok;
  }

  void check_keys(const YAML::Node& map, const std::string& prefix, std::initializer_list<std::string_view> allowed) {
    for (const auto& kv : map) {
      const std::string key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
      add(prefix.empty() ? key : prefix + "." + key, "unknown key",
          fmt::format("allowed keys: {}", fmt::join(allowed, ", ")));
    }
  }
};

bool is_map(Reader& r, const YAML::Node& node, const std::string& field) {
  if (!node || node.IsNull()) return false;
  if (!node.IsMap()) {
    r.add(field, "expected a mapping");
    return false;
  }
  return true;
}

void read_dataset(Reader& r, const YAML::Node& node, const std::filesystem::path& base_dir, ExperimentConfig& cfg) {
  if (!node || node.IsNull()) {
    r.add("dataset", "missing", "give dataset.synthetic {dim, n_examples, separation, seed} or dataset.path");
    return;
  }
  if (!is_map(r, node, "dataset")) return;
  r.check_keys(node, "dataset", {"synthetic", "path", "dimension"});
  const bool has_syn = node["synthetic"] && !node["synthetic"].IsNull();
  const bool has_path = node["path"] && !node["path"].IsNull();
  if (has_syn == has_path) {
    r.add("dataset", "exactly one of 'synthetic' and 'path' must be given");
    return;
  }
  std::size_t dim = 0;
  if (r.read(node["dimension"], "dataset.dimension", dim)) {
    if (dim == 0) r.add("dataset.dimension", "must be positive");
    else cfg.dataset.dimension = dim;
  }
  if (has_syn) {
    const YAML::Node s = node["synthetic"];
    if (!is_map(r, s, "dataset.synthetic")) return;
    r.check_keys(s, "dataset.synthetic", {"dim", "n_examples", "separation", "seed"});
    SyntheticSpec spec;
    r.read(s["dim"], "dataset.synthetic.dim", spec.dim);
    r.read(s["n_examples"], "dataset.synthetic.n_examples", spec.n_examples);
    r.read(s["separation"], "dataset.synthetic.separation", spec.separation);
    r.read(s["seed"], "dataset.synthetic.seed", spec.seed);
    if (spec.dim == 0) r.add("dataset.synthetic.dim", "must be positive");
    if (spec.n_examples < 2) r.add("dataset.synthetic.n_examples", "must be at least 2");
    if (!(spec.separation >= 0.0) || !std::isfinite(spec.separation)) {
      r.add("dataset.synthetic.separation", "must be a finite non-negative number");
    }
    if (cfg.dataset.dimension && *cfg.dataset.dimension != spec.dim) {
      r.add("dataset.dimension", "disagrees with dataset.synthetic.dim", "drop dataset.dimension");
    }
    cfg.dataset.synthetic = spec;
    cfg.dim = spec.dim;
    return;
  }
  std::string raw;
  if (!r.read(node["path"], "dataset.path", raw)) return;
  std::filesystem::path p(raw);
  if (p.is_relative()) p = base_dir / p;
  cfg.dataset.path = std::filesystem::weakly_canonical(p);
  if (!std::filesystem::exists(cfg.dataset.path)) {
    r.add("dataset.path", fmt::format("file not found: {}", cfg.dataset.path.string()),
          "relative paths resolve against the config file's directory");
    return;
  }
  if (cfg.dataset.dimension) {
    cfg.dim = *cfg.dataset.dimension;
    return;
  }
  try {
    cfg.dim = read_libsvm(cfg.dataset.path.string()).dim;
  } catch (const std::exception& e) {
    r.add("dataset.path", e.what());
  }
}

void read_partition(Reader& r, const YAML::Node& node, ExperimentConfig& cfg) {
  if (!node || node.IsNull()) return;
  std::string mode;
  if (node.IsScalar()) {
    r.read(node, "partition", mode);
  } else if (is_map(r, node, "partition")) {
    r.check_keys(node, "partition", {"mode", "alpha"});
    r.read(node["mode"], "partition.mode", mode);
    if (r.read(node["alpha"], "partition.alpha", cfg.dirichlet_alpha) &&
        (!(cfg.dirichlet_alpha > 0.0) || !std::isfinite(cfg.dirichlet_alpha))) {
      r.add("partition.alpha", "must be a positive finite number");
    }
  }
  if (mode.empty() || mode == "shared") cfg.partition = PartitionMode::shared;
  else if (mode == "shard") cfg.partition = PartitionMode::shard;
  else if (mode == "dirichlet") cfg.partition = PartitionMode::dirichlet;
  else r.add("partition.mode", fmt::format("unknown mode '{}'", mode), "use shared, shard or dirichlet");
}

void read_theory(Reader& r, const YAML::Node& node, TheoryConfig& th) {
  if (!is_map(r, node, "theory")) return;
  r.check_keys(node, "theory", {"alpha", "beta", "L", "sigma_sq", "G", "delta", "epsilon", "c_R", "estimate_samples"});
  auto opt = [&](const char* key, std::optional<double>& out, bool allow_zero) {
    double v = 0.0;
    if (!r.read(node[key], fmt::format("theory.{}", key), v)) return;
    if (!std::isfinite(v) || v < 0.0 || (!allow_zero && v == 0.0)) {
      r.add(fmt::format("theory.{}", key), allow_zero ? "must be finite and >= 0" : "must be finite and > 0");
      return;
    }
    out = v;
  };
  opt("alpha", th.alpha, false);
  opt("beta", th.beta, false);
  opt("L", th.L, false);
  opt("sigma_sq", th.sigma_sq, true);
  opt("G", th.G, false);
  opt("delta", th.delta, true);
  if (r.read(node["epsilon"], "theory.epsilon", th.epsilon) && !(th.epsilon > 0.0)) {
    r.add("theory.epsilon", "must be positive");
  }
  if (r.read(node["c_R"], "theory.c_R", th.c_R) && !(th.c_R > 0.0)) r.add("theory.c_R", "must be positive");
  if (r.read(node["estimate_samples"], "theory.estimate_samples", th.estimate_samples) && th.estimate_samples < 2) {
    r.add("theory.estimate_samples", "must be at least 2");
  }
  if (th.alpha.has_value() != th.beta.has_value()) {
    r.add("theory", "give both alpha and beta, or neither to have them tuned");
  }
}

}  // namespace

ConfigValidationError::ConfigValidationError(std::vector<ConfigIssue> issues)
    : ConfigError(join_issues(issues)), issues_(std::move(issues)) {}

std::string format_issue(const ConfigIssue& issue) {
  std::string s = fmt::format("{}: {}", issue.field, issue.message);
  if (!issue.hint.empty()) s += fmt::format(" (hint: {})", issue.hint);
  return s;
}

std::size_t mask_size(double p, std::size_t dim) {
  const double k = std::floor(p * static_cast<double>(dim) + 0.5);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(k, 1.0)), 1, std::max<std::size_t>(dim, 1));
}

ExperimentConfig validate_config(const YAML::Node& root, const std::filesystem::path& base_dir) {
  Reader r;
  ExperimentConfig cfg;
  if (!root || !root.IsMap()) throw ConfigValidationError({{"<root>", "config must be a mapping", ""}});

  r.check_keys(root, "",
               {"name", "output_dir", "dataset", "normalize", "val_fraction", "partition", "workers", "taus", "M",
                "zeta", "compute_window", "methods", "eta", "batch_size", "p", "rounds", "seeds", "regularizer",
                "value_bit_width", "eval_every", "eval_per_worker", "theory", "derived", "runs"});

  r.read(root["name"], "name", cfg.name);
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos || cfg.name == "." ||
      cfg.name == "..") {
    r.add("name", "must be a non-empty plain directory name");
  }
  std::string out_dir;
  if (r.read(root["output_dir"], "output_dir", out_dir)) cfg.output_dir = out_dir;
  if (cfg.output_dir.is_relative()) cfg.output_dir = base_dir / cfg.output_dir;
  cfg.output_dir = std::filesystem::weakly_canonical(cfg.output_dir);

  read_dataset(r, root["dataset"], base_dir, cfg);
  r.read(root["normalize"], "normalize", cfg.normalize);
  if (r.read(root["val_fraction"], "val_fraction", cfg.val_fraction) &&
      !(cfg.val_fraction >= 0.0 && cfg.val_fraction < 1.0)) {
    r.add("val_fraction", "must be in [0, 1)");
  }
  read_partition(r, root["partition"], cfg);

  // Timing.
  bool timing_ok = true;
  if (!r.read_list(root["taus"], "taus", cfg.taus)) {
    if (!root["taus"]) r.add("taus", "missing", "list one step time per worker, e.g. [1, 2, 3, 6]");
    timing_ok = false;
  } else if (cfg.taus.empty()) {
    r.add("taus", "must list at least one worker");
    timing_ok = false;
  } else {
    for (std::size_t i = 0; i < cfg.taus.size(); ++i) {
      if (cfg.taus[i] < 1) {
        r.add(fmt::format("taus[{}]", i), "step times must be positive integers");
        timing_ok = false;
      }
    }
  }
  std::size_t workers = 0;
  if (r.read(root["workers"], "workers", workers) && timing_ok && workers != cfg.taus.size()) {
    r.add("workers", fmt::format("{} workers but {} step times", workers, cfg.taus.size()),
          "give one tau per worker or drop 'workers'");
  }
  if (r.read(root["M"], "M", cfg.M) && cfg.M < 1) {
    r.add("M", "must be >= 1");
    timing_ok = false;
  }
  if (r.read(root["zeta"], "zeta", cfg.zeta) && cfg.zeta < 0) {
    r.add("zeta", "must be >= 0");
    timing_ok = false;
  }
  if (timing_ok) {
    try {
      cfg.plan = build_plan(cfg.taus, cfg.M, cfg.zeta);
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      if (msg.rfind("zeta", 0) == 0) {
        const std::int64_t tau = checked_lcm(cfg.taus);
        const std::size_t cut = msg.find("nearest valid values");
        r.add("zeta", fmt::format("zeta must be a multiple of {}", tau),
              cut == std::string::npos ? std::string() : msg.substr(cut));
      } else {
        r.add("taus", msg);
      }
      timing_ok = false;
    }
  }
  std::int64_t window = 0;
  if (r.read(root["compute_window"], "compute_window", window)) cfg.compute_window = window;

  // Optimization.
  std::vector<std::string> method_names;
  if (r.read_list(root["methods"], "methods", method_names)) {
    std::set<Method> seen;
    for (std::size_t i = 0; i < method_names.size(); ++i) {
      const auto m = parse_method(method_names[i]);
      if (!m) {
        r.add(fmt::format("methods[{}]", i), fmt::format("unknown method '{}'", method_names[i]),
              "use sync_sgd, fedavg_full, local_sparse, overlap_overwrite or overlap_delay_corrected");
      } else if (!seen.insert(*m).second) {
        r.add(fmt::format("methods[{}]", i), fmt::format("duplicate method '{}'", method_names[i]));
      } else {
        cfg.methods.push_back(*m);
      }
    }
  }
  if (cfg.methods.empty() && !root["methods"]) r.add("methods", "missing", "list at least one method");
  else if (method_names.empty() && root["methods"] && root["methods"].IsSequence()) {
    r.add("methods", "must list at least one method");
  }
  if (r.read(root["eta"], "eta", cfg.eta) && (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta))) {
    r.add("eta", "must be a positive finite number");
  }
  if (r.read(root["batch_size"], "batch_size", cfg.batch_size) && cfg.batch_size < 1) {
    r.add("batch_size", "must be >= 1");
  }
  bool p_ok = true;
  if (r.read(root["p"], "p", cfg.p) && !(cfg.p > 0.0 && cfg.p <= 1.0)) {
    r.add("p", fmt::format("must be in (0, 1], got {}", cfg.p), "p is the fraction of coordinates sent per round");
    p_ok = false;
  }
  if (r.read(root["rounds"], "rounds", cfg.rounds) && (cfg.rounds < 0 || cfg.rounds > 0xFFFF0000LL)) {
    r.add("rounds", "must be in [0, 4294901760]");
  }
  if (r.read_list(root["seeds"], "seeds", cfg.seeds)) {
    if (cfg.seeds.empty()) r.add("seeds", "must list at least one seed");
    std::set<std::uint64_t> uniq(cfg.seeds.begin(), cfg.seeds.end());
    if (uniq.size() != cfg.seeds.size()) r.add("seeds", "seeds must be distinct");
  }
  if (is_map(r, root["regularizer"], "regularizer")) {
    r.check_keys(root["regularizer"], "regularizer", {"lambda", "theta"});
    r.read(root["regularizer"]["lambda"], "regularizer.lambda", cfg.regularizer.lambda);
    r.read(root["regularizer"]["theta"], "regularizer.theta", cfg.regularizer.theta);
    try {
      cfg.regularizer.validate();
    } catch (const ConfigError& e) {
      r.add("regularizer", e.what());
    }
  }
  if (r.read(root["value_bit_width"], "value_bit_width", cfg.value_bit_width) &&
      (cfg.value_bit_width < 1 || cfg.value_bit_width > 64)) {
    r.add("value_bit_width", "must be in [1, 64]");
  }
  if (r.read(root["eval_every"], "eval_every", cfg.eval_every) && cfg.eval_every < 1) {
    r.add("eval_every", "must be >= 1");
  }
  r.read(root["eval_per_worker"], "eval_per_worker", cfg.eval_per_worker);
  if (root["theory"]) read_theory(r, root["theory"], cfg.theory);

  // Cross-field checks.
  if (cfg.dim > 0 && p_ok) cfg.k = mask_size(cfg.p, cfg.dim);
  if (cfg.dataset.synthetic && cfg.val_fraction > 0.0 &&
      static_cast<double>(cfg.dataset.synthetic->n_examples) * (1.0 - cfg.val_fraction) < 1.0) {
    r.add("val_fraction", "leaves no training examples");
  }
  if (timing_ok && cfg.dim > 0 && cfg.k > 0) {
    for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
      RoundContext ctx;
      ctx.method = cfg.methods[i];
      ctx.plan = cfg.plan;
      ctx.blocking_window = cfg.compute_window;
      ctx.k = cfg.k;
      ctx.eta = cfg.eta > 0.0 ? cfg.eta : 1.0;
      try {
        check_compatible(ctx, cfg.dim);
      } catch (const ConfigError& e) {
        std::string hint;
        if (cfg.methods[i] == Method::sync_sgd) hint = "sync_sgd requires equal taus, M=1, zeta=0 and p=1";
        if (cfg.methods[i] == Method::fedavg_full) hint = "fedavg_full requires p=1";
        r.add(fmt::format("methods[{}]", i), e.what(), hint);
      }
    }
  }

  if (!r.issues.empty()) throw ConfigValidationError(std::move(r.issues));
  return cfg;
}

ExperimentConfig validate_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigValidationError({{"<yaml>", e.what(), ""}});
  }
  return validate_config(root, base_dir);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open config {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto abs = std::filesystem::absolute(path);
  return validate_config_text(ss.str(), abs.parent_path());
}

namespace {

std::string num(double v) { return format_double(v); }

}  // namespace

void emit_config(const ExperimentConfig& cfg, YAML::Emitter& out) {
  out << YAML::Key << "name" << YAML::Value << cfg.name;
  out << YAML::Key << "output_dir" << YAML::Value << cfg.output_dir.string();
  out << YAML::Key << "dataset" << YAML::Value << YAML::BeginMap;
  if (cfg.dataset.synthetic) {
    const auto& s = *cfg.dataset.synthetic;
    out << YAML::Key << "synthetic" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dim" << YAML::Value << s.dim;
    out << YAML::Key << "n_examples" << YAML::Value << s.n_examples;
    out << YAML::Key << "separation" << YAML::Value << num(s.separation);
    out << YAML::Key << "seed" << YAML::Value << s.seed;
    out << YAML::EndMap;
  } else {
    out << YAML::Key << "path" << YAML::Value << cfg.dataset.path.string();
    out << YAML::Key << "dimension" << YAML::Value << cfg.dim;
  }
  out << YAML::EndMap;
  out << YAML::Key << "normalize" << YAML::Value << cfg.normalize;
  out << YAML::Key << "val_fraction" << YAML::Value << num(cfg.val_fraction);
  out << YAML::Key << "partition" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << std::string(to_string(cfg.partition));
  out << YAML::Key << "alpha" << YAML::Value << num(cfg.dirichlet_alpha);
  out << YAML::EndMap;
  out << YAML::Key << "workers" << YAML::Value << cfg.workers();
  out << YAML::Key << "taus" << YAML::Value << YAML::Flow << cfg.taus;
  out << YAML::Key << "M" << YAML::Value << cfg.M;
  out << YAML::Key << "zeta" << YAML::Value << cfg.zeta;
  if (cfg.compute_window) out << YAML::Key << "compute_window" << YAML::Value << *cfg.compute_window;
  out << YAML::Key << "methods" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (Method m : cfg.methods) out << std::string(to_string(m));
  out << YAML::EndSeq;
  out << YAML::Key << "eta" << YAML::Value << num(cfg.eta);
  out << YAML::Key << "batch_size" << YAML::Value << cfg.batch_size;
  out << YAML::Key << "p" << YAML::Value << num(cfg.p);
  out << YAML::Key << "rounds" << YAML::Value << cfg.rounds;
  out << YAML::Key << "seeds" << YAML::Value << YAML::Flow << cfg.seeds;
  out << YAML::Key << "regularizer" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "lambda" << YAML::Value << num(cfg.regularizer.lambda);
  out << YAML::Key << "theta" << YAML::Value << num(cfg.regularizer.theta);
  out << YAML::EndMap;
  out << YAML::Key << "value_bit_width" << YAML::Value << cfg.value_bit_width;
  out << YAML::Key << "eval_every" << YAML::Value << cfg.eval_every;
  out << YAML::Key << "eval_per_worker" << YAML::Value << cfg.eval_per_worker;

  const auto& th = cfg.theory;
  out << YAML::Key << "theory" << YAML::Value << YAML::BeginMap;
  auto opt = [&](const char* key, const std::optional<double>& v) {
    if (v) out << YAML::Key << key << YAML::Value << num(*v);
  };
  opt("alpha", th.alpha);
  opt("beta", th.beta);
  opt("L", th.L);
  opt("sigma_sq", th.sigma_sq);
  opt("G", th.G);
  opt("delta", th.delta);
  out << YAML::Key << "epsilon" << YAML::Value << num(th.epsilon);
  out << YAML::Key << "c_R" << YAML::Value << num(th.c_R);
  out << YAML::Key << "estimate_samples" << YAML::Value << th.estimate_samples;
  out << YAML::EndMap;
}

}  // namespace ovl
