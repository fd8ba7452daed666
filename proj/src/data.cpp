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
#include "ovl/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>

#include <fmt/core.h>

#include "ovl/error.hpp"

namespace ovl {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::string_view next_token(std::string_view& line) {
  std::size_t b = 0;
  while (b < line.size() && is_space(line[b])) ++b;
  std::size_t e = b;
  while (e < line.size() && !is_space(line[e])) ++e;
  std::string_view tok = line.substr(b, e - b);
  line.remove_prefix(e);
  return tok;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

struct RawExample {
  double label;
  std::vector<std::pair<std::size_t, double>> entries;
};

std::uint64_t fnv1a(const void* bytes, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

constexpr std::uint64_t kFnvOffset = 0xCBF29CE484222325ull;

}  // namespace

Dataset parse_libsvm(std::string_view text, std::optional<std::size_t> dim) {
  std::vector<RawExample> raw;
  std::size_t max_index = 0;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::string_view tok = next_token(line);
    if (tok.empty()) continue;
    RawExample ex;
    if (!parse_number(tok, ex.label) || !std::isfinite(ex.label)) {
      throw ParseError(line_no, fmt::format("bad label '{}'", tok));
    }
    std::size_t prev = 0;
    for (tok = next_token(line); !tok.empty(); tok = next_token(line)) {
      const std::size_t colon = tok.find(':');
      std::size_t index = 0;
      double value = 0.0;
      if (colon == std::string_view::npos || !parse_number(tok.substr(0, colon), index) ||
          !parse_number(tok.substr(colon + 1), value)) {
        throw ParseError(line_no, fmt::format("bad feature '{}'", tok));
      }
      if (index == 0) throw ParseError(line_no, "feature indices are 1-based");
      if (index <= prev) throw ParseError(line_no, "feature indices must be strictly increasing");
      if (!std::isfinite(value)) throw ParseError(line_no, "non-finite feature value");
      prev = index;
      max_index = std::max(max_index, index);
      ex.entries.emplace_back(index - 1, value);
    }
    raw.push_back(std::move(ex));
  }
  if (raw.empty()) throw ConfigError("no examples");

  std::size_t d = max_index;
  if (dim) {
    if (*dim < max_index) {
      throw ConfigError(fmt::format("dimension override {} is below the largest feature index {}", *dim, max_index));
    }
    d = *dim;
  }
  if (d == 0) throw ConfigError("dataset has no features");

  std::map<double, double> mapping;
  for (const auto& ex : raw) mapping.emplace(ex.label, 0.0);
  if (mapping.size() > 2) throw ConfigError(fmt::format("expected a binary label set, found {} labels", mapping.size()));
  const bool already_signed = std::all_of(mapping.begin(), mapping.end(), [](const auto& kv) {
    return kv.first == -1.0 || kv.first == 1.0;
  });
  if (already_signed) {
    for (auto& [raw_label, mapped] : mapping) mapped = raw_label;
  } else if (mapping.size() == 2) {
    mapping.begin()->second = -1.0;
    mapping.rbegin()->second = 1.0;
  } else {
    mapping.begin()->second = mapping.begin()->first > 0.0 ? 1.0 : -1.0;
  }

  Dataset data;
  data.dim = d;
  data.features.assign(raw.size() * d, 0.0);
  data.labels.reserve(raw.size());
  for (std::size_t e = 0; e < raw.size(); ++e) {
    data.labels.push_back(mapping.at(raw[e].label));
    for (const auto& [j, v] : raw[e].entries) data.features[e * d + j] = v;
  }
  return data;
}

Dataset read_libsvm(const std::string& path, std::optional<std::size_t> dim) {
  std::unique_ptr<gzFile_s, int (*)(gzFile)> file(gzopen(path.c_str(), "rb"), gzclose);
  if (!file) throw ConfigError(fmt::format("cannot open dataset '{}'", path));
  std::string text;
  char buf[1 << 16];
  for (;;) {
    const int got = gzread(file.get(), buf, sizeof(buf));
    if (got < 0) throw ConfigError(fmt::format("read error in '{}'", path));
    if (got == 0) break;
    text.append(buf, static_cast<std::size_t>(got));
  }
  return parse_libsvm(text, dim);
}

std::string to_libsvm(const Dataset& data) {
  std::string out;
  char buf[64];
  for (std::size_t e = 0; e < data.size(); ++e) {
    out += data.labels[e] > 0 ? "+1" : "-1";
    const auto r = data.row(e);
    for (std::size_t j = 0; j < data.dim; ++j) {
      if (r[j] == 0.0) continue;
      auto res = std::to_chars(buf, buf + sizeof(buf), r[j]);
      out += fmt::format(" {}:", j + 1);
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

TrainValSplit split_train_val(const Dataset& data, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw ConfigError(fmt::format("val_fraction must lie in [0, 1), got {}", val_fraction));
  }
  const std::size_t n = data.size();
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * val_fraction));

  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  RngStream rng(seed, StreamKey{Purpose::split});
  for (std::size_t i = 0; i < n_val; ++i) std::swap(perm[i], perm[i + rng.uniform_index(n - i)]);

  std::vector<std::uint32_t> val_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::sort(val_idx.begin(), val_idx.end());
  std::vector<std::uint32_t> train_idx;
  train_idx.reserve(n - n_val);
  std::size_t v = 0;
  for (std::uint32_t e = 0; e < n; ++e) {
    if (v < val_idx.size() && val_idx[v] == e) {
      ++v;
    } else {
      train_idx.push_back(e);
    }
  }
  TrainValSplit split;
  split.train = data.subset(train_idx);
  split.val = data.subset(val_idx);
  split.val_indices = std::move(val_idx);
  return split;
}

NormalizationStats NormalizationStats::fit(const Dataset& train) {
  if (train.empty()) throw UsageError("normalization: empty training set");
  NormalizationStats stats;
  stats.mean.assign(train.dim, 0.0);
  stats.stdev.assign(train.dim, 0.0);
  const double n = static_cast<double>(train.size());
  for (std::size_t e = 0; e < train.size(); ++e) {
    const auto r = train.row(e);
    for (std::size_t j = 0; j < train.dim; ++j) stats.mean[j] += r[j];
  }
  for (double& m : stats.mean) m /= n;
  for (std::size_t e = 0; e < train.size(); ++e) {
    const auto r = train.row(e);
    for (std::size_t j = 0; j < train.dim; ++j) {
      const double c = r[j] - stats.mean[j];
      stats.stdev[j] += c * c;
    }
  }
  for (double& s : stats.stdev) s = std::max(std::sqrt(s / n), kStdevFloor);
  return stats;
}

void NormalizationStats::apply(Dataset& data) const {
  require_same_dim(data.dim, mean.size(), "normalization");
  for (std::size_t e = 0; e < data.size(); ++e) {
    auto r = data.row(e);
    for (std::size_t j = 0; j < data.dim; ++j) {
      // Constant training features map to exactly 0.
      r[j] = stdev[j] <= kStdevFloor ? 0.0 : (r[j] - mean[j]) / stdev[j];
    }
  }
}

Partition partition_shared(std::size_t n_examples, std::size_t n_workers) {
  if (n_workers == 0) throw ConfigError("partition: need at least one worker");
  Partition p;
  p.mode = PartitionMode::shared;
  std::vector<std::uint32_t> all(n_examples);
  std::iota(all.begin(), all.end(), 0u);
  p.assignments.assign(n_workers, all);
  return p;
}

Partition partition_shard(std::size_t n_examples, std::size_t n_workers, std::uint64_t seed) {
  if (n_workers == 0) throw ConfigError("partition: need at least one worker");
  std::vector<std::uint32_t> perm(n_examples);
  std::iota(perm.begin(), perm.end(), 0u);
  RngStream rng(seed, StreamKey{Purpose::partition});
  for (std::size_t i = n_examples; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_index(i)]);

  Partition p;
  p.mode = PartitionMode::shard;
  p.assignments.resize(n_workers);
  const std::size_t base = n_examples / n_workers;
  const std::size_t extra = n_examples % n_workers;
  std::size_t at = 0;
  for (std::size_t i = 0; i < n_workers; ++i) {
    const std::size_t count = base + (i < extra ? 1 : 0);
    p.assignments[i].assign(perm.begin() + static_cast<std::ptrdiff_t>(at),
                            perm.begin() + static_cast<std::ptrdiff_t>(at + count));
    std::sort(p.assignments[i].begin(), p.assignments[i].end());
    at += count;
    if (count == 0) p.warnings.push_back(fmt::format("worker {} received no examples", i));
  }
  return p;
}

Partition partition_dirichlet(const Dataset& train, std::size_t n_workers, double alpha, std::uint64_t seed) {
  if (n_workers == 0) throw ConfigError("partition: need at least one worker");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ConfigError(fmt::format("dirichlet alpha must be > 0, got {}", alpha));
  }
  if (train.empty()) throw ConfigError("partition: empty training set");

  Partition p;
  p.mode = PartitionMode::dirichlet;
  p.alpha = alpha;
  p.assignments.resize(n_workers);

  const double classes[2] = {-1.0, 1.0};
  for (std::uint32_t c = 0; c < 2; ++c) {
    std::vector<std::uint32_t> members;
    for (std::uint32_t e = 0; e < train.size(); ++e) {
      if (train.labels[e] == classes[c]) members.push_back(e);
    }
    if (members.empty()) continue;

    RngStream rng(seed, StreamKey{Purpose::partition, 0, c, 0});
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.uniform_index(i)]);

    // Proportions from normalized log-gamma draws (log-sum-exp keeps tiny alphas finite).
    std::vector<double> logs(n_workers);
    for (auto& l : logs) l = rng.log_gamma_variate(alpha);
    const double peak = *std::max_element(logs.begin(), logs.end());
    double total = 0.0;
    std::vector<double> props(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) total += props[i] = std::exp(logs[i] - peak);

    // Largest remainder: floor the quotas, then hand out the rest by descending
    // fractional part (ties to the lower worker index).
    const double m = static_cast<double>(members.size());
    std::vector<std::size_t> counts(n_workers);
    std::vector<std::pair<double, std::size_t>> remainders(n_workers);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < n_workers; ++i) {
      const double quota = props[i] / total * m;
      counts[i] = static_cast<std::size_t>(std::floor(quota));
      assigned += counts[i];
      remainders[i] = {quota - std::floor(quota), i};
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < members.size(); ++r, ++assigned) ++counts[remainders[r % n_workers].second];

    std::size_t at = 0;
    for (std::size_t i = 0; i < n_workers; ++i) {
      for (std::size_t t = 0; t < counts[i]; ++t) p.assignments[i].push_back(members[at++]);
    }
  }
  for (std::size_t i = 0; i < n_workers; ++i) {
    std::sort(p.assignments[i].begin(), p.assignments[i].end());
    if (p.assignments[i].empty()) p.warnings.push_back(fmt::format("worker {} received no examples", i));
  }
  return p;
}

std::string_view to_string(PartitionMode mode) {
  switch (mode) {
    case PartitionMode::shared:
      return "shared";
    case PartitionMode::shard:
      return "shard";
    case PartitionMode::dirichlet:
      return "dirichlet";
  }
  return "unknown";
}

Dataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.dim == 0 || spec.n_examples == 0) throw ConfigError("synthetic data needs d >= 1 and n >= 1");
  if (!(spec.separation >= 0.0)) throw ConfigError("synthetic separation must be >= 0");

  RngStream dir_rng(spec.seed, StreamKey{Purpose::synthetic, 0, 0, 0});
  std::vector<double> mu(spec.dim);
  double len = 0.0;
  for (double& v : mu) {
    v = dir_rng.normal();
    len += v * v;
  }
  len = std::sqrt(len);
  for (double& v : mu) v *= 0.5 * spec.separation / len;

  std::vector<double> labels(spec.n_examples);
  for (std::size_t e = 0; e < spec.n_examples; ++e) labels[e] = e < spec.n_examples / 2 ? 1.0 : -1.0;
  RngStream label_rng(spec.seed, StreamKey{Purpose::synthetic, 0, 1, 0});
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[label_rng.uniform_index(i)]);

  Dataset data;
  data.dim = spec.dim;
  data.labels = labels;
  data.features.resize(spec.n_examples * spec.dim);
  RngStream noise_rng(spec.seed, StreamKey{Purpose::synthetic, 0, 2, 0});
  for (std::size_t e = 0; e < spec.n_examples; ++e) {
    auto r = data.row(e);
    for (std::size_t j = 0; j < spec.dim; ++j) r[j] = labels[e] * mu[j] + noise_rng.normal();
  }
  return data;
}

std::uint64_t fingerprint(const Dataset& data) {
  std::uint64_t h = fnv1a(&data.dim, sizeof(data.dim), kFnvOffset);
  h = fnv1a(data.features.data(), data.features.size() * sizeof(double), h);
  return fnv1a(data.labels.data(), data.labels.size() * sizeof(double), h);
}

std::uint64_t fingerprint(const Partition& partition) {
  std::uint64_t h = kFnvOffset;
  for (const auto& a : partition.assignments) {
    const std::uint64_t size = a.size();
    h = fnv1a(&size, sizeof(size), h);
    h = fnv1a(a.data(), a.size() * sizeof(std::uint32_t), h);
  }
  return h;
}

}  // namespace ovl
