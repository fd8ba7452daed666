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
#include "ovl/objective.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "ovl/error.hpp"
#include "ovl/kernels.hpp"

namespace ovl {

Dataset Dataset::subset(std::span<const std::uint32_t> indices) const {
  Dataset out;
  out.dim = dim;
  out.features.reserve(indices.size() * dim);
  out.labels.reserve(indices.size());
  for (std::uint32_t e : indices) {
    auto r = row(e);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(labels[e]);
  }
  return out;
}

void RegularizerParams::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError(fmt::format("regularizer.lambda must be >= 0, got {}", lambda));
  }
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw ConfigError(fmt::format("regularizer.theta must be > 0, got {}", theta));
  }
}

double RegularizerParams::value(const ModelVector& w) const {
  if (!enabled()) return 0.0;
  const double t2 = theta * theta;
  double sum = 0.0;
  for (std::size_t j = 0; j < w.dim(); ++j) {
    const double w2 = w[j] * w[j];
    sum += w2 / (w2 + t2);
  }
  return lambda * sum;
}

void RegularizerParams::add_gradient(const ModelVector& w, ModelVector& out) const {
  if (!enabled()) return;
  const double t2 = theta * theta;
  for (std::size_t j = 0; j < w.dim(); ++j) {
    const double denom = w[j] * w[j] + t2;
    out[j] += lambda * 2.0 * w[j] * t2 / (denom * denom);
  }
}

double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

namespace {

// sigma(t) = 1 / (1 + exp(-t)), evaluated on the side that cannot overflow.
double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// d/dm log(1 + exp(-y m)) = -y * sigma(-y m)
inline double loss_slope(double margin, double y) { return -y * sigmoid(-y * margin); }

}  // namespace

double logistic_loss(std::span<const double> w, std::span<const double> x, double y) {
  require_same_dim(w.size(), x.size(), "logistic_loss");
  const double margin = kernels::active().dot(x.data(), w.data(), x.size());
  return softplus(-y * margin);
}

double objective_value(const ModelVector& w, const Dataset& data, const RegularizerParams& reg) {
  if (data.empty()) throw UsageError("objective_value: empty dataset");
  require_same_dim(w.dim(), data.dim, "objective_value");
  double sum = 0.0;
  for (std::size_t e = 0; e < data.size(); ++e) sum += logistic_loss(w.values(), data.row(e), data.labels[e]);
  return sum / static_cast<double>(data.size()) + reg.value(w);
}

ModelVector full_gradient(const ModelVector& w, const Dataset& data, const RegularizerParams& reg) {
  if (data.empty()) throw UsageError("full_gradient: empty dataset");
  require_same_dim(w.dim(), data.dim, "full_gradient");
  const auto& k = kernels::active();
  ModelVector g(w.dim());
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (std::size_t e = 0; e < data.size(); ++e) {
    const auto x = data.row(e);
    const double margin = k.dot(x.data(), w.data(), w.dim());
    k.axpy(loss_slope(margin, data.labels[e]) * inv_n, x.data(), g.data(), w.dim());
  }
  reg.add_gradient(w, g);
  require_finite(g, "full_gradient");
  return g;
}

RngStream sample_stream(std::uint64_t root_seed, Purpose purpose, const SampleKey& key) {
  return RngStream(root_seed, StreamKey{purpose, key.round, key.worker, key.step});
}

LogisticOracle::LogisticOracle(const Dataset& data, std::vector<std::vector<std::uint32_t>> shards,
                               std::size_t batch_size, RegularizerParams reg, std::uint64_t root_seed)
    : data_(&data), shards_(std::move(shards)), batch_size_(batch_size), reg_(reg), root_seed_(root_seed) {
  if (batch_size_ == 0) throw ConfigError("batch_size must be positive");
  if (shards_.empty()) throw ConfigError("logistic oracle: no worker shards");
  reg_.validate();
  for (const auto& shard : shards_) {
    for (std::uint32_t e : shard) {
      if (e >= data.size()) throw ConfigError("logistic oracle: shard index out of range");
    }
  }
}

ModelVector LogisticOracle::gradient(const ModelVector& w, const SampleKey& key) const {
  if (key.worker >= shards_.size()) {
    throw UsageError(fmt::format("worker {} has no shard ({} workers)", key.worker, shards_.size()));
  }
  const auto& shard = shards_[key.worker];
  if (shard.empty()) throw ConfigError(fmt::format("worker {} has an empty data shard", key.worker));
  require_same_dim(w.dim(), data_->dim, "stochastic_gradient");

  RngStream rng = sample_stream(root_seed_, Purpose::batch, key);
  const auto& k = kernels::active();
  ModelVector g(w.dim());
  const double inv_b = 1.0 / static_cast<double>(batch_size_);
  for (std::size_t b = 0; b < batch_size_; ++b) {
    const std::uint32_t e = shard[rng.uniform_index(shard.size())];
    const auto x = data_->row(e);
    const double margin = k.dot(x.data(), w.data(), w.dim());
    k.axpy(loss_slope(margin, data_->labels[e]) * inv_b, x.data(), g.data(), w.dim());
  }
  reg_.add_gradient(w, g);
  require_finite(g, "stochastic_gradient");
  return g;
}

QuadraticOracle::QuadraticOracle(ModelVector a_diag, double noise_sigma, std::uint64_t root_seed)
    : a_diag_(std::move(a_diag)), noise_sigma_(noise_sigma), root_seed_(root_seed) {
  for (std::size_t j = 0; j < a_diag_.dim(); ++j) {
    if (!(a_diag_[j] > 0.0)) throw ConfigError("quadratic oracle: curvatures must be positive");
  }
  if (!(noise_sigma_ >= 0.0)) throw ConfigError("quadratic oracle: noise sigma must be >= 0");
}

ModelVector QuadraticOracle::gradient(const ModelVector& w, const SampleKey& key) const {
  RngStream rng = sample_stream(root_seed_, Purpose::noise, key);
  return quadratic_oracle(w, a_diag_, noise_sigma_, rng);
}

ModelVector quadratic_oracle(const ModelVector& w, const ModelVector& a_diag, double noise_sigma,
                             RngStream& rng) {
  require_same_dim(w.dim(), a_diag.dim(), "quadratic_oracle");
  ModelVector g(w.dim());
  for (std::size_t j = 0; j < w.dim(); ++j) {
    g[j] = a_diag[j] * w[j];
    if (noise_sigma > 0.0) g[j] += noise_sigma * rng.normal();
  }
  require_finite(g, "quadratic_oracle");
  return g;
}

ModelVector stochastic_gradient(const GradientOracle& oracle, const ModelVector& w, std::uint32_t worker,
                                std::uint32_t round, std::uint32_t step) {
  return oracle.gradient(w, SampleKey{worker, round, step});
}

MomentEstimate estimate_moments(const GradientOracle& oracle, const ModelVector& w,
                                const ModelVector& true_gradient, std::size_t workers, std::size_t samples) {
  if (workers == 0 || samples == 0) throw UsageError("estimate_moments: need workers and samples");
  MomentEstimate est;
  // Rounds far outside any simulated horizon keep these draws disjoint from training keys.
  constexpr std::uint32_t kEstimateRound = 0xFFFF0000u;
  for (std::size_t i = 0; i < workers; ++i) {
    for (std::size_t s = 0; s < samples; ++s) {
      const ModelVector g = oracle.gradient(
          w, SampleKey{static_cast<std::uint32_t>(i), kEstimateRound, static_cast<std::uint32_t>(s)});
      est.sigma_sq += squared_distance(g, true_gradient);
      est.second_moment += squared_norm(g);
    }
  }
  const double total = static_cast<double>(workers * samples);
  est.sigma_sq /= total;
  est.second_moment /= total;
  return est;
}

double logistic_smoothness_bound(const Dataset& data, const RegularizerParams& reg) {
  double max_sq = 0.0;
  const auto& k = kernels::active();
  for (std::size_t e = 0; e < data.size(); ++e) {
    const auto x = data.row(e);
    max_sq = std::max(max_sq, k.dot(x.data(), x.data(), x.size()));
  }
  const double reg_curvature = reg.enabled() ? 2.0 * reg.lambda / (reg.theta * reg.theta) : 0.0;
  return max_sq / 4.0 + reg_curvature;
}

}  // namespace ovl
