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
#include <span>
#include <vector>

#include "ovl/rng.hpp"
#include "ovl/vector.hpp"

namespace ovl {

/// Dense binary-classification data: row-major features, labels in {-1, +1}.
struct Dataset {
  std::size_t dim = 0;
  std::vector<double> features;
  std::vector<double> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::span<const double> row(std::size_t e) const { return {features.data() + e * dim, dim}; }
  std::span<double> row(std::size_t e) { return {features.data() + e * dim, dim}; }

  /// Rows `indices` in the given order.
  Dataset subset(std::span<const std::uint32_t> indices) const;

  bool operator==(const Dataset&) const = default;
};

/// Coordinate-wise Geman-McClure penalty lambda * sum_j w_j^2 / (w_j^2 + theta^2).
struct RegularizerParams {
  double lambda = 0.0;
  double theta = 1.0;

  bool enabled() const { return lambda > 0.0; }
  /// Throws ConfigError unless lambda >= 0 and theta > 0.
  void validate() const;
  double value(const ModelVector& w) const;
  /// out += grad R(w)
  void add_gradient(const ModelVector& w, ModelVector& out) const;
};

/// log(1 + exp(t)) without overflow.
double softplus(double t);

/// log(1 + exp(-y <x, w>)).
double logistic_loss(std::span<const double> w, std::span<const double> x, double y);

/// Mean logistic loss over the dataset plus R(w).
double objective_value(const ModelVector& w, const Dataset& data, const RegularizerParams& reg);

/// Exact gradient of objective_value.
ModelVector full_gradient(const ModelVector& w, const Dataset& data, const RegularizerParams& reg);

/// Identifies one local step: the batch of worker `worker` at local time `step` of round `round`.
struct SampleKey {
  std::uint32_t worker = 0;
  std::uint32_t round = 0;
  std::uint32_t step = 0;
};

/// Stochastic first-order oracle g_i(x, xi). Implementations must be
/// deterministic in (w, key) and safe to call concurrently.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;
  virtual std::size_t dim() const = 0;
  /// Training examples consumed per call (for processed-example accounting).
  virtual std::size_t examples_per_call() const = 0;
  virtual ModelVector gradient(const ModelVector& w, const SampleKey& key) const = 0;
};

/// Minibatch logistic gradient. Each worker samples uniformly with
/// replacement from its own shard; the regularizer gradient is added in full.
class LogisticOracle final : public GradientOracle {
 public:
  LogisticOracle(const Dataset& data, std::vector<std::vector<std::uint32_t>> shards,
                 std::size_t batch_size, RegularizerParams reg, std::uint64_t root_seed);

  std::size_t dim() const override { return data_->dim; }
  std::size_t examples_per_call() const override { return batch_size_; }
  ModelVector gradient(const ModelVector& w, const SampleKey& key) const override;

  const Dataset& data() const { return *data_; }
  const RegularizerParams& regularizer() const { return reg_; }

 private:
  const Dataset* data_;
  std::vector<std::vector<std::uint32_t>> shards_;
  std::size_t batch_size_;
  RegularizerParams reg_;
  std::uint64_t root_seed_;
};

/// f(w) = 1/2 sum_j a_j w_j^2 with additive N(0, sigma^2 I) gradient noise.
/// Smoothness L = max a_j; per-call variance is exactly sigma^2 * d.
class QuadraticOracle final : public GradientOracle {
 public:
  QuadraticOracle(ModelVector a_diag, double noise_sigma, std::uint64_t root_seed);

  std::size_t dim() const override { return a_diag_.dim(); }
  std::size_t examples_per_call() const override { return 1; }
  ModelVector gradient(const ModelVector& w, const SampleKey& key) const override;

  const ModelVector& curvature() const { return a_diag_; }

 private:
  ModelVector a_diag_;
  double noise_sigma_;
  std::uint64_t root_seed_;
};

/// The stream a batch or noise draw comes from.
RngStream sample_stream(std::uint64_t root_seed, Purpose purpose, const SampleKey& key);

ModelVector stochastic_gradient(const GradientOracle& oracle, const ModelVector& w,
                                std::uint32_t worker, std::uint32_t round, std::uint32_t step);

/// diag(a) w + sigma * g, g standard normal drawn from `rng`.
ModelVector quadratic_oracle(const ModelVector& w, const ModelVector& a_diag, double noise_sigma,
                             RngStream& rng);

/// Monte Carlo estimates of sigma^2 = E||g - grad f||^2 and G^2 = E||g||^2 at w,
/// averaged over workers. Only the bound calculator uses these.
struct MomentEstimate {
  double sigma_sq = 0.0;
  double second_moment = 0.0;
};
MomentEstimate estimate_moments(const GradientOracle& oracle, const ModelVector& w,
                                const ModelVector& true_gradient, std::size_t workers,
                                std::size_t samples);

/// Upper bound on the smoothness constant of objective_value:
/// max_e ||x_e||^2 / 4 + 2 lambda / theta^2.
double logistic_smoothness_bound(const Dataset& data, const RegularizerParams& reg);

}  // namespace ovl
