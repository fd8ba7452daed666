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

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

#include "ovl/rng.hpp"

namespace ovl {

/// Dense d-dimensional vector of model coordinates (also used for gradients,
/// messages and averages). Operations that return a ModelVector reject
/// non-finite results with NumericError.
class ModelVector {
 public:
  ModelVector() = default;
  explicit ModelVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  explicit ModelVector(std::vector<double> values) : values_(std::move(values)) {}
  ModelVector(std::initializer_list<double> values) : values_(values) {}

  std::size_t dim() const { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }
  double& operator[](std::size_t j) { return values_[j]; }
  const double* data() const { return values_.data(); }
  double* data() { return values_.data(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool operator==(const ModelVector&) const = default;

 private:
  std::vector<double> values_;
};

/// A size-K subset of {0, ..., d-1}, stored sorted.
class Mask {
 public:
  /// Validates 1 <= K <= d, strictly increasing indices in range.
  Mask(std::size_t dim, std::vector<std::uint32_t> indices);

  static Mask full(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t k() const { return indices_.size(); }
  std::span<const std::uint32_t> indices() const { return indices_; }
  double fraction() const { return static_cast<double>(k()) / static_cast<double>(dim_); }
  bool contains(std::size_t j) const;

  bool operator==(const Mask&) const = default;

 private:
  std::size_t dim_;
  std::vector<std::uint32_t> indices_;
};

void require_finite(const ModelVector& v, std::string_view what);
void require_same_dim(std::size_t a, std::size_t b, std::string_view what);

/// y + a * x; inputs unmodified.
ModelVector axpy(double a, const ModelVector& x, const ModelVector& y);

/// In-place y += a * x.
void axpy_inplace(double a, const ModelVector& x, ModelVector& y);

ModelVector subtract(const ModelVector& a, const ModelVector& b);
ModelVector scaled(double a, const ModelVector& x);
double dot(const ModelVector& a, const ModelVector& b);
double squared_norm(const ModelVector& x);
double norm(const ModelVector& x);
double squared_distance(const ModelVector& a, const ModelVector& b);

/// x on the mask, 0 elsewhere.
ModelVector project_mask(const ModelVector& x, const Mask& s);

/// x off the mask, 0 on it. project_mask + project_complement == x exactly.
ModelVector project_complement(const ModelVector& x, const Mask& s);

/// Uniform K-subset of {0..d-1} by partial Fisher-Yates over the stream.
Mask sample_rand_k(std::size_t dim, std::size_t k, RngStream& rng);

/// Coordinate-wise mean; summation runs over vs in index order.
ModelVector average(std::span<const ModelVector> vs);

/// sum_i ||v_i - mean(v)||^2
double disagreement(std::span<const ModelVector> vs);

}  // namespace ovl
