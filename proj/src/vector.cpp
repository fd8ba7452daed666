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
#include "ovl/vector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "ovl/error.hpp"
#include "ovl/kernels.hpp"

namespace ovl {

Mask::Mask(std::size_t dim, std::vector<std::uint32_t> indices)
    : dim_(dim), indices_(std::move(indices)) {
  if (indices_.empty() || indices_.size() > dim_) {
    throw ConfigError(fmt::format("mask size {} outside [1, {}]", indices_.size(), dim_));
  }
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] >= dim_) {
      throw ConfigError(fmt::format("mask index {} out of range for d={}", indices_[i], dim_));
    }
    if (i > 0 && indices_[i] <= indices_[i - 1]) {
      throw ConfigError("mask indices must be strictly increasing");
    }
  }
}

Mask Mask::full(std::size_t dim) {
  std::vector<std::uint32_t> all(dim);
  std::iota(all.begin(), all.end(), 0u);
  return Mask(dim, std::move(all));
}

bool Mask::contains(std::size_t j) const {
  return std::binary_search(indices_.begin(), indices_.end(), static_cast<std::uint32_t>(j));
}

void require_finite(const ModelVector& v, std::string_view what) {
  const double m = kernels::active().max_abs(v.data(), v.dim());
  if (!std::isfinite(m)) throw NumericError(fmt::format("{}: non-finite entry", what));
}

void require_same_dim(std::size_t a, std::size_t b, std::string_view what) {
  if (a != b) throw ConfigError(fmt::format("{}: dimension mismatch ({} vs {})", what, a, b));
}

ModelVector axpy(double a, const ModelVector& x, const ModelVector& y) {
  ModelVector out = y;
  axpy_inplace(a, x, out);
  return out;
}

void axpy_inplace(double a, const ModelVector& x, ModelVector& y) {
  require_same_dim(x.dim(), y.dim(), "axpy");
  kernels::active().axpy(a, x.data(), y.data(), x.dim());
  require_finite(y, "axpy");
}

ModelVector subtract(const ModelVector& a, const ModelVector& b) {
  require_same_dim(a.dim(), b.dim(), "subtract");
  ModelVector out(a.dim());
  kernels::active().sub(a.data(), b.data(), out.data(), a.dim());
  require_finite(out, "subtract");
  return out;
}

ModelVector scaled(double a, const ModelVector& x) {
  ModelVector out = x;
  kernels::active().scale(a, out.data(), out.dim());
  require_finite(out, "scale");
  return out;
}

double dot(const ModelVector& a, const ModelVector& b) {
  require_same_dim(a.dim(), b.dim(), "dot");
  return kernels::active().dot(a.data(), b.data(), a.dim());
}

double squared_norm(const ModelVector& x) { return kernels::active().dot(x.data(), x.data(), x.dim()); }

double norm(const ModelVector& x) { return std::sqrt(squared_norm(x)); }

double squared_distance(const ModelVector& a, const ModelVector& b) {
  require_same_dim(a.dim(), b.dim(), "squared_distance");
  return kernels::active().sq_dist(a.data(), b.data(), a.dim());
}

ModelVector project_mask(const ModelVector& x, const Mask& s) {
  require_same_dim(x.dim(), s.dim(), "project_mask");
  ModelVector out(x.dim());
  for (std::uint32_t j : s.indices()) out[j] = x[j];
  return out;
}

ModelVector project_complement(const ModelVector& x, const Mask& s) {
  require_same_dim(x.dim(), s.dim(), "project_complement");
  ModelVector out = x;
  for (std::uint32_t j : s.indices()) out[j] = 0.0;
  return out;
}

Mask sample_rand_k(std::size_t dim, std::size_t k, RngStream& rng) {
  if (k < 1 || k > dim) throw ConfigError(fmt::format("rand-k: need 1 <= k <= d, got k={} d={}", k, dim));
  std::vector<std::uint32_t> perm(dim);
  std::iota(perm.begin(), perm.end(), 0u);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(dim - i);
    std::swap(perm[i], perm[j]);
  }
  perm.resize(k);
  std::sort(perm.begin(), perm.end());
  return Mask(dim, std::move(perm));
}

ModelVector average(std::span<const ModelVector> vs) {
  if (vs.empty()) throw UsageError("average of an empty list");
  const std::size_t d = vs.front().dim();
  ModelVector sum(d);
  for (const ModelVector& v : vs) {
    require_same_dim(v.dim(), d, "average");
    kernels::active().axpy(1.0, v.data(), sum.data(), d);
  }
  kernels::active().scale(1.0 / static_cast<double>(vs.size()), sum.data(), d);
  require_finite(sum, "average");
  return sum;
}

double disagreement(std::span<const ModelVector> vs) {
  const ModelVector mean = average(vs);
  double total = 0.0;
  for (const ModelVector& v : vs) total += squared_distance(v, mean);
  return total;
}

}  // namespace ovl
