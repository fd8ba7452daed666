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
#include <arm_neon.h>

#include <cmath>
#include <limits>

#include "ovl/kernels.hpp"

// Two float64x2 registers stand in for the four reduction lanes: lo = (l0, l1),
// hi = (l2, l3).

namespace ovl::kernels {
namespace {

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t ax = vmulq_f64(va, vld1q_f64(x + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), ax));
  }
  for (; i < n; ++i) {
    const double ax = a * x[i];
    y[i] = y[i] + ax;
  }
}

void scale(double a, double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] = a * x[i];
}

void sub(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

template <bool SquaredDiff>
double reduce(const double* a, const double* b, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float64x2_t t0, t1;
    if constexpr (SquaredDiff) {
      const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
      const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
      t0 = vmulq_f64(d0, d0);
      t1 = vmulq_f64(d1, d1);
    } else {
      t0 = vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
      t1 = vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    lo = vaddq_f64(lo, t0);
    hi = vaddq_f64(hi, t1);
  }
  double lane[4];
  vst1q_f64(lane, lo);
  vst1q_f64(lane + 2, hi);
  for (; i < n; ++i) {
    double term;
    if constexpr (SquaredDiff) {
      const double diff = a[i] - b[i];
      term = diff * diff;
    } else {
      term = a[i] * b[i];
    }
    lane[i & 3] = lane[i & 3] + term;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot(const double* a, const double* b, std::size_t n) { return reduce<false>(a, b, n); }
double sq_dist(const double* a, const double* b, std::size_t n) { return reduce<true>(a, b, n); }

double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(x[i])) return x[i];
    m = std::fmax(m, std::fabs(x[i]));
  }
  return m;
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{Isa::neon, "neon", axpy, scale, sub, dot, sq_dist, max_abs};
  return table;
}

}  // namespace ovl::kernels
