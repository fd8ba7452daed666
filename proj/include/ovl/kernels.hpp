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
#include <string_view>
#include <vector>

// Dense double-precision kernels behind a runtime-selected function table.
//
// Every variant must produce bit-identical results to the scalar reference.
// Elementwise kernels do one multiply and one add per element (never fused).
// Reductions use a fixed four-lane interleaved order: element i is accumulated
// into lane (i mod 4) in ascending i, and the lanes are combined as
// (l0 + l1) + (l2 + l3). A 256-bit register holds exactly those four lanes,
// and the scalar reference spells the same order out by hand.

namespace ovl::kernels {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  Isa isa;
  const char* name;
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // x[i] *= a
  void (*scale)(double a, double* x, std::size_t n);
  // out[i] = a[i] - b[i]
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i (a[i] - b[i])^2
  double (*sq_dist)(const double* a, const double* b, std::size_t n);
  // max_i |x[i]|, NaN if any element is NaN
  double (*max_abs)(const double* x, std::size_t n);
};

const KernelTable& scalar_table();

/// Table for `isa` if it was compiled in and the CPU supports it, else nullptr.
const KernelTable* table_for(Isa isa);

/// Variants usable on this machine, scalar first.
std::vector<const KernelTable*> available();

/// The table currently used by the library. Defaults to the best available.
const KernelTable& active();

/// Pin the active table. Returns false (and changes nothing) if unavailable.
bool select(Isa isa);

/// Parse "scalar", "avx2", "neon" or "auto"; auto picks the best available.
bool select(std::string_view name);

std::string_view to_string(Isa isa);

}  // namespace ovl::kernels
