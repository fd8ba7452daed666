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

#include <array>
#include <cstdint>
#include <limits>

namespace ovl {

/// What a random substream is used for. Part of the stream identity, so two
/// consumers with different purposes never share randomness.
enum class Purpose : std::uint32_t {
  mask = 1,
  batch = 2,
  noise = 3,
  split = 4,
  partition = 5,
  synthetic = 6,
  estimate = 7,
  test = 100,
};

struct StreamKey {
  Purpose purpose = Purpose::test;
  std::uint32_t round = 0;
  std::uint32_t worker = 0;
  std::uint32_t step = 0;
};

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11). Pure function of its inputs.
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// Counter-based random stream.
///
/// The Philox key is derived from (root_seed, purpose); the 128-bit counter is
/// (block, step, round, worker). Every (root_seed, key) pair therefore names an
/// independent, platform-stable sequence of 32-bit words, and substreams can be
/// created in any order without affecting one another.
///
/// Satisfies UniformRandomBitGenerator, but the helpers below are preferred over
/// <random> distributions, whose output is implementation-defined.
class RngStream {
 public:
  using result_type = std::uint32_t;

  RngStream(std::uint64_t root_seed, StreamKey key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u32(); }

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on {0, ..., n-1}; n must be positive. Unbiased (rejection).
  std::uint64_t uniform_index(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();
  /// log of a Gamma(shape, 1) variate. Working in log space keeps tiny shapes
  /// (which underflow to 0 in linear space) usable for Dirichlet draws.
  double log_gamma_variate(double shape);

  std::uint64_t root_seed() const { return root_seed_; }
  const StreamKey& key() const { return stream_key_; }

 private:
  void refill();

  std::uint64_t root_seed_;
  StreamKey stream_key_;
  PhiloxKey key_;
  PhiloxCounter counter_;
  PhiloxCounter block_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// SplitMix64 finalizer; also used to derive per-purpose keys.
std::uint64_t mix64(std::uint64_t x);

}  // namespace ovl
