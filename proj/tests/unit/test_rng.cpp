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
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "ovl/rng.hpp"

using namespace ovl;

TEST_CASE("philox4x32-10 known-answer vectors") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and keyed") {
  RngStream a(5, StreamKey{Purpose::batch, 3, 1, 7});
  RngStream b(5, StreamKey{Purpose::batch, 3, 1, 7});
  for (int i = 0; i < 100; ++i) CHECK(a.next_u32() == b.next_u32());

  std::set<std::uint64_t> firsts;
  for (Purpose p : {Purpose::mask, Purpose::batch, Purpose::noise}) {
    for (std::uint32_t r = 0; r < 3; ++r) {
      for (std::uint32_t w = 0; w < 3; ++w) {
        RngStream s(5, StreamKey{p, r, w, 0});
        firsts.insert(s.next_u64());
      }
    }
  }
  RngStream other_seed(6, StreamKey{Purpose::batch, 0, 0, 0});
  firsts.insert(other_seed.next_u64());
  CHECK(firsts.size() == 28);
}

TEST_CASE("uniform and normal moments") {
  RngStream rng(1, StreamKey{Purpose::test, 0, 0, 0});
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("uniform_index covers its range evenly") {
  RngStream rng(2, StreamKey{Purpose::test, 0, 0, 0});
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) hist[rng.uniform_index(7)]++;
  for (int h : hist) CHECK(std::abs(h - 10000) < 400);
  CHECK(rng.uniform_index(1) == 0);
}

TEST_CASE("log-gamma variates have the right mean") {
  for (double shape : {0.03, 0.5, 1.0, 3.0}) {
    RngStream rng(3, StreamKey{Purpose::test, 0, 0, 0});
    double s = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) s += std::exp(rng.log_gamma_variate(shape));
    CHECK(s / n == doctest::Approx(shape).epsilon(0.05));
  }
}
