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
#include <vector>

#include "doctest.h"
#include "ovl/error.hpp"
#include "ovl/rng.hpp"
#include "ovl/vector.hpp"

using namespace ovl;

TEST_CASE("axpy examples") {
  CHECK(axpy(0.0, ModelVector{5, 5}, ModelVector{1, 2}) == ModelVector{1, 2});
  CHECK(axpy(1.0, ModelVector{1, 1}, ModelVector{0, 0}) == ModelVector{1, 1});
  CHECK(axpy(-0.5, ModelVector{2, 4}, ModelVector{3, 3}) == ModelVector{2, 1});
  CHECK_THROWS_AS(axpy(1.0, ModelVector{1}, ModelVector{1, 2}), ConfigError);
}

TEST_CASE("projections") {
  const ModelVector x{5, 6, 7};
  CHECK(project_mask(x, Mask(3, {0, 1, 2})) == x);
  CHECK(project_mask(x, Mask(3, {1})) == ModelVector{0, 6, 0});
  const Mask s(2, {0});
  const ModelVector y{1, 1};
  CHECK(project_complement(y, s) == ModelVector{0, 1});
  CHECK(axpy(1.0, project_mask(y, s), project_complement(y, s)) == y);
}

TEST_CASE("mask validation") {
  CHECK_THROWS_AS(Mask(3, {}), ConfigError);
  CHECK_THROWS_AS(Mask(3, {1, 1}), ConfigError);
  CHECK_THROWS_AS(Mask(3, {2, 1}), ConfigError);
  CHECK_THROWS_AS(Mask(3, {3}), ConfigError);
  CHECK(Mask::full(3).k() == 3);
  CHECK(Mask(4, {1, 3}).contains(3));
  CHECK_FALSE(Mask(4, {1, 3}).contains(2));
}

TEST_CASE("rand-k sampling") {
  RngStream rng(1, StreamKey{Purpose::mask, 0, 0, 0});
  CHECK(sample_rand_k(3, 3, rng) == Mask(3, {0, 1, 2}));

  std::vector<double> freq(4, 0.0);
  const int draws = 100000;
  for (int t = 0; t < draws; ++t) {
    const Mask m = sample_rand_k(4, 2, rng);
    for (auto j : m.indices()) freq[j] += 1.0;
  }
  for (double f : freq) CHECK(f / draws == doctest::Approx(0.5).epsilon(0.02));

  RngStream a(9, StreamKey{Purpose::mask, 4, 0, 0}), b(9, StreamKey{Purpose::mask, 4, 0, 0});
  CHECK(sample_rand_k(2, 1, a) == sample_rand_k(2, 1, b));
}

TEST_CASE("average and disagreement") {
  const std::vector<ModelVector> one{{1, 3}};
  CHECK(average(one) == ModelVector{1, 3});
  const std::vector<ModelVector> two{{0, 0}, {2, 4}};
  CHECK(average(two) == ModelVector{1, 2});
  const std::vector<ModelVector> ys{{1, 0}, {3, 0}};
  CHECK(average(ys) == ModelVector{2, 0});
  CHECK(disagreement(std::vector<ModelVector>{{0}, {2}}) == 2.0);
  CHECK_THROWS_AS(average(std::vector<ModelVector>{}), UsageError);
}

TEST_CASE("norms and finiteness") {
  CHECK(dot(ModelVector{1, 2}, ModelVector{3, 4}) == 11.0);
  CHECK(norm(ModelVector{3, 4}) == 5.0);
  CHECK(squared_distance(ModelVector{1, 1}, ModelVector{2, 3}) == 5.0);
  CHECK_THROWS_AS(require_finite(ModelVector{1.0, 1.0 / 0.0}, "x"), NumericError);
}
