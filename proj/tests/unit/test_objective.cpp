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
#include <vector>

#include "doctest.h"
#include "ovl/data.hpp"
#include "ovl/error.hpp"
#include "ovl/objective.hpp"

using namespace ovl;

namespace {

Dataset tiny() {
  Dataset d;
  d.dim = 3;
  d.features = {1.0, -2.0, 0.5, 0.3, 0.1, -1.0, -0.7, 0.4, 2.0};
  d.labels = {1.0, -1.0, 1.0};
  return d;
}

std::vector<std::vector<std::uint32_t>> everyone(std::size_t workers, std::size_t n) {
  std::vector<std::vector<std::uint32_t>> s(workers);
  for (auto& v : s) {
    for (std::uint32_t e = 0; e < n; ++e) v.push_back(e);
  }
  return s;
}

}  // namespace

TEST_CASE("logistic loss values") {
  const std::vector<double> x{1.0, 2.0};
  CHECK(logistic_loss(std::vector<double>{0, 0}, x, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(logistic_loss(std::vector<double>{50, 0}, std::vector<double>{1, 0}, 1.0) < 1e-20);
  CHECK(logistic_loss(std::vector<double>{-1, 0}, std::vector<double>{1, 0}, 1.0) ==
        doctest::Approx(1.3132616875182228).epsilon(1e-15));
  CHECK(std::isfinite(logistic_loss(std::vector<double>{-800, 0}, std::vector<double>{1, 0}, 1.0)));
  CHECK(softplus(-800.0) >= 0.0);
  CHECK(softplus(800.0) == 800.0);
}

TEST_CASE("full gradient examples") {
  Dataset one;
  one.dim = 2;
  one.features = {3.0, -4.0};
  one.labels = {1.0};
  CHECK(full_gradient(ModelVector(2), one, {}) == ModelVector{-1.5, 2.0});

  ModelVector g(3);
  RegularizerParams{0.7, 0.4}.add_gradient(ModelVector(3), g);
  CHECK(g == ModelVector(3));
}

TEST_CASE("gradient matches central finite differences") {
  const Dataset d = make_synthetic(SyntheticSpec{6, 40, 2.0, 4});
  RngStream rng(4, StreamKey{Purpose::test, 0, 0, 0});
  for (const RegularizerParams reg : {RegularizerParams{0.0, 1.0}, RegularizerParams{0.5, 0.3}}) {
    for (int t = 0; t < 10; ++t) {
      ModelVector w(6);
      for (std::size_t j = 0; j < 6; ++j) w[j] = rng.normal();
      const ModelVector g = full_gradient(w, d, reg);
      for (std::size_t j = 0; j < 6; ++j) {
        ModelVector wp = w, wm = w;
        wp[j] += 1e-6;
        wm[j] -= 1e-6;
        const double fd = (objective_value(wp, d, reg) - objective_value(wm, d, reg)) / 2e-6;
        CHECK(fd == doctest::Approx(g[j]).epsilon(1e-5).scale(1e-3));
      }
    }
  }
}

TEST_CASE("regularizer validation") {
  CHECK_THROWS_AS((RegularizerParams{-1.0, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((RegularizerParams{1.0, 0.0}.validate()), ConfigError);
  CHECK(RegularizerParams{0.5, 1.0}.value(ModelVector{1.0, 0.0}) == 0.25);
}

TEST_CASE("logistic oracle") {
  const Dataset d = make_synthetic(SyntheticSpec{3, 50, 1.0, 2});
  const LogisticOracle oracle(d, everyone(2, d.size()), 2, {}, 9);
  const ModelVector w{0.1, -0.2, 0.3};
  CHECK(oracle.gradient(w, {1, 2, 3}) == oracle.gradient(w, {1, 2, 3}));
  CHECK_FALSE(oracle.gradient(w, {1, 2, 3}) == oracle.gradient(w, {0, 2, 3}));

  Dataset single;
  single.dim = 2;
  single.features = {0.5, 1.5};
  single.labels = {-1.0};
  const LogisticOracle exact(single, everyone(1, 1), 5, {}, 1);
  const ModelVector v{0.2, 0.1};
  const ModelVector a = exact.gradient(v, {0, 0, 0}), b = full_gradient(v, single, {});
  CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-14));
  CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-14));

  std::vector<std::vector<std::uint32_t>> empty_shard{{0, 1}, {}};
  const LogisticOracle bad(d, empty_shard, 1, {}, 1);
  CHECK_THROWS(bad.gradient(w, {1, 0, 0}));
}

TEST_CASE("stochastic gradients are unbiased") {
  const Dataset d = make_synthetic(SyntheticSpec{5, 200, 1.0, 2});
  const LogisticOracle oracle(d, everyone(1, d.size()), 4, {}, 3);
  const ModelVector w{0.3, -0.1, 0.2, 0.0, 0.5};
  ModelVector mean(5);
  const int n = 10000;
  for (int t = 0; t < n; ++t) {
    const ModelVector g = oracle.gradient(w, {0, static_cast<std::uint32_t>(t), 0});
    for (std::size_t j = 0; j < 5; ++j) mean[j] += g[j] / n;
  }
  const ModelVector full = full_gradient(w, d, {});
  double err = 0, ref = 0;
  for (std::size_t j = 0; j < 5; ++j) {
    err += (mean[j] - full[j]) * (mean[j] - full[j]);
    ref += full[j] * full[j];
  }
  CHECK(std::sqrt(err / ref) < 0.02);
}

TEST_CASE("quadratic oracle") {
  const QuadraticOracle id(ModelVector{1, 1}, 0.0, 1);
  CHECK(id.gradient(ModelVector{2, 3}, {}) == ModelVector{2, 3});
  CHECK(id.gradient(ModelVector{0, 0}, {}) == ModelVector{0, 0});

  const double sigma = 0.7;
  const QuadraticOracle noisy(ModelVector{1, 2, 3}, sigma, 2);
  const ModelVector w{1, 1, 1};
  double var = 0;
  const int n = 100000;
  for (int t = 0; t < n; ++t) {
    const ModelVector g = noisy.gradient(w, {0, 0, static_cast<std::uint32_t>(t)});
    var += ((g[0] - 1) * (g[0] - 1) + (g[1] - 2) * (g[1] - 2) + (g[2] - 3) * (g[2] - 3)) / n;
  }
  CHECK(var == doctest::Approx(sigma * sigma * 3).epsilon(0.03));
}

TEST_CASE("moment estimates and smoothness bound") {
  const QuadraticOracle q(ModelVector{1, 1}, 0.5, 3);
  const MomentEstimate m = estimate_moments(q, ModelVector{1, 0}, ModelVector{1, 0}, 2, 4000);
  CHECK(m.sigma_sq == doctest::Approx(0.5).epsilon(0.08));
  CHECK(m.second_moment == doctest::Approx(1.5).epsilon(0.08));

  const Dataset d = tiny();
  CHECK(logistic_smoothness_bound(d, {}) == doctest::Approx(5.25 / 4.0));
  CHECK(logistic_smoothness_bound(d, {1.0, 0.5}) == doctest::Approx(5.25 / 4.0 + 8.0));
}
