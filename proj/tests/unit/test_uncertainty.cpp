// Copyright 2026 The gcnrefine Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "gcnrefine/uncertainty.hpp"
#include "support/oracles.hpp"

using namespace gcnrefine;

namespace {

PassStack random_stack(std::mt19937_64& rng, Dims d, std::size_t t) {
  std::vector<Volume3> passes;
  for (std::size_t i = 0; i < t; ++i) passes.push_back(oracle::random_mask(rng, d, 0.5));
  return PassStack(std::move(passes));
}

}  // namespace

TEST_CASE("binary entropy closed-form values") {
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.25) == doctest::Approx(0.8112781244591328).epsilon(1e-15));
  CHECK(binary_entropy(0.3) == doctest::Approx(binary_entropy(0.7)).epsilon(1e-15));
  CHECK_THROWS_AS(binary_entropy(-0.01), std::domain_error);
  CHECK_THROWS_AS(binary_entropy(1.01), std::domain_error);
  CHECK_THROWS_AS(binary_entropy(NAN), std::domain_error);
}

TEST_CASE("binary entropy stays in [0,1] and peaks at one half") {
  for (int i = 0; i <= 1000; ++i) {
    const double p = i / 1000.0;
    const double h = binary_entropy(p);
    CHECK(h >= 0.0);
    CHECK(h <= 1.0);
    if (p < 0.5) CHECK(h < binary_entropy(p + 0.001) + 1e-15);
  }
}

TEST_CASE("expectation is the voxelwise mean") {
  auto one = [](double v) { return Volume3::filled({1, 1, 1}, {}, VolumeKind::kMask, v); };
  const PassStack s({one(1), one(0), one(1), one(1)});
  CHECK(expectation(s)[0] == 0.75);
  CHECK(expectation(s).kind() == VolumeKind::kProbability);
}

TEST_CASE("expectation is bitwise invariant to pass order") {
  std::mt19937_64 rng(21);
  std::vector<Volume3> passes;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 9; ++t) {
    std::vector<double> d(60);
    for (auto& x : d) x = u(rng);
    passes.emplace_back(Dims{5, 4, 3}, Spacing{}, VolumeKind::kProbability, d);
  }
  const auto ref = expectation(PassStack(passes));
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(passes.begin(), passes.end(), rng);
    CHECK(expectation(PassStack(passes)) == ref);
  }
}

TEST_CASE("entropy map equals the scalar closed form") {
  std::mt19937_64 rng(22);
  const auto stack = random_stack(rng, {6, 5, 4}, 20);
  const auto e = expectation(stack);
  const auto h = entropy_map(e);
  CHECK(h.kind() == VolumeKind::kEntropy);
  for (std::size_t i = 0; i < h.size(); ++i) {
    CHECK(std::abs(h[i] - oracle::entropy2(e[i])) <= 1e-12);
  }
  CHECK_THROWS_AS(entropy_map(Volume3::filled({1, 1, 1}, {}, VolumeKind::kIntensity, 0.5)),
                  VolumeError);
}

TEST_CASE("uncertain mask is strict and non-increasing in tau") {
  std::mt19937_64 rng(23);
  const auto stack = random_stack(rng, {8, 8, 8}, 20);
  const auto maps = analyze_uncertainty(stack, 0.5);
  std::size_t prev = maps.entropy.size() + 1;
  for (double tau : {0.001, 0.3, 0.5, 0.8, 0.999}) {
    const auto c = with_tau(maps, tau).uncertain_mask.count_nonzero();
    CHECK(c <= prev);
    prev = c;
  }
  // Two disagreeing passes give entropy exactly 1, which is not > 1.
  auto one = [](double v) { return Volume3::filled({1, 1, 1}, {}, VolumeKind::kMask, v); };
  const auto split = analyze_uncertainty(PassStack({one(0), one(1)}), 0.999);
  CHECK(split.entropy[0] == 1.0);
  CHECK(split.uncertain_mask[0] == 1.0);
  CHECK(uncertain_mask(split.entropy, 1.0)[0] == 0.0);
}

TEST_CASE("identical passes carry no uncertainty") {
  std::mt19937_64 rng(24);
  const auto m = oracle::random_mask(rng, {6, 6, 6}, 0.4);
  const auto maps = analyze_uncertainty(PassStack({m, m, m, m}), 0.001);
  CHECK(maps.entropy.count_nonzero() == 0);
  CHECK(maps.uncertain_mask.count_nonzero() == 0);
  CHECK(threshold(maps.expectation, 0.5) == m.with_data(VolumeKind::kMask,
                                                        {m.data().begin(), m.data().end()}));
}

TEST_CASE("single pass aggregates to itself") {
  std::mt19937_64 rng(25);
  const auto m = oracle::random_mask(rng, {4, 4, 4}, 0.5);
  const auto e = expectation(PassStack({m}));
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(e[i] == m[i]);
}
