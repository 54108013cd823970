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

#ifndef GCNREFINE_TESTS_FIXTURES_HPP_
#define GCNREFINE_TESTS_FIXTURES_HPP_

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "gcnrefine/gcn.hpp"
#include "gcnrefine/sparse.hpp"
#include "support/oracles.hpp"

namespace gcnrefine::fixture {

// Linearly separable node-classification problem. Each node's label is
// expectation > 0.5, with expectations drawn from [0, 0.35] or [0.65, 1].
// Nodes form a chain sorted by expectation, so neighbors mostly share a
// class. Every fifth node is held out (unlabeled); `truth` keeps its label.
struct Separable {
  CsrMatrix norm_adj;
  std::vector<double> features;
  NodeTargets targets;
  std::vector<std::uint8_t> truth;
};

inline Separable separable(std::uint64_t seed, std::size_t n = 200) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lo(0.0, 0.35), hi(0.65, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i % 2 ? hi(rng) : lo(rng);
  std::sort(p.begin(), p.end());

  Separable s;
  std::vector<WeightedEdge> edges;
  for (std::uint32_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  s.norm_adj = normalize_adjacency(symmetric_from_edges(n, edges));

  s.features.resize(n * kInputFeatures);
  s.targets.labels.resize(n);
  s.targets.labeled.resize(n);
  s.truth.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.features[i * 3 + 0] = noise(rng);
    s.features[i * 3 + 1] = p[i];
    s.features[i * 3 + 2] = oracle::entropy2(p[i]);
    s.truth[i] = p[i] > 0.5;
    s.targets.labels[i] = s.truth[i];
    s.targets.labeled[i] = (i + 3) % 5 != 0;
  }
  return s;
}

}  // namespace gcnrefine::fixture

#endif  // GCNREFINE_TESTS_FIXTURES_HPP_
