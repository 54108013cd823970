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

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "doctest.h"
#include "gcnrefine/gcn.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace gcnrefine;

namespace {

double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

}  // namespace

TEST_CASE("glorot init bounds, zero biases, seeded") {
  const auto p = init_params(4);
  const double b1 = std::sqrt(6.0 / 35.0), b2 = std::sqrt(6.0 / 33.0);
  for (double w : p.w1) CHECK(std::abs(w) <= b1);
  for (double w : p.w2) CHECK(std::abs(w) <= b2);
  for (double b : p.b1) CHECK(b == 0.0);
  CHECK(p.b2 == 0.0);
  CHECK(init_params(4) == p);
  CHECK(init_params(5) != p);
  CHECK(GcnParams::kCount == 161);
  CHECK(GcnParams::unflatten(p.flatten()) == p);
}

TEST_CASE("forward matches the dense oracle on a 5-node graph") {
  const std::vector<WeightedEdge> e{{0, 1, 1.5}, {1, 2, 0.5}, {2, 3, 2.0}, {3, 4, 1.0}, {0, 4, 0.25}};
  const auto adj = symmetric_from_edges(5, e);
  const auto norm = normalize_adjacency(adj);
  const std::vector<double> x{0.1, 0.9, 0.2, -1.2, 0.3, 0.8, 0.5, 0.5, 1.0,
                              2.0, 0.1, 0.4, -0.3, 0.7, 0.6};
  auto p = init_params(9);
  for (std::size_t h = 0; h < kHiddenUnits; ++h) p.b1[h] = 0.01 * static_cast<double>(h) - 0.1;
  p.b2 = -0.2;
  const auto got = forward(norm, x, p);
  const auto want = oracle::forward(oracle::normalized(oracle::to_dense(adj)), x, p);
  REQUIRE(got.probs.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(got.probs[i] - want[i]) <= 1e-10);
}

TEST_CASE("zero weights give one half everywhere") {
  std::mt19937_64 rng(1);
  const auto g = oracle::random_toy_graph(rng, 10);
  const auto pass = forward(g.norm_adj, g.features, GcnParams{});
  for (double p : pass.probs) CHECK(p == 0.5);
  CHECK(masked_bce_loss(pass.probs, g.targets) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("masked BCE closed-form values") {
  NodeTargets one{{1}, {1}};
  CHECK(masked_bce_loss(std::vector<double>{0.5}, one) == doctest::Approx(std::log(2.0)));
  NodeTargets two{{1, 1}, {1, 1}};
  const double want = (-std::log(0.9) - std::log(0.8)) / 2.0;
  CHECK(masked_bce_loss(std::vector<double>{0.9, 0.8}, two) == doctest::Approx(want).epsilon(1e-14));
  CHECK(std::abs(want - 0.164252) < 1e-6);

  // Unlabeled nodes never contribute.
  NodeTargets masked{{1, 0, 1}, {1, 0, 1}};
  CHECK(masked_bce_loss(std::vector<double>{0.9, 0.0, 0.8}, masked) ==
        doctest::Approx(want).epsilon(1e-14));

  // Predictions are clamped before the log.
  CHECK(masked_bce_loss(std::vector<double>{0.0}, one) ==
        doctest::Approx(-std::log(1e-7)).epsilon(1e-12));
  NodeTargets none{{1}, {0}};
  CHECK_THROWS_AS(masked_bce_loss(std::vector<double>{0.5}, none), std::invalid_argument);
}

TEST_CASE("analytic gradient matches central differences on 20 toy graphs") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_toy_graph(rng, 15);
    const auto pass = forward(g.norm_adj, g.features, g.params);
    const auto analytic = backward(g.norm_adj, pass, g.params, g.targets).flatten();
    const auto numeric = oracle::numeric_gradient(g.dense_adj, g.features, g.params, g.targets, 1e-4);
    double worst = 0.0;
    for (std::size_t k = 0; k < GcnParams::kCount; ++k) {
      worst = std::max(worst, rel_error(analytic[k], numeric[k]));
    }
    CHECK_MESSAGE(worst < 1e-4, "trial " << trial << " worst relative error " << worst);
  }
}

TEST_CASE("one epoch is a single bias-corrected Adam step") {
  std::mt19937_64 rng(3);
  const auto g = oracle::random_toy_graph(rng, 12);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.init_seed = 17;
  const auto p0 = init_params(cfg.init_seed);
  const auto grad = backward(g.norm_adj, forward(g.norm_adj, g.features, p0), p0, g.targets).flatten();
  auto expect = p0.flatten();
  for (std::size_t k = 0; k < GcnParams::kCount; ++k) {
    // m_hat = g and v_hat = g^2 after one step.
    expect[k] -= cfg.learning_rate * grad[k] / (std::abs(grad[k]) + cfg.adam_eps);
  }
  const auto got = train(g.norm_adj, g.features, g.targets, cfg);
  const auto flat = got.params.flatten();
  for (std::size_t k = 0; k < GcnParams::kCount; ++k) {
    CHECK(flat[k] == doctest::Approx(expect[k]).epsilon(1e-12));
  }
  REQUIRE(got.loss_curve.size() == 2);
  CHECK(got.loss_curve[0] ==
        doctest::Approx(masked_bce_loss(forward(g.norm_adj, g.features, p0).probs, g.targets)));
}

TEST_CASE("training is deterministic and records epochs + 1 losses") {
  std::mt19937_64 rng(4);
  const auto g = oracle::random_toy_graph(rng, 15);
  TrainConfig cfg;
  cfg.epochs = 50;
  const auto a = train(g.norm_adj, g.features, g.targets, cfg);
  const auto b = train(g.norm_adj, g.features, g.targets, cfg);
  CHECK(a.params == b.params);
  CHECK(a.loss_curve == b.loss_curve);
  CHECK(a.loss_curve.size() == 51);
  CHECK(a.loss_curve.back() < a.loss_curve.front());
}

TEST_CASE("labels of unlabeled nodes are never read") {
  std::mt19937_64 rng(5);
  auto g = oracle::random_toy_graph(rng, 15);
  TrainConfig cfg;
  cfg.epochs = 30;
  const auto ref = train(g.norm_adj, g.features, g.targets, cfg);
  for (std::size_t i = 0; i < g.targets.labels.size(); ++i) {
    if (!g.targets.labeled[i]) g.targets.labels[i] ^= 1;
  }
  const auto flipped = train(g.norm_adj, g.features, g.targets, cfg);
  CHECK(flipped.params == ref.params);
  CHECK(flipped.loss_curve == ref.loss_curve);
}

TEST_CASE("forward is equivariant to node permutation") {
  std::mt19937_64 rng(6);
  const auto g = oracle::random_toy_graph(rng, 15);
  const std::size_t n = g.dense_adj.size();
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  std::shuffle(perm.begin(), perm.end(), rng);

  // Node i of the original graph becomes node perm[i].
  std::vector<WeightedEdge> orig, edges;
  std::uniform_real_distribution<double> w(0.1, 3.0);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (j == i + 1 || w(rng) < 0.8) orig.push_back({i, j, w(rng)});
  for (const auto& e : orig) {
    auto a = perm[e.i], b = perm[e.j];
    edges.push_back({std::min(a, b), std::max(a, b), e.weight});
  }
  const auto na = normalize_adjacency(symmetric_from_edges(n, orig));
  const auto nb = normalize_adjacency(symmetric_from_edges(n, edges));
  std::vector<double> xb(g.features.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < 3; ++f) xb[perm[i] * 3 + f] = g.features[i * 3 + f];
  const auto pa = forward(na, g.features, g.params).probs;
  const auto pb = forward(nb, xb, g.params).probs;
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(pa[i] - pb[perm[i]]) <= 1e-12);
}

TEST_CASE("separable fixture is learned") {
  const auto s = fixture::separable(7);
  const auto result = train(s.norm_adj, s.features, s.targets, TrainConfig{});
  const auto labels = binarize(forward(s.norm_adj, s.features, result.params).probs);
  std::size_t lab_ok = 0, lab_n = 0, held_ok = 0, held_n = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool ok = labels[i] == s.truth[i];
    if (s.targets.labeled[i]) {
      lab_ok += ok;
      ++lab_n;
    } else {
      held_ok += ok;
      ++held_n;
    }
  }
  CHECK(lab_ok == lab_n);
  CHECK(static_cast<double>(held_ok) >= 0.95 * static_cast<double>(held_n));
}

TEST_CASE("binarize is strict at the cut") {
  const std::vector<double> p{0.5, 0.50001, 0.2, 1.0};
  CHECK(binarize(p) == std::vector<std::uint8_t>{0, 1, 0, 1});
  CHECK(binarize(p, 0.0) == std::vector<std::uint8_t>{1, 1, 1, 1});
}

TEST_CASE("train rejects bad configurations") {
  std::mt19937_64 rng(8);
  auto g = oracle::random_toy_graph(rng, 6);
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(train(g.norm_adj, g.features, g.targets, cfg), std::invalid_argument);
  cfg.epochs = 5;
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(train(g.norm_adj, g.features, g.targets, cfg), std::invalid_argument);
  cfg.learning_rate = 1e-2;
  std::fill(g.targets.labeled.begin(), g.targets.labeled.end(), 0);
  CHECK_THROWS_AS(train(g.norm_adj, g.features, g.targets, cfg), std::invalid_argument);
}

TEST_CASE("parameter checkpoint and loss CSV") {
  TempDir dir;
  const auto p = init_params(10);
  save_params(p, dir.path() / "params.json", 10, 200);
  const auto back = load_params(dir.path() / "params.json");
  const auto a = p.flatten(), b = back.flatten();
  for (std::size_t k = 0; k < GcnParams::kCount; ++k) CHECK(b[k] == static_cast<double>(static_cast<float>(a[k])));

  write_loss_csv(std::vector<double>{0.7, 0.5, 0.25}, dir.path() / "loss.csv");
  std::ifstream in(dir.path() / "loss.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,loss");
  std::size_t rows = 0;
  while (std::getline(in, line)) rows += !line.empty();
  CHECK(rows == 3);
}
