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

#ifndef GCNREFINE_GCN_HPP_
#define GCNREFINE_GCN_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "gcnrefine/graph.hpp"
#include "gcnrefine/sparse.hpp"

namespace gcnrefine {

inline constexpr std::size_t kInputFeatures = 3;
inline constexpr std::size_t kHiddenUnits = 32;

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two-layer GCN weights: 3 -> 32 (ReLU) -> 1 (sigmoid).
struct GcnParams {
  static constexpr std::size_t kCount = kInputFeatures * kHiddenUnits + 2 * kHiddenUnits + 1;

  std::array<double, kInputFeatures * kHiddenUnits> w1{};  // row-major [feature][hidden]
  std::array<double, kHiddenUnits> b1{};
  std::array<double, kHiddenUnits> w2{};
  double b2 = 0.0;

  double& w1_at(std::size_t f, std::size_t h) { return w1[f * kHiddenUnits + h]; }
  double w1_at(std::size_t f, std::size_t h) const { return w1[f * kHiddenUnits + h]; }

  // Order: w1, b1, w2, b2.
  std::array<double, kCount> flatten() const;
  static GcnParams unflatten(std::span<const double, kCount> flat);

  friend bool operator==(const GcnParams&, const GcnParams&) = default;
};

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 1e-2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t init_seed = 0;
};

// Per-node supervision. `labeled[i] == 0` nodes are ignored by the loss and
// their `labels[i]` value is never read.
struct NodeTargets {
  std::vector<std::uint8_t> labels;
  std::vector<std::uint8_t> labeled;

  std::size_t labeled_count() const;
};

NodeTargets targets_from_graph(const VoxelGraph& graph);

// Intermediate activations kept for the backward pass.
struct ForwardPass {
  std::vector<double> support;  // A X, n x 3
  std::vector<double> pre;      // A X W1 + b1, n x 32
  std::vector<double> hidden;   // relu(pre)
  std::vector<double> logits;   // A (hidden W2) + b2
  std::vector<double> probs;    // sigmoid(logits)
};

// Glorot-uniform weights, zero biases.
GcnParams init_params(std::uint64_t seed);

// `features` is row-major n x 3 and `norm_adj` must be symmetric.
ForwardPass forward(const CsrMatrix& norm_adj, std::span<const double> features,
                    const GcnParams& params);
std::vector<double> forward(const VoxelGraph& graph, const GcnParams& params);

// A X depends only on the graph, so training computes it once.
std::vector<double> propagate_features(const CsrMatrix& norm_adj, std::span<const double> features);
ForwardPass forward_from_support(const CsrMatrix& norm_adj, std::vector<double> support,
                                 const GcnParams& params);

// Mean binary cross-entropy (natural log) over labeled nodes, predictions
// clamped to [1e-7, 1 - 1e-7].
double masked_bce_loss(std::span<const double> probs, const NodeTargets& targets);

// Exact gradient of masked_bce_loss(forward(...)) with respect to params.
GcnParams backward(const CsrMatrix& norm_adj, const ForwardPass& pass, const GcnParams& params,
                   const NodeTargets& targets);

struct TrainResult {
  GcnParams params;
  // loss_curve[e] is the loss before update e; the final entry is the loss
  // after the last update, so the curve has epochs + 1 points.
  std::vector<double> loss_curve;
};

// Full-batch Adam.
TrainResult train(const CsrMatrix& norm_adj, std::span<const double> features,
                  const NodeTargets& targets, const TrainConfig& config);
TrainResult train(const VoxelGraph& graph, const TrainConfig& config);

// 1 iff p > cut.
std::vector<std::uint8_t> predict(const VoxelGraph& graph, const GcnParams& params,
                                  double cut = 0.5);
std::vector<std::uint8_t> binarize(std::span<const double> probs, double cut = 0.5);

// Checkpoint: `<name>.json` header (shapes, seed, epoch) + `<name>.raw`
// little-endian float32 payload in flatten() order.
void save_params(const GcnParams& params, const std::filesystem::path& path, std::uint64_t seed,
                 int epoch);
GcnParams load_params(const std::filesystem::path& path);

// CSV with header `epoch,loss`.
void write_loss_csv(std::span<const double> loss_curve, const std::filesystem::path& path);

}  // namespace gcnrefine

#endif  // GCNREFINE_GCN_HPP_
