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

#include "gcnrefine/gcn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <string>

#include "json.hpp"

namespace gcnrefine {

namespace {

constexpr double kProbClamp = 1e-7;

std::uint32_t to_little_endian(std::uint32_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) | ((bits >> 8) & 0xFF00u) |
           (bits >> 24);
  }
  return bits;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void require_rows(std::size_t n, std::span<const double> features) {
  if (features.size() != n * kInputFeatures) {
    throw std::invalid_argument("feature matrix must be n x 3");
  }
  for (double v : features) {
    if (std::isnan(v)) throw std::invalid_argument("NaN in node features");
  }
}

}  // namespace

std::array<double, GcnParams::kCount> GcnParams::flatten() const {
  std::array<double, kCount> flat{};
  auto it = std::copy(w1.begin(), w1.end(), flat.begin());
  it = std::copy(b1.begin(), b1.end(), it);
  it = std::copy(w2.begin(), w2.end(), it);
  *it = b2;
  return flat;
}

GcnParams GcnParams::unflatten(std::span<const double, kCount> flat) {
  GcnParams p;
  auto it = flat.begin();
  std::copy_n(it, p.w1.size(), p.w1.begin());
  it += static_cast<std::ptrdiff_t>(p.w1.size());
  std::copy_n(it, p.b1.size(), p.b1.begin());
  it += static_cast<std::ptrdiff_t>(p.b1.size());
  std::copy_n(it, p.w2.size(), p.w2.begin());
  it += static_cast<std::ptrdiff_t>(p.w2.size());
  p.b2 = *it;
  return p;
}

std::size_t NodeTargets::labeled_count() const {
  return static_cast<std::size_t>(std::count(labeled.begin(), labeled.end(), std::uint8_t{1}));
}

NodeTargets targets_from_graph(const VoxelGraph& graph) {
  NodeTargets t;
  t.labels.reserve(graph.size());
  t.labeled.reserve(graph.size());
  for (const auto& node : graph.nodes()) {
    t.labeled.push_back(node.label != NodeLabel::kUnlabeled);
    t.labels.push_back(node.label == NodeLabel::kForeground);
  }
  return t;
}

GcnParams init_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GcnParams p;
  const double bound1 = std::sqrt(6.0 / static_cast<double>(kInputFeatures + kHiddenUnits));
  const double bound2 = std::sqrt(6.0 / static_cast<double>(kHiddenUnits + 1));
  std::uniform_real_distribution<double> u1(-bound1, bound1);
  std::uniform_real_distribution<double> u2(-bound2, bound2);
  for (auto& w : p.w1) w = u1(rng);
  for (auto& w : p.w2) w = u2(rng);
  return p;
}

std::vector<double> propagate_features(const CsrMatrix& norm_adj,
                                       std::span<const double> features) {
  require_rows(norm_adj.n, features);
  return norm_adj.multiply(features, kInputFeatures);
}

ForwardPass forward_from_support(const CsrMatrix& norm_adj, std::vector<double> support,
                                 const GcnParams& params) {
  const std::size_t n = norm_adj.n;
  ForwardPass f;
  f.support = std::move(support);
  f.pre.resize(n * kHiddenUnits);
  f.hidden.resize(n * kHiddenUnits);
  std::vector<double> projected(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = f.support.data() + i * kInputFeatures;
    double* pre = f.pre.data() + i * kHiddenUnits;
    double* hid = f.hidden.data() + i * kHiddenUnits;
    double acc = 0.0;
    for (std::size_t h = 0; h < kHiddenUnits; ++h) {
      double s = params.b1[h];
      for (std::size_t c = 0; c < kInputFeatures; ++c) s += x[c] * params.w1_at(c, h);
      pre[h] = s;
      hid[h] = s > 0.0 ? s : 0.0;
      acc += hid[h] * params.w2[h];
    }
    projected[i] = acc;
  }
  f.logits = norm_adj.multiply(projected, 1);
  f.probs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    f.logits[i] += params.b2;
    f.probs[i] = sigmoid(f.logits[i]);
  }
  return f;
}

ForwardPass forward(const CsrMatrix& norm_adj, std::span<const double> features,
                    const GcnParams& params) {
  return forward_from_support(norm_adj, propagate_features(norm_adj, features), params);
}

std::vector<double> forward(const VoxelGraph& graph, const GcnParams& params) {
  const auto x = feature_matrix(graph.node_set);
  return forward(graph.norm_adj, x, params).probs;
}

double masked_bce_loss(std::span<const double> probs, const NodeTargets& targets) {
  if (targets.labels.size() != probs.size() || targets.labeled.size() != probs.size()) {
    throw std::invalid_argument("masked_bce_loss: size mismatch");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!targets.labeled[i]) continue;
    const double p = std::clamp(probs[i], kProbClamp, 1.0 - kProbClamp);
    sum -= targets.labels[i] ? std::log(p) : std::log(1.0 - p);
    ++count;
  }
  if (count == 0) throw std::invalid_argument("masked_bce_loss: no labeled nodes");
  return sum / static_cast<double>(count);
}

GcnParams backward(const CsrMatrix& norm_adj, const ForwardPass& pass, const GcnParams& params,
                   const NodeTargets& targets) {
  const std::size_t n = norm_adj.n;
  const double inv_count = 1.0 / static_cast<double>(std::max<std::size_t>(1, targets.labeled_count()));

  // Inside the clamp band dL/dz = (p - y) / N; outside it the clamped loss is flat.
  std::vector<double> d_logits(n, 0.0);
  GcnParams grad;
  for (std::size_t i = 0; i < n; ++i) {
    if (!targets.labeled[i]) continue;
    const double p = pass.probs[i];
    if (p <= kProbClamp || p >= 1.0 - kProbClamp) continue;
    d_logits[i] = (p - static_cast<double>(targets.labels[i])) * inv_count;
    grad.b2 += d_logits[i];
  }

  // norm_adj is symmetric, so A^T dz = A dz.
  const auto d_projected = norm_adj.multiply(d_logits, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = d_projected[i];
    if (g == 0.0) continue;
    const double* x = pass.support.data() + i * kInputFeatures;
    const double* pre = pass.pre.data() + i * kHiddenUnits;
    const double* hid = pass.hidden.data() + i * kHiddenUnits;
    for (std::size_t h = 0; h < kHiddenUnits; ++h) {
      grad.w2[h] += hid[h] * g;
      if (pre[h] <= 0.0) continue;
      const double d_pre = g * params.w2[h];
      grad.b1[h] += d_pre;
      for (std::size_t c = 0; c < kInputFeatures; ++c) grad.w1_at(c, h) += x[c] * d_pre;
    }
  }
  return grad;
}

TrainResult train(const CsrMatrix& norm_adj, std::span<const double> features,
                  const NodeTargets& targets, const TrainConfig& config) {
  if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (!(config.learning_rate > 0.0)) throw std::invalid_argument("train: learning rate must be > 0");
  if (targets.labeled_count() == 0) throw std::invalid_argument("train: no labeled nodes");

  const auto support = propagate_features(norm_adj, features);
  TrainResult result{init_params(config.init_seed), {}};
  result.loss_curve.reserve(static_cast<std::size_t>(config.epochs) + 1);

  auto theta = result.params.flatten();
  std::array<double, GcnParams::kCount> m{};
  std::array<double, GcnParams::kCount> v{};
  double beta1_power = 1.0;
  double beta2_power = 1.0;

  auto record = [&](const ForwardPass& pass, int epoch) {
    const double loss = masked_bce_loss(pass.probs, targets);
    if (!std::isfinite(loss)) {
      throw TrainingError("training diverged: loss is " + std::to_string(loss) + " at epoch " +
                          std::to_string(epoch));
    }
    result.loss_curve.push_back(loss);
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto params = GcnParams::unflatten(theta);
    const auto pass = forward_from_support(norm_adj, support, params);
    record(pass, epoch);
    const auto grad = backward(norm_adj, pass, params, targets).flatten();

    beta1_power *= config.adam_beta1;
    beta2_power *= config.adam_beta2;
    for (std::size_t k = 0; k < GcnParams::kCount; ++k) {
      m[k] = config.adam_beta1 * m[k] + (1.0 - config.adam_beta1) * grad[k];
      v[k] = config.adam_beta2 * v[k] + (1.0 - config.adam_beta2) * grad[k] * grad[k];
      const double m_hat = m[k] / (1.0 - beta1_power);
      const double v_hat = v[k] / (1.0 - beta2_power);
      theta[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
    }
  }
  result.params = GcnParams::unflatten(theta);
  record(forward_from_support(norm_adj, support, result.params), config.epochs);
  return result;
}

TrainResult train(const VoxelGraph& graph, const TrainConfig& config) {
  const auto x = feature_matrix(graph.node_set);
  return train(graph.norm_adj, x, targets_from_graph(graph), config);
}

std::vector<std::uint8_t> binarize(std::span<const double> probs, double cut) {
  std::vector<std::uint8_t> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] > cut ? 1 : 0;
  return out;
}

std::vector<std::uint8_t> predict(const VoxelGraph& graph, const GcnParams& params, double cut) {
  return binarize(forward(graph, params), cut);
}

void save_params(const GcnParams& params, const std::filesystem::path& path, std::uint64_t seed,
                 int epoch) {
  nlohmann::ordered_json header;
  header["w1"] = {kInputFeatures, kHiddenUnits};
  header["b1"] = {kHiddenUnits};
  header["w2"] = {kHiddenUnits, 1};
  header["b2"] = {1};
  header["dtype"] = "f32";
  header["seed"] = seed;
  header["epoch"] = epoch;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << header.dump(2) << "\n";

  auto raw_path = path;
  raw_path.replace_extension(".raw");
  std::ofstream raw(raw_path, std::ios::binary);
  if (!raw) throw std::runtime_error("cannot write " + raw_path.string());
  for (double v : params.flatten()) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    bits = to_little_endian(bits);
    raw.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
}

GcnParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json header = nlohmann::json::parse(in);
  const auto w1 = header.at("w1").get<std::vector<std::size_t>>();
  if (w1 != std::vector<std::size_t>{kInputFeatures, kHiddenUnits} ||
      header.at("dtype").get<std::string>() != "f32") {
    throw std::runtime_error("incompatible checkpoint " + path.string());
  }
  auto raw_path = path;
  raw_path.replace_extension(".raw");
  std::ifstream raw(raw_path, std::ios::binary);
  std::array<double, GcnParams::kCount> flat{};
  for (auto& v : flat) {
    std::uint32_t bits = 0;
    if (!raw.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
      throw std::runtime_error("short checkpoint payload " + raw_path.string());
    }
    bits = to_little_endian(bits);
    v = std::bit_cast<float>(bits);
  }
  return GcnParams::unflatten(flat);
}

void write_loss_csv(std::span<const double> loss_curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "epoch,loss\n" << std::setprecision(17);
  for (std::size_t e = 0; e < loss_curve.size(); ++e) out << e << ',' << loss_curve[e] << '\n';
}

}  // namespace gcnrefine
