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

#include "gcnrefine/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>

namespace gcnrefine {

namespace {

constexpr double kDiversityEps = 1e-6;

bool contains(const std::vector<std::uint32_t>& list, std::uint32_t v) {
  return std::find(list.begin(), list.end(), v) != list.end();
}

}  // namespace

std::optional<std::size_t> NodeSet::node_at(const Voxel& v) const {
  if (v.x >= dims.nx || v.y >= dims.ny || v.z >= dims.nz) return std::nullopt;
  const auto id = voxel_to_node[v.x + dims.nx * (v.y + dims.ny * v.z)];
  if (id < 0) return std::nullopt;
  return static_cast<std::size_t>(id);
}

std::size_t VoxelGraph::labeled_count() const {
  return static_cast<std::size_t>(
      std::count_if(node_set.nodes.begin(), node_set.nodes.end(),
                    [](const NodeRecord& n) { return n.label != NodeLabel::kUnlabeled; }));
}

Volume3 build_roi(const Volume3& uncertain, const Volume3& expectation, int dilation_radius) {
  require_same_geometry(uncertain, expectation, "build_roi");
  return mask_union(dilate(uncertain, dilation_radius), threshold(expectation, 0.5));
}

NodeSet build_nodes(const Volume3& roi, const Volume3& intensity, const Volume3& expectation,
                    const Volume3& entropy, const Volume3& prediction, const Volume3& uncertain) {
  require_same_geometry(roi, intensity, "build_nodes: intensity");
  require_same_geometry(roi, expectation, "build_nodes: expectation");
  require_same_geometry(roi, entropy, "build_nodes: entropy");
  require_same_geometry(roi, prediction, "build_nodes: prediction");
  require_same_geometry(roi, uncertain, "build_nodes: uncertain mask");
  if (prediction.kind() != VolumeKind::kMask || uncertain.kind() != VolumeKind::kMask ||
      roi.kind() != VolumeKind::kMask) {
    throw GraphError("build_nodes: roi, prediction and uncertain mask must be masks");
  }

  NodeSet out;
  out.dims = roi.dims();
  out.voxel_to_node.assign(roi.size(), -1);

  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < roi.size(); ++i) {
    if (roi[i] == 0.0) continue;
    sum += intensity[i];
    ++count;
  }
  if (count == 0) throw GraphError("empty ROI");
  if (count > std::numeric_limits<std::uint32_t>::max()) throw GraphError("ROI too large");
  const double mean = sum / static_cast<double>(count);
  double ss = 0.0;
  for (std::size_t i = 0; i < roi.size(); ++i) {
    if (roi[i] != 0.0) ss += (intensity[i] - mean) * (intensity[i] - mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(count));
  const double scale = sd > 0.0 ? 1.0 / sd : 1.0;

  out.nodes.reserve(count);
  std::size_t labeled[2] = {0, 0};
  for (std::size_t i = 0; i < roi.size(); ++i) {
    if (roi[i] == 0.0) continue;
    NodeLabel label = NodeLabel::kUnlabeled;
    if (uncertain[i] == 0.0) {
      label = prediction[i] != 0.0 ? NodeLabel::kForeground : NodeLabel::kBackground;
      ++labeled[static_cast<int>(label)];
    }
    out.voxel_to_node[i] = static_cast<std::int64_t>(out.nodes.size());
    out.nodes.push_back({roi.voxel(i),
                         {(intensity[i] - mean) * scale, expectation[i], entropy[i]},
                         label});
  }

  if (labeled[0] + labeled[1] == 0) throw GraphError("no labeled nodes");
  if (labeled[0] == 0 || labeled[1] == 0) {
    out.warnings.push_back(std::string("labeled nodes contain only the ") +
                           (labeled[0] == 0 ? "foreground" : "background") + " class");
  }
  return out;
}

EdgeSet build_edges(const NodeSet& nodes, int k, std::uint64_t seed) {
  if (k < 0) throw GraphError("build_edges: k must be nonnegative");
  const std::size_t n = nodes.size();
  EdgeSet out;
  if (n == 0) return out;

  std::vector<std::vector<std::uint32_t>> adj(n);
  auto link = [&](std::uint32_t a, std::uint32_t b) {
    adj[a].push_back(b);
    adj[b].push_back(a);
    out.pairs.push_back({std::min(a, b), std::max(a, b)});
  };

  for (std::uint32_t i = 0; i < n; ++i) {
    const Voxel& v = nodes.nodes[i].voxel;
    for (const Voxel& u : {Voxel{v.x + 1, v.y, v.z}, Voxel{v.x, v.y + 1, v.z},
                           Voxel{v.x, v.y, v.z + 1}}) {
      if (auto j = nodes.node_at(u)) link(i, static_cast<std::uint32_t>(*j));
    }
  }

  std::size_t k_eff = static_cast<std::size_t>(k);
  if (k_eff >= n && k_eff > 0) {
    k_eff = n - 1;
    out.warnings.push_back("k=" + std::to_string(k) + " clamped to node count - 1 = " +
                           std::to_string(k_eff));
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::uint32_t i = 0; i < n && k_eff > 0; ++i) {
    const std::size_t available = n - 1 - adj[i].size();
    const std::size_t target = std::min(k_eff, available);
    for (std::size_t drawn = 0; drawn < target;) {
      const auto j = static_cast<std::uint32_t>(pick(rng));
      if (j == i || contains(adj[i], j)) continue;
      link(i, j);
      ++drawn;
    }
  }

  std::sort(out.pairs.begin(), out.pairs.end());
  out.pairs.erase(std::unique(out.pairs.begin(), out.pairs.end()), out.pairs.end());
  return out;
}

double diversity(double p, double q) {
  p = std::clamp(p, kDiversityEps, 1.0 - kDiversityEps);
  q = std::clamp(q, kDiversityEps, 1.0 - kDiversityEps);
  if (p == q) return 0.0;
  if (p > q) std::swap(p, q);  // fixed argument order keeps the result bitwise symmetric
  return (p - q) * std::log2(p / q) + ((1.0 - p) - (1.0 - q)) * std::log2((1.0 - p) / (1.0 - q));
}

double edge_weight(const NodeRecord& a, const NodeRecord& b, const EdgeWeightParams& params) {
  if (!(params.sigma1 > 0.0) || !(params.sigma2 > 0.0)) {
    throw GraphError("edge_weight: sigma1 and sigma2 must be positive");
  }
  const double di = a.feature.intensity - b.feature.intensity;
  const double dx = static_cast<double>(a.voxel.x) - static_cast<double>(b.voxel.x);
  const double dy = static_cast<double>(a.voxel.y) - static_cast<double>(b.voxel.y);
  const double dz = static_cast<double>(a.voxel.z) - static_cast<double>(b.voxel.z);
  return params.lambda * diversity(a.feature.expectation, b.feature.expectation) +
         std::exp(-(di * di) / (2.0 * params.sigma1)) +
         std::exp(-(dx * dx + dy * dy + dz * dz) / (2.0 * params.sigma2));
}

CsrMatrix weighted_adjacency(const NodeSet& nodes, const EdgeSet& edges,
                             const EdgeWeightParams& params) {
  std::vector<WeightedEdge> weighted;
  weighted.reserve(edges.pairs.size());
  for (const auto& p : edges.pairs) {
    weighted.push_back({p.i, p.j, edge_weight(nodes.nodes[p.i], nodes.nodes[p.j], params)});
  }
  return symmetric_from_edges(nodes.size(), weighted);
}

CsrMatrix normalize_adjacency(const CsrMatrix& a) {
  const std::size_t n = a.n;
  std::vector<double> inv_sqrt_degree(n);
  for (std::size_t r = 0; r < n; ++r) {
    double d = 1.0;
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      if (a.col[k] == r) throw GraphError("normalize_adjacency: input has a self-loop");
      if (a.val[k] < 0.0) throw GraphError("normalize_adjacency: negative weight");
      d += a.val[k];
    }
    inv_sqrt_degree[r] = 1.0 / std::sqrt(d);
  }

  CsrMatrix out;
  out.n = n;
  out.row_ptr.assign(n + 1, 0);
  out.col.reserve(a.nnz() + n);
  out.val.reserve(a.nnz() + n);
  for (std::size_t r = 0; r < n; ++r) {
    bool diagonal_done = false;
    auto emit_diagonal = [&] {
      out.col.push_back(static_cast<std::uint32_t>(r));
      out.val.push_back(inv_sqrt_degree[r] * inv_sqrt_degree[r]);
      diagonal_done = true;
    };
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const std::size_t c = a.col[k];
      if (!diagonal_done && c > r) emit_diagonal();
      out.col.push_back(a.col[k]);
      out.val.push_back(inv_sqrt_degree[r] * a.val[k] * inv_sqrt_degree[c]);
    }
    if (!diagonal_done) emit_diagonal();
    out.row_ptr[r + 1] = out.col.size();
  }
  return out;
}

VoxelGraph build_graph(const Volume3& roi, const Volume3& intensity, const UncertaintyMaps& maps,
                       const Volume3& prediction, const GraphConfig& config) {
  VoxelGraph g;
  g.node_set = build_nodes(roi, intensity, maps.expectation, maps.entropy, prediction,
                           maps.uncertain_mask);
  const auto edges = build_edges(g.node_set, config.k, config.seed);
  g.adjacency = weighted_adjacency(g.node_set, edges, config.weights);
  g.norm_adj = normalize_adjacency(g.adjacency);
  g.warnings = g.node_set.warnings;
  g.warnings.insert(g.warnings.end(), edges.warnings.begin(), edges.warnings.end());
  return g;
}

std::vector<double> feature_matrix(const NodeSet& nodes) {
  std::vector<double> x;
  x.reserve(nodes.size() * 3);
  for (const auto& n : nodes.nodes) {
    x.push_back(n.feature.intensity);
    x.push_back(n.feature.expectation);
    x.push_back(n.feature.entropy);
  }
  return x;
}

void write_graph_dump(const VoxelGraph& graph, const std::filesystem::path& edges_path,
                      const std::filesystem::path& nodes_path) {
  std::ofstream edges(edges_path);
  if (!edges) throw GraphError("cannot write " + edges_path.string());
  edges << std::setprecision(17);
  const auto& a = graph.adjacency;
  for (std::size_t r = 0; r < a.n; ++r) {
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      if (a.col[k] > r) edges << r << ' ' << a.col[k] << ' ' << a.val[k] << '\n';
    }
  }

  std::ofstream nodes(nodes_path);
  if (!nodes) throw GraphError("cannot write " + nodes_path.string());
  nodes << std::setprecision(17);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto& n = graph.nodes()[i];
    nodes << i << ' ' << n.voxel.x << ' ' << n.voxel.y << ' ' << n.voxel.z << ' '
          << n.feature.intensity << ' ' << n.feature.expectation << ' ' << n.feature.entropy << ' '
          << static_cast<int>(n.label) << '\n';
  }
}

}  // namespace gcnrefine
