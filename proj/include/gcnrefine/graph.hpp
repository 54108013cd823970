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

#ifndef GCNREFINE_GRAPH_HPP_
#define GCNREFINE_GRAPH_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcnrefine/sparse.hpp"
#include "gcnrefine/uncertainty.hpp"
#include "gcnrefine/volume.hpp"

namespace gcnrefine {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NodeLabel : std::int8_t { kBackground = 0, kForeground = 1, kUnlabeled = -1 };

struct NodeFeature {
  double intensity;  // z-scored over the ROI
  double expectation;
  double entropy;
};

struct NodeRecord {
  Voxel voxel;
  NodeFeature feature;
  NodeLabel label;
};

// ROI voxels in scan order (x fastest) with their features and labels.
struct NodeSet {
  Dims dims;
  std::vector<NodeRecord> nodes;
  std::vector<std::int64_t> voxel_to_node;  // -1 outside the ROI
  std::vector<std::string> warnings;

  std::size_t size() const { return nodes.size(); }
  std::optional<std::size_t> node_at(const Voxel& v) const;
};

struct EdgeWeightParams {
  double lambda = 1.0;
  double sigma1 = 0.5;
  double sigma2 = 100.0;
};

struct GraphConfig {
  int k = 16;
  std::uint64_t seed = 0;
  EdgeWeightParams weights;
};

struct NodePair {
  std::uint32_t i;  // i < j
  std::uint32_t j;
  friend bool operator==(const NodePair&, const NodePair&) = default;
  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

struct EdgeSet {
  std::vector<NodePair> pairs;  // sorted, unique
  std::vector<std::string> warnings;
};

struct VoxelGraph {
  NodeSet node_set;
  CsrMatrix adjacency;  // weighted, symmetric, no diagonal
  CsrMatrix norm_adj;   // D^-1/2 (A + I) D^-1/2
  std::vector<std::string> warnings;

  std::size_t size() const { return node_set.size(); }
  const std::vector<NodeRecord>& nodes() const { return node_set.nodes; }
  std::size_t labeled_count() const;
  std::size_t unlabeled_count() const { return size() - labeled_count(); }
};

// dilate(uncertain, radius) ∪ (expectation > 0.5).
Volume3 build_roi(const Volume3& uncertain, const Volume3& expectation, int dilation_radius);

// One node per ROI voxel. Uncertain voxels are unlabeled; the rest take the
// prediction's label. Throws GraphError on an empty ROI or when every node
// is unlabeled.
NodeSet build_nodes(const Volume3& roi, const Volume3& intensity, const Volume3& expectation,
                    const Volume3& entropy, const Volume3& prediction, const Volume3& uncertain);

// Face-neighbor edges inside the ROI plus, for each node in index order, k
// random partners drawn uniformly from nodes that are neither itself nor
// already adjacent to it. Draws come from std::mt19937_64(seed) through
// std::uniform_int_distribution over [0, n-1], rejecting ineligible picks.
EdgeSet build_edges(const NodeSet& nodes, int k, std::uint64_t seed);

// Symmetric binary divergence between (p, 1-p) and (q, 1-q), base-2 logs,
// with both inputs clamped to [1e-6, 1 - 1e-6].
double diversity(double p, double q);

// lambda * div + exp(-dI^2 / (2 sigma1)) + exp(-|dx|^2 / (2 sigma2)).
double edge_weight(const NodeRecord& a, const NodeRecord& b, const EdgeWeightParams& params);

CsrMatrix weighted_adjacency(const NodeSet& nodes, const EdgeSet& edges,
                             const EdgeWeightParams& params);

// D~^-1/2 (A + I) D~^-1/2 with unit self-loops.
CsrMatrix normalize_adjacency(const CsrMatrix& adjacency);

VoxelGraph build_graph(const Volume3& roi, const Volume3& intensity, const UncertaintyMaps& maps,
                       const Volume3& prediction, const GraphConfig& config);

// Node features as a row-major n x 3 matrix (intensity, expectation, entropy).
std::vector<double> feature_matrix(const NodeSet& nodes);

// Debug dump: `node_i node_j weight` per undirected edge, and
// `index ix iy iz intensity expectation entropy label` per node, with
// label -1 for unlabeled.
void write_graph_dump(const VoxelGraph& graph, const std::filesystem::path& edges_path,
                      const std::filesystem::path& nodes_path);

}  // namespace gcnrefine

#endif  // GCNREFINE_GRAPH_HPP_
