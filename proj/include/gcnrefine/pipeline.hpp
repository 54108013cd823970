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

#ifndef GCNREFINE_PIPELINE_HPP_
#define GCNREFINE_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gcnrefine/gcn.hpp"
#include "gcnrefine/graph.hpp"
#include "gcnrefine/uncertainty.hpp"
#include "gcnrefine/volume.hpp"

#include "json.hpp"

namespace gcnrefine {

enum class ReplacePolicy {
  kFullReplacementInsideRoi,  // every ROI voxel takes the GCN label
  kUncertainOnly,             // only unlabeled (uncertain) ROI voxels do
};

std::string_view to_string(ReplacePolicy policy);

struct RefineConfig {
  double tau = 0.8;
  int k = 16;
  int dilation_radius = 2;
  double lambda = 1.0;
  double sigma1 = 0.5;
  double sigma2 = 100.0;
  TrainConfig train;
  std::uint64_t edge_seed = 0;
  bool apply_lcc_to_input = true;
  ReplacePolicy replace_policy = ReplacePolicy::kFullReplacementInsideRoi;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  GraphConfig graph_config() const { return {k, edge_seed, {lambda, sigma1, sigma2}}; }
};

struct RefineReport {
  std::size_t passes = 0;
  std::size_t uncertain_voxels = 0;
  std::size_t roi_voxels = 0;
  std::size_t node_count = 0;
  std::size_t labeled_count = 0;
  std::size_t unlabeled_count = 0;
  bool refined = false;  // false when the ROI was empty and the input passed through

  // Present only when ground truth was supplied. dice_before is measured on
  // the analyzed input (after largest-component filtering when enabled).
  std::optional<double> dice_before;
  std::optional<double> dice_after;
  std::optional<double> dice_expectation;  // expectation binarized at 0.5
  std::optional<double> rel_imp;           // dice_after vs dice_expectation, percent

  std::vector<double> loss_curve;
  RefineConfig config;
  std::vector<std::string> warnings;
};

struct RefineResult {
  Volume3 refined;
  RefineReport report;
};

// Optional intermediate products, filled only when the ROI is nonempty.
struct RefineArtifacts {
  std::optional<VoxelGraph> graph;
  std::optional<GcnParams> params;
};

// Full refinement: uncertainty analysis, ROI, graph, GCN training and
// output assembly. Inside the ROI the GCN label replaces the input (all ROI
// voxels, or only uncertain ones under kUncertainOnly); outside it the input
// is kept. `ground_truth` may be null.
RefineResult refine(const Volume3& intensity, const PassStack& passes, const Volume3& prediction,
                    const RefineConfig& config, const Volume3* ground_truth = nullptr);

// Same, reusing precomputed expectation and entropy. `maps.tau` is ignored;
// the mask is recomputed from config.tau.
RefineResult refine_with_maps(const Volume3& intensity, const UncertaintyMaps& maps,
                              std::size_t pass_count, const Volume3& prediction,
                              const RefineConfig& config, const Volume3* ground_truth = nullptr,
                              RefineArtifacts* artifacts = nullptr);

// (gcn_dsc - expectation_dsc) / expectation_dsc * 100. Throws
// std::domain_error unless expectation_dsc > 0.
double relative_improvement(double gcn_dsc, double expectation_dsc);

nlohmann::ordered_json config_to_json(const RefineConfig& config);
nlohmann::ordered_json report_to_json(const RefineReport& report);

struct SweepRow {
  double tau;
  double dice_before;
  double dice_after;
  std::size_t uncertain_voxels;
  std::size_t node_count;
};

// One refine per tau with shared seeds; expectation and entropy are computed
// once.
std::vector<SweepRow> sweep_tau(const Volume3& intensity, const PassStack& passes,
                                const Volume3& prediction, const Volume3& ground_truth,
                                std::span<const double> taus, const RefineConfig& config);

// `tau,dice_before,dice_after,uncertain_voxels,node_count`
void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out);

}  // namespace gcnrefine

#endif  // GCNREFINE_PIPELINE_HPP_
