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

#include "gcnrefine/pipeline.hpp"

#include <cmath>
#include <iomanip>
#include <stdexcept>

namespace gcnrefine {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be positive");
  }
}

}  // namespace

std::string_view to_string(ReplacePolicy policy) {
  switch (policy) {
    case ReplacePolicy::kFullReplacementInsideRoi:
      return "full-replacement-inside-ROI";
    case ReplacePolicy::kUncertainOnly:
      return "uncertain-only";
  }
  return "unknown";
}

void RefineConfig::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("tau must lie in (0,1), got " + std::to_string(tau));
  }
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  if (dilation_radius < 1) throw std::invalid_argument("dilation radius must be >= 1");
  if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  require_positive(sigma1, "sigma1");
  require_positive(sigma2, "sigma2");
  if (train.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  require_positive(train.learning_rate, "learning rate");
}

RefineResult refine(const Volume3& intensity, const PassStack& passes, const Volume3& prediction,
                    const RefineConfig& config, const Volume3* ground_truth) {
  config.validate();
  require_same_geometry(intensity, passes.front(), "refine: passes vs intensity");
  const auto maps = analyze_uncertainty(passes, config.tau);
  return refine_with_maps(intensity, maps, passes.size(), prediction, config, ground_truth);
}

RefineResult refine_with_maps(const Volume3& intensity, const UncertaintyMaps& maps,
                              std::size_t pass_count, const Volume3& prediction,
                              const RefineConfig& config, const Volume3* ground_truth,
                              RefineArtifacts* artifacts) {
  config.validate();
  require_same_geometry(intensity, maps.expectation, "refine: expectation vs intensity");
  require_same_geometry(intensity, prediction, "refine: prediction vs intensity");
  if (prediction.kind() != VolumeKind::kMask) {
    throw VolumeError("refine: prediction must be a mask volume");
  }
  if (ground_truth != nullptr) {
    require_same_geometry(intensity, *ground_truth, "refine: ground truth vs intensity");
  }

  const auto uncertain = uncertain_mask(maps.entropy, config.tau);
  const UncertaintyMaps current{maps.expectation, maps.entropy, uncertain, config.tau};
  const Volume3 input =
      config.apply_lcc_to_input ? largest_connected_component(prediction) : prediction;
  const Volume3 roi = build_roi(uncertain, maps.expectation, config.dilation_radius);

  RefineReport report;
  report.passes = pass_count;
  report.config = config;
  report.uncertain_voxels = uncertain.count_nonzero();
  report.roi_voxels = roi.count_nonzero();

  std::vector<double> out(input.data().begin(), input.data().end());
  if (report.roi_voxels == 0) {
    report.warnings.push_back("empty ROI: no uncertain voxels and empty expectation; "
                              "prediction returned unchanged");
  } else {
    auto graph = build_graph(roi, intensity, current, input, config.graph_config());
    report.warnings.insert(report.warnings.end(), graph.warnings.begin(), graph.warnings.end());
    report.node_count = graph.size();
    report.labeled_count = graph.labeled_count();
    report.unlabeled_count = graph.unlabeled_count();

    auto trained = train(graph, config.train);
    report.loss_curve = std::move(trained.loss_curve);
    const auto labels = predict(graph, trained.params, 0.5);
    const auto& dims = input.dims();
    for (std::size_t i = 0; i < graph.size(); ++i) {
      const auto& node = graph.nodes()[i];
      if (config.replace_policy == ReplacePolicy::kUncertainOnly &&
          node.label != NodeLabel::kUnlabeled) {
        continue;
      }
      const std::size_t flat = node.voxel.x + dims.nx * (node.voxel.y + dims.ny * node.voxel.z);
      out[flat] = labels[i] ? 1.0 : 0.0;
    }
    report.refined = true;
    if (artifacts != nullptr) {
      artifacts->params = trained.params;
      artifacts->graph = std::move(graph);
    }
  }

  Volume3 refined = input.with_data(std::move(out));
  if (ground_truth != nullptr) {
    report.dice_before = dice(input, *ground_truth);
    report.dice_after = dice(refined, *ground_truth);
    report.dice_expectation = dice(threshold(maps.expectation, 0.5), *ground_truth);
    if (*report.dice_expectation > 0.0) {
      report.rel_imp = relative_improvement(*report.dice_after, *report.dice_expectation);
    }
  }
  return {std::move(refined), std::move(report)};
}

double relative_improvement(double gcn_dsc, double expectation_dsc) {
  if (!(expectation_dsc > 0.0)) {
    throw std::domain_error("relative improvement undefined for expectation dice " +
                            std::to_string(expectation_dsc));
  }
  return (gcn_dsc - expectation_dsc) / expectation_dsc * 100.0;
}

nlohmann::ordered_json config_to_json(const RefineConfig& c) {
  nlohmann::ordered_json j;
  j["tau"] = c.tau;
  j["k"] = c.k;
  j["dilation_radius"] = c.dilation_radius;
  j["lambda"] = c.lambda;
  j["sigma1"] = c.sigma1;
  j["sigma2"] = c.sigma2;
  j["hidden_units"] = kHiddenUnits;
  j["epochs"] = c.train.epochs;
  j["learning_rate"] = c.train.learning_rate;
  j["adam_beta1"] = c.train.adam_beta1;
  j["adam_beta2"] = c.train.adam_beta2;
  j["adam_eps"] = c.train.adam_eps;
  j["loss"] = "binary-cross-entropy";
  j["optimizer"] = "adam";
  j["apply_lcc_to_input"] = c.apply_lcc_to_input;
  j["replace_policy"] = to_string(c.replace_policy);
  return j;
}

nlohmann::ordered_json report_to_json(const RefineReport& r) {
  nlohmann::ordered_json j;
  j["refined"] = r.refined;
  j["passes"] = r.passes;
  j["uncertain_voxels"] = r.uncertain_voxels;
  j["roi_voxels"] = r.roi_voxels;
  j["node_count"] = r.node_count;
  j["labeled_count"] = r.labeled_count;
  j["unlabeled_count"] = r.unlabeled_count;
  if (r.dice_before) {
    nlohmann::ordered_json m;
    m["dice_before"] = *r.dice_before;
    m["dice_after"] = *r.dice_after;
    m["dice_expectation"] = *r.dice_expectation;
    if (r.rel_imp) m["rel_imp"] = *r.rel_imp;
    j["metrics"] = m;
  }
  j["config"] = config_to_json(r.config);
  j["seeds"] = {{"init_seed", r.config.train.init_seed}, {"edge_seed", r.config.edge_seed}};
  j["loss_curve"] = r.loss_curve;
  j["warnings"] = r.warnings;
  return j;
}

std::vector<SweepRow> sweep_tau(const Volume3& intensity, const PassStack& passes,
                                const Volume3& prediction, const Volume3& ground_truth,
                                std::span<const double> taus, const RefineConfig& config) {
  if (taus.empty()) throw std::invalid_argument("sweep_tau: empty tau list");
  for (double tau : taus) {
    RefineConfig c = config;
    c.tau = tau;
    c.validate();
  }
  require_same_geometry(intensity, passes.front(), "sweep_tau: passes vs intensity");
  const auto maps = analyze_uncertainty(passes, taus.front());

  std::vector<SweepRow> rows;
  rows.reserve(taus.size());
  for (double tau : taus) {
    RefineConfig c = config;
    c.tau = tau;
    const auto result = refine_with_maps(intensity, maps, passes.size(), prediction, c, &ground_truth);
    const auto& r = result.report;
    rows.push_back({tau, *r.dice_before, *r.dice_after, r.uncertain_voxels, r.node_count});
  }
  return rows;
}

void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out) {
  out << "tau,dice_before,dice_after,uncertain_voxels,node_count\n";
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(10);
  for (const auto& row : rows) {
    out << row.tau << ',' << row.dice_before << ',' << row.dice_after << ','
        << row.uncertain_voxels << ',' << row.node_count << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace gcnrefine
