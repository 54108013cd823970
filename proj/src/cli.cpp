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

#include "gcnrefine/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace gcnrefine::cli {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string one_line(std::string msg) {
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  std::replace(msg.begin(), msg.end(), '\r', ' ');
  return msg;
}

void add_refine_flags(CLI::App& cmd, RefineConfig& c, bool& no_lcc, bool& uncertain_only) {
  cmd.add_option("--tau", c.tau, "uncertainty threshold on base-2 entropy")->capture_default_str();
  cmd.add_option("--k", c.k, "random long-range edges per node")->capture_default_str();
  cmd.add_option("--dilate", c.dilation_radius, "ROI dilation radius (6-connected passes)")
      ->capture_default_str();
  cmd.add_option("--lambda", c.lambda, "weight of the diversity term")->capture_default_str();
  cmd.add_option("--sigma1", c.sigma1, "intensity kernel width")->capture_default_str();
  cmd.add_option("--sigma2", c.sigma2, "spatial kernel width (voxels^2)")->capture_default_str();
  cmd.add_option("--epochs", c.train.epochs, "training epochs")->capture_default_str();
  cmd.add_option("--lr", c.train.learning_rate, "Adam learning rate")->capture_default_str();
  cmd.add_option("--seed", c.train.init_seed, "weight initialization seed")->capture_default_str();
  cmd.add_option("--edge-seed", c.edge_seed, "random edge sampler seed")->capture_default_str();
  cmd.add_flag("--no-lcc", no_lcc, "skip largest-component filtering of the prediction");
  cmd.add_flag("--uncertain-only", uncertain_only,
               "replace only uncertain voxels instead of the whole ROI");
}

void apply_flags(RefineConfig& c, bool no_lcc, bool uncertain_only) {
  c.apply_lcc_to_input = !no_lcc;
  c.replace_policy =
      uncertain_only ? ReplacePolicy::kUncertainOnly : ReplacePolicy::kFullReplacementInsideRoi;
}

}  // namespace

void cmd_aggregate(const Manifest& manifest, const fs::path& out_dir) {
  const auto passes = load_passes(manifest);
  const auto e = expectation(passes);
  const auto h = entropy_map(e);
  ensure_dir(out_dir);
  save_volume(e, out_dir / kExpectationFile);
  save_volume(h, out_dir / kEntropyFile);
}

RefineResult cmd_refine(const Manifest& manifest, const RefineConfig& config,
                        const fs::path& out_dir, const RefineExtras& extras) {
  config.validate();
  const auto vols = load_case(manifest);
  const auto maps = analyze_uncertainty(vols.passes, config.tau);
  RefineArtifacts artifacts;
  auto result = refine_with_maps(vols.intensity, maps, vols.passes.size(), vols.prediction, config,
                                 vols.ground_truth ? &*vols.ground_truth : nullptr, &artifacts);

  ensure_dir(out_dir);
  save_volume(result.refined, out_dir / kRefinedFile);
  write_text(out_dir / kReportFile, report_to_json(result.report).dump(2) + "\n");

  if (extras.loss_csv) write_loss_csv(result.report.loss_curve, out_dir / "loss.csv");
  if (extras.dump_graph && artifacts.graph) {
    write_graph_dump(*artifacts.graph, out_dir / "edges.txt", out_dir / "nodes.txt");
  }
  if (extras.save_params && artifacts.params) {
    save_params(*artifacts.params, out_dir / "params.json", config.train.init_seed,
                config.train.epochs);
  }
  return result;
}

EvalResult cmd_eval(const fs::path& a, const fs::path& b, std::optional<double> expectation_dsc) {
  const auto va = load_volume(a);
  const auto vb = load_volume(b);
  EvalResult r{dice(va, vb), std::nullopt};
  if (expectation_dsc) r.rel_imp = relative_improvement(r.dice, *expectation_dsc);
  return r;
}

Manifest cmd_synth(std::uint64_t seed, const PhantomParams& params, const fs::path& out_dir) {
  const auto ph = synth_phantom(seed, params);
  ensure_dir(out_dir);
  ensure_dir(out_dir / "passes");

  Manifest m;
  m.intensity = out_dir / "intensity.json";
  m.ground_truth = out_dir / "ground_truth.json";
  m.prediction = out_dir / "prediction.json";
  m.output_dir = out_dir / "results";
  save_volume(ph.intensity, m.intensity);
  save_volume(ph.ground_truth, *m.ground_truth);
  save_volume(ph.prediction, m.prediction);
  for (std::size_t t = 0; t < ph.passes.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "pass_%03zu.json", t);
    m.passes.push_back(out_dir / "passes" / name);
    save_volume(ph.passes[t], m.passes.back());
  }
  write_manifest(m, out_dir / kManifestFile);
  return m;
}

std::vector<SweepRow> cmd_sweep_tau(const Manifest& manifest, const std::vector<double>& taus,
                                    const RefineConfig& config) {
  if (taus.empty()) throw std::invalid_argument("--taus: empty tau list");
  for (double tau : taus) {
    if (!(tau > 0.0 && tau < 1.0)) {
      throw std::invalid_argument("--taus: tau=" + std::to_string(tau) + " outside (0,1)");
    }
  }
  const auto vols = load_case(manifest);
  if (!vols.ground_truth) throw ManifestError("manifest field 'ground_truth' is required for sweep-tau");
  return sweep_tau(vols.intensity, vols.passes, vols.prediction, *vols.ground_truth, taus, config);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Uncertainty-gated GCN refinement of binary volume segmentations", "gcnrefine"};
  app.require_subcommand(1);

  std::string manifest_path;
  std::string out_dir;

  auto* aggregate = app.add_subcommand("aggregate", "write expectation and entropy volumes");
  aggregate->add_option("--manifest", manifest_path, "case manifest (JSON)")->required();
  aggregate->add_option("--out", out_dir, "output directory (default: manifest output_dir)");

  RefineConfig refine_config;
  bool no_lcc = false;
  bool uncertain_only = false;
  RefineExtras extras;
  auto* refine_cmd = app.add_subcommand("refine", "refine the prediction; write volume + report");
  refine_cmd->add_option("--manifest", manifest_path, "case manifest (JSON)")->required();
  refine_cmd->add_option("--out", out_dir, "output directory (default: manifest output_dir)");
  add_refine_flags(*refine_cmd, refine_config, no_lcc, uncertain_only);
  refine_cmd->add_flag("--dump-graph", extras.dump_graph, "also write edges.txt and nodes.txt");
  refine_cmd->add_flag("--loss-csv", extras.loss_csv, "also write loss.csv");
  refine_cmd->add_flag("--save-params", extras.save_params, "also write a parameter checkpoint");

  std::string eval_a, eval_b;
  std::optional<double> expectation_dsc;
  auto* eval = app.add_subcommand("eval", "Dice between two masks");
  eval->add_option("a", eval_a, "first mask header")->required();
  eval->add_option("b", eval_b, "second mask header")->required();
  eval->add_option("--expectation-dsc", expectation_dsc,
                   "also report relative improvement over this Dice");

  std::uint64_t synth_seed = 0;
  std::size_t synth_size = 48;
  int synth_passes = 20;
  auto* synth = app.add_subcommand("synth", "write a synthetic phantom case");
  synth->add_option("--seed", synth_seed, "phantom seed")->capture_default_str();
  synth->add_option("--size", synth_size, "cube edge length (>= 24)")->capture_default_str();
  synth->add_option("--passes", synth_passes, "stochastic passes T")->capture_default_str();
  synth->add_option("--out", out_dir, "output directory")->required();

  RefineConfig sweep_config;
  bool sweep_no_lcc = false;
  bool sweep_uncertain_only = false;
  std::vector<double> taus{0.001, 0.3, 0.5, 0.8, 0.999};
  std::string csv_path;
  auto* sweep = app.add_subcommand("sweep-tau", "refine at several thresholds; CSV output");
  sweep->add_option("--manifest", manifest_path, "case manifest (JSON)")->required();
  sweep->add_option("--taus", taus, "comma-separated thresholds")->delimiter(',')->capture_default_str();
  sweep->add_option("--out", csv_path, "CSV path (default: stdout)");
  add_refine_flags(*sweep, sweep_config, sweep_no_lcc, sweep_uncertain_only);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    if (aggregate->parsed()) {
      const auto m = read_manifest(manifest_path, false);
      cmd_aggregate(m, out_dir.empty() ? m.output_dir : fs::path(out_dir));
    } else if (refine_cmd->parsed()) {
      apply_flags(refine_config, no_lcc, uncertain_only);
      const auto m = read_manifest(manifest_path);
      const auto result =
          cmd_refine(m, refine_config, out_dir.empty() ? m.output_dir : fs::path(out_dir), extras);
      for (const auto& w : result.report.warnings) err << "warning: " << one_line(w) << "\n";
    } else if (eval->parsed()) {
      const auto r = cmd_eval(eval_a, eval_b, expectation_dsc);
      nlohmann::ordered_json j;
      j["dice"] = r.dice;
      if (r.rel_imp) j["rel_imp"] = *r.rel_imp;
      out << j.dump() << "\n";
    } else if (synth->parsed()) {
      PhantomParams params;
      params.size = {synth_size, synth_size, synth_size};
      params.passes = synth_passes;
      cmd_synth(synth_seed, params, out_dir);
    } else if (sweep->parsed()) {
      apply_flags(sweep_config, sweep_no_lcc, sweep_uncertain_only);
      const auto m = read_manifest(manifest_path);
      const auto rows = cmd_sweep_tau(m, taus, sweep_config);
      if (csv_path.empty()) {
        write_sweep_csv(rows, out);
      } else {
        std::ostringstream csv;
        write_sweep_csv(rows, csv);
        write_text(csv_path, csv.str());
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace gcnrefine::cli
