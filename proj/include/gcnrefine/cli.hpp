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

#ifndef GCNREFINE_CLI_HPP_
#define GCNREFINE_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gcnrefine/manifest.hpp"
#include "gcnrefine/phantom.hpp"
#include "gcnrefine/pipeline.hpp"

namespace gcnrefine::cli {

// Output file names written into the output directory.
inline constexpr const char* kExpectationFile = "expectation.json";
inline constexpr const char* kEntropyFile = "entropy.json";
inline constexpr const char* kRefinedFile = "refined.json";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kManifestFile = "manifest.json";

void cmd_aggregate(const Manifest& manifest, const std::filesystem::path& out_dir);

struct RefineExtras {
  bool dump_graph = false;   // edges.txt + nodes.txt
  bool loss_csv = false;     // loss.csv
  bool save_params = false;  // params.json + params.raw
};

RefineResult cmd_refine(const Manifest& manifest, const RefineConfig& config,
                        const std::filesystem::path& out_dir, const RefineExtras& extras = {});

struct EvalResult {
  double dice;
  std::optional<double> rel_imp;
};

EvalResult cmd_eval(const std::filesystem::path& a, const std::filesystem::path& b,
                    std::optional<double> expectation_dsc);

// Writes intensity, ground truth, prediction, T passes and a manifest.
Manifest cmd_synth(std::uint64_t seed, const PhantomParams& params,
                   const std::filesystem::path& out_dir);

std::vector<SweepRow> cmd_sweep_tau(const Manifest& manifest, const std::vector<double>& taus,
                                    const RefineConfig& config);

// Full command-line entry point; `args` excludes the program name. Returns
// the process exit code. Failures print one `error: ...` line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gcnrefine::cli

#endif  // GCNREFINE_CLI_HPP_
