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

#ifndef GCNREFINE_MANIFEST_HPP_
#define GCNREFINE_MANIFEST_HPP_

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gcnrefine/volume.hpp"

namespace gcnrefine {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON manifest describing one case:
//
//   {
//     "passes":       ["pass_000.json", ...],   // required, non-empty
//     "intensity":    "intensity.json",         // required
//     "prediction":   "prediction.json",        // required
//     "ground_truth": "ground_truth.json",      // optional
//     "output_dir":   "out"                     // required
//   }
//
// Relative paths resolve against the manifest's own directory.
struct Manifest {
  std::vector<std::filesystem::path> passes;
  std::filesystem::path intensity;
  std::filesystem::path prediction;
  std::optional<std::filesystem::path> ground_truth;
  std::filesystem::path output_dir;
};

// Parses and resolves paths; does not touch the referenced volumes.
// `require_volumes` false allows the intensity/prediction fields to be
// absent (used by `aggregate`, which only needs passes).
Manifest read_manifest(const std::filesystem::path& path, bool require_volumes = true);

// Writes paths relative to the manifest directory when they live under it.
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

struct CaseVolumes {
  Volume3 intensity;
  Volume3 prediction;
  PassStack passes;
  std::optional<Volume3> ground_truth;
};

PassStack load_passes(const Manifest& manifest);

// Loads and geometry-checks every volume. Errors name the manifest field.
CaseVolumes load_case(const Manifest& manifest);

}  // namespace gcnrefine

#endif  // GCNREFINE_MANIFEST_HPP_
