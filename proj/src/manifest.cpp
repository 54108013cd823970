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

#include "gcnrefine/manifest.hpp"

#include <fstream>
#include <string>

#include "json.hpp"

namespace gcnrefine {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string field_string(const nlohmann::json& j, const char* field) {
  if (!j.contains(field)) throw ManifestError(std::string("manifest field '") + field + "' is missing");
  if (!j[field].is_string()) {
    throw ManifestError(std::string("manifest field '") + field + "' must be a string");
  }
  return j[field].get<std::string>();
}

std::string relative_if_inside(const fs::path& p, const fs::path& base) {
  const auto rel = p.lexically_relative(base);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.generic_string();
}

Volume3 load_field(const fs::path& p, const std::string& field) {
  try {
    return load_volume(p);
  } catch (const VolumeError& e) {
    throw ManifestError("manifest field '" + field + "': " + e.what());
  }
}

}  // namespace

Manifest read_manifest(const fs::path& path, bool require_volumes) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError("malformed manifest " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ManifestError("manifest must be a JSON object");

  const fs::path base = path.parent_path();
  Manifest m;
  if (!j.contains("passes") || !j["passes"].is_array()) {
    throw ManifestError("manifest field 'passes' must be an array of paths");
  }
  for (const auto& p : j["passes"]) {
    if (!p.is_string()) throw ManifestError("manifest field 'passes' must contain strings");
    m.passes.push_back(resolve(base, p.get<std::string>()));
  }
  if (m.passes.empty()) throw ManifestError("manifest field 'passes' is empty");

  if (require_volumes || j.contains("intensity")) m.intensity = resolve(base, field_string(j, "intensity"));
  if (require_volumes || j.contains("prediction")) {
    m.prediction = resolve(base, field_string(j, "prediction"));
  }
  if (j.contains("ground_truth") && !j["ground_truth"].is_null()) {
    m.ground_truth = resolve(base, field_string(j, "ground_truth"));
  }
  m.output_dir = resolve(base, field_string(j, "output_dir"));
  return m;
}

void write_manifest(const Manifest& m, const fs::path& path) {
  const fs::path base = path.parent_path();
  nlohmann::ordered_json j;
  j["passes"] = nlohmann::ordered_json::array();
  for (const auto& p : m.passes) j["passes"].push_back(relative_if_inside(p, base));
  j["intensity"] = relative_if_inside(m.intensity, base);
  j["prediction"] = relative_if_inside(m.prediction, base);
  if (m.ground_truth) j["ground_truth"] = relative_if_inside(*m.ground_truth, base);
  j["output_dir"] = relative_if_inside(m.output_dir, base);
  std::ofstream out(path);
  if (!out) throw ManifestError("cannot write manifest " + path.string());
  out << j.dump(2) << "\n";
}

PassStack load_passes(const Manifest& m) {
  std::vector<Volume3> passes;
  passes.reserve(m.passes.size());
  for (std::size_t t = 0; t < m.passes.size(); ++t) {
    passes.push_back(load_field(m.passes[t], "passes[" + std::to_string(t) + "]"));
  }
  try {
    return PassStack(std::move(passes));
  } catch (const VolumeError& e) {
    throw ManifestError(std::string("manifest field 'passes': ") + e.what());
  }
}

CaseVolumes load_case(const Manifest& m) {
  auto intensity = load_field(m.intensity, "intensity");
  auto prediction = load_field(m.prediction, "prediction");
  auto passes = load_passes(m);
  std::optional<Volume3> gt;
  if (m.ground_truth) gt = load_field(*m.ground_truth, "ground_truth");

  auto check = [&](const Volume3& v, const char* field) {
    if (!v.same_geometry(intensity)) {
      throw ManifestError(std::string("manifest field '") + field +
                          "': geometry differs from intensity");
    }
  };
  check(prediction, "prediction");
  check(passes.front(), "passes");
  if (gt) check(*gt, "ground_truth");
  if (prediction.kind() != VolumeKind::kMask) {
    throw ManifestError("manifest field 'prediction': volume kind must be mask");
  }
  if (gt && gt->kind() != VolumeKind::kMask) {
    throw ManifestError("manifest field 'ground_truth': volume kind must be mask");
  }
  return {std::move(intensity), std::move(prediction), std::move(passes), std::move(gt)};
}

}  // namespace gcnrefine
