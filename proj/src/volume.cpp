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

#include "gcnrefine/volume.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace gcnrefine {

namespace {

constexpr std::array<std::string_view, 4> kKindNames = {"intensity", "probability", "entropy",
                                                         "mask"};

std::string describe(const Dims& d) {
  std::ostringstream os;
  os << "[" << d.nx << "," << d.ny << "," << d.nz << "]";
  return os.str();
}

void validate_values(VolumeKind kind, std::span<const double> data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double v = data[i];
    if (!std::isfinite(v)) {
      throw VolumeError("non-finite value at voxel " + std::to_string(i));
    }
    switch (kind) {
      case VolumeKind::kIntensity:
        break;
      case VolumeKind::kProbability:
      case VolumeKind::kEntropy:
        if (v < 0.0 || v > 1.0) {
          throw VolumeError(std::string(to_string(kind)) + " value out of [0,1] at voxel " +
                            std::to_string(i));
        }
        break;
      case VolumeKind::kMask:
        if (v != 0.0 && v != 1.0) {
          throw VolumeError("mask value not in {0,1} at voxel " + std::to_string(i));
        }
        break;
    }
  }
}

void require_kind(const Volume3& v, VolumeKind kind, std::string_view op) {
  if (v.kind() != kind) {
    throw VolumeError(std::string(op) + ": expected " + std::string(to_string(kind)) +
                      " volume, got " + std::string(to_string(v.kind())));
  }
}

std::uint32_t to_little_endian(std::uint32_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) | ((bits >> 8) & 0xFF00u) |
           (bits >> 24);
  }
  return bits;
}

}  // namespace

std::string_view to_string(VolumeKind kind) { return kKindNames[static_cast<int>(kind)]; }

VolumeKind parse_volume_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<VolumeKind>(i);
  }
  throw VolumeError("invalid volume kind '" + std::string(name) + "'");
}

Volume3::Volume3(Dims dims, Spacing spacing, VolumeKind kind, std::vector<double> data)
    : dims_(dims), spacing_(spacing), kind_(kind), data_(std::move(data)) {
  if (dims_.nx == 0 || dims_.ny == 0 || dims_.nz == 0) {
    throw VolumeError("volume dims must be positive, got " + describe(dims_));
  }
  if (!(spacing_.sx > 0.0 && spacing_.sy > 0.0 && spacing_.sz > 0.0) ||
      !std::isfinite(spacing_.sx) || !std::isfinite(spacing_.sy) || !std::isfinite(spacing_.sz)) {
    throw VolumeError("volume spacing must be positive and finite");
  }
  if (data_.size() != dims_.voxel_count()) {
    throw VolumeError("data length " + std::to_string(data_.size()) + " does not match dims " +
                      describe(dims_));
  }
  validate_values(kind_, data_);
}

Volume3 Volume3::filled(Dims dims, Spacing spacing, VolumeKind kind, double value) {
  return Volume3(dims, spacing, kind, std::vector<double>(dims.voxel_count(), value));
}

std::size_t Volume3::count_nonzero() const {
  return static_cast<std::size_t>(
      std::count_if(data_.begin(), data_.end(), [](double v) { return v != 0.0; }));
}

void require_same_geometry(const Volume3& a, const Volume3& b, std::string_view what) {
  if (!a.same_geometry(b)) {
    throw VolumeError(std::string(what) + ": geometry mismatch (" + describe(a.dims()) + " vs " +
                      describe(b.dims()) + ")");
  }
}

PassStack::PassStack(std::vector<Volume3> passes) : passes_(std::move(passes)) {
  if (passes_.empty()) throw VolumeError("pass stack is empty");
  for (std::size_t t = 0; t < passes_.size(); ++t) {
    const auto kind = passes_[t].kind();
    if (kind != VolumeKind::kProbability && kind != VolumeKind::kMask) {
      throw VolumeError("pass " + std::to_string(t) + " must be a probability or mask volume");
    }
    require_same_geometry(passes_.front(), passes_[t], "pass " + std::to_string(t));
  }
}

// ---------------------------------------------------------------------------
// File I/O

std::filesystem::path payload_path(const std::filesystem::path& header_path) {
  auto raw = header_path;
  raw.replace_extension(".raw");
  return raw;
}

Volume3 load_volume(const std::filesystem::path& path) {
  std::ifstream header_in(path);
  if (!header_in) throw VolumeError("cannot open volume header " + path.string());

  nlohmann::json header;
  try {
    header_in >> header;
  } catch (const nlohmann::json::exception& e) {
    throw VolumeError("malformed volume header " + path.string() + ": " + e.what());
  }

  Dims dims;
  Spacing spacing;
  VolumeKind kind;
  try {
    const auto d = header.at("dims").get<std::vector<long long>>();
    const auto s = header.at("spacing").get<std::vector<double>>();
    if (d.size() != 3 || s.size() != 3) throw VolumeError("dims and spacing need 3 entries");
    for (auto n : d) {
      if (n <= 0) throw VolumeError("dims must be positive");
    }
    dims = {static_cast<std::size_t>(d[0]), static_cast<std::size_t>(d[1]),
            static_cast<std::size_t>(d[2])};
    spacing = {s[0], s[1], s[2]};
    if (header.at("dtype").get<std::string>() != "f32") throw VolumeError("dtype must be f32");
    if (header.at("order").get<std::string>() != "x-fastest") {
      throw VolumeError("order must be x-fastest");
    }
    kind = parse_volume_kind(header.at("kind").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw VolumeError("invalid volume header " + path.string() + ": " + e.what());
  } catch (const VolumeError& e) {
    throw VolumeError("invalid volume header " + path.string() + ": " + e.what());
  }

  const auto raw_path = payload_path(path);
  std::ifstream raw_in(raw_path, std::ios::binary | std::ios::ate);
  if (!raw_in) throw VolumeError("cannot open volume payload " + raw_path.string());
  const auto bytes = static_cast<std::size_t>(raw_in.tellg());
  const std::size_t n = dims.voxel_count();
  if (bytes != n * sizeof(float)) {
    throw VolumeError("payload size mismatch for " + raw_path.string() + ": expected " +
                      std::to_string(n * sizeof(float)) + " bytes, found " +
                      std::to_string(bytes));
  }
  raw_in.seekg(0);
  std::vector<std::uint32_t> words(n);
  raw_in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(bytes));
  if (!raw_in) throw VolumeError("short read on " + raw_path.string());

  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float f = std::bit_cast<float>(to_little_endian(words[i]));
    if (std::isnan(f)) {
      throw VolumeError("NaN in payload " + raw_path.string() + " at voxel " + std::to_string(i));
    }
    data[i] = f;
  }
  try {
    return Volume3(dims, spacing, kind, std::move(data));
  } catch (const VolumeError& e) {
    throw VolumeError(path.string() + ": " + e.what());
  }
}

void save_volume(const Volume3& v, const std::filesystem::path& path) {
  const auto& d = v.dims();
  const auto& s = v.spacing();
  nlohmann::ordered_json header;
  header["dims"] = {d.nx, d.ny, d.nz};
  header["spacing"] = {s.sx, s.sy, s.sz};
  header["dtype"] = "f32";
  header["order"] = "x-fastest";
  header["kind"] = to_string(v.kind());

  std::ofstream header_out(path, std::ios::trunc);
  if (!header_out) throw VolumeError("cannot write volume header " + path.string());
  header_out << header.dump(2) << "\n";
  if (!header_out) throw VolumeError("failed writing " + path.string());

  std::vector<std::uint32_t> words(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    words[i] = to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(v[i])));
  }
  const auto raw_path = payload_path(path);
  std::ofstream raw_out(raw_path, std::ios::binary | std::ios::trunc);
  if (!raw_out) throw VolumeError("cannot write volume payload " + raw_path.string());
  raw_out.write(reinterpret_cast<const char*>(words.data()),
                static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
  if (!raw_out) throw VolumeError("failed writing " + raw_path.string());
}

// ---------------------------------------------------------------------------
// Morphology and metrics

Volume3 threshold(const Volume3& v, double t) {
  if (v.kind() != VolumeKind::kProbability && v.kind() != VolumeKind::kEntropy) {
    throw VolumeError("threshold: expected probability or entropy volume, got " +
                      std::string(to_string(v.kind())));
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > t ? 1.0 : 0.0;
  return v.with_data(VolumeKind::kMask, std::move(out));
}

Volume3 dilate(const Volume3& mask, int radius) {
  require_kind(mask, VolumeKind::kMask, "dilate");
  if (radius < 1) throw VolumeError("dilate: radius must be positive");

  // `radius` passes of the 6-connected element reach exactly the voxels within
  // L1 distance `radius`, which a multi-source BFS visits level by level.
  const auto& d = mask.dims();
  constexpr int kUnreached = std::numeric_limits<int>::max();
  std::vector<int> dist(mask.size(), kUnreached);
  std::deque<std::size_t> frontier;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0.0) {
      dist[i] = 0;
      frontier.push_back(i);
    }
  }
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop_front();
    if (dist[i] == radius) continue;
    const Voxel p = mask.voxel(i);
    auto visit = [&](std::size_t j) {
      if (dist[j] == kUnreached) {
        dist[j] = dist[i] + 1;
        frontier.push_back(j);
      }
    };
    if (p.x > 0) visit(i - 1);
    if (p.x + 1 < d.nx) visit(i + 1);
    if (p.y > 0) visit(i - d.nx);
    if (p.y + 1 < d.ny) visit(i + d.nx);
    if (p.z > 0) visit(i - d.nx * d.ny);
    if (p.z + 1 < d.nz) visit(i + d.nx * d.ny);
  }

  std::vector<double> out(mask.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dist[i] <= radius ? 1.0 : 0.0;
  return mask.with_data(std::move(out));
}

Volume3 largest_connected_component(const Volume3& mask) {
  require_kind(mask, VolumeKind::kMask, "largest_connected_component");
  const auto& d = mask.dims();

  // Components are discovered in scan order, so the first one found with the
  // maximum size is the tie-break winner.
  std::vector<std::int32_t> label(mask.size(), -1);
  std::vector<std::size_t> stack;
  std::int32_t best_label = -1;
  std::size_t best_size = 0;
  std::int32_t next_label = 0;

  for (std::size_t seed = 0; seed < mask.size(); ++seed) {
    if (mask[seed] == 0.0 || label[seed] >= 0) continue;
    const std::int32_t current = next_label++;
    std::size_t size = 0;
    label[seed] = current;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      ++size;
      const Voxel p = mask.voxel(i);
      for (int dz = -1; dz <= 1; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0 && dz == 0) continue;
            const auto x = static_cast<std::ptrdiff_t>(p.x) + dx;
            const auto y = static_cast<std::ptrdiff_t>(p.y) + dy;
            const auto z = static_cast<std::ptrdiff_t>(p.z) + dz;
            if (x < 0 || y < 0 || z < 0 || x >= static_cast<std::ptrdiff_t>(d.nx) ||
                y >= static_cast<std::ptrdiff_t>(d.ny) || z >= static_cast<std::ptrdiff_t>(d.nz)) {
              continue;
            }
            const std::size_t j = mask.index(x, y, z);
            if (mask[j] != 0.0 && label[j] < 0) {
              label[j] = current;
              stack.push_back(j);
            }
          }
        }
      }
    }
    if (size > best_size) {
      best_size = size;
      best_label = current;
    }
  }

  std::vector<double> out(mask.size(), 0.0);
  if (best_label >= 0) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = label[i] == best_label ? 1.0 : 0.0;
  }
  return mask.with_data(std::move(out));
}

double dice(const Volume3& a, const Volume3& b) {
  require_kind(a, VolumeKind::kMask, "dice");
  require_kind(b, VolumeKind::kMask, "dice");
  require_same_geometry(a, b, "dice");
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool in_a = a[i] != 0.0;
    const bool in_b = b[i] != 0.0;
    na += in_a;
    nb += in_b;
    both += in_a && in_b;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

Volume3 mask_union(const Volume3& a, const Volume3& b) {
  require_kind(a, VolumeKind::kMask, "mask_union");
  require_kind(b, VolumeKind::kMask, "mask_union");
  require_same_geometry(a, b, "mask_union");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (a[i] != 0.0 || b[i] != 0.0) ? 1.0 : 0.0;
  return a.with_data(std::move(out));
}

}  // namespace gcnrefine
