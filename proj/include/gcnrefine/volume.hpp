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

#ifndef GCNREFINE_VOLUME_HPP_
#define GCNREFINE_VOLUME_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gcnrefine {

// Thrown for malformed inputs: bad files, geometry mismatches, violated
// value-range invariants.
class VolumeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class VolumeKind { kIntensity, kProbability, kEntropy, kMask };

std::string_view to_string(VolumeKind kind);
VolumeKind parse_volume_kind(std::string_view name);

struct Dims {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;

  std::size_t voxel_count() const { return nx * ny * nz; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

struct Spacing {
  double sx = 1.0;
  double sy = 1.0;
  double sz = 1.0;

  friend bool operator==(const Spacing&, const Spacing&) = default;
};

struct Voxel {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t z = 0;

  friend bool operator==(const Voxel&, const Voxel&) = default;
};

// Dense 3-D scalar field stored x-fastest. Values are held in double
// precision in memory; the on-disk payload is float32.
//
// The constructor enforces the kind's value range, so a Volume3 that exists
// is always valid. There is no mutable element access: operations build a
// fresh data vector and construct a new volume from it.
class Volume3 {
 public:
  Volume3(Dims dims, Spacing spacing, VolumeKind kind, std::vector<double> data);

  static Volume3 filled(Dims dims, Spacing spacing, VolumeKind kind, double value);

  const Dims& dims() const { return dims_; }
  const Spacing& spacing() const { return spacing_; }
  VolumeKind kind() const { return kind_; }
  std::size_t size() const { return data_.size(); }
  std::span<const double> data() const { return data_; }

  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
    return x + dims_.nx * (y + dims_.ny * z);
  }
  Voxel voxel(std::size_t flat) const {
    return {flat % dims_.nx, (flat / dims_.nx) % dims_.ny, flat / (dims_.nx * dims_.ny)};
  }
  double at(std::size_t x, std::size_t y, std::size_t z) const { return data_[index(x, y, z)]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  bool same_geometry(const Volume3& other) const {
    return dims_ == other.dims_ && spacing_ == other.spacing_;
  }

  // Number of voxels with a nonzero value.
  std::size_t count_nonzero() const;

  // Same geometry and kind, new data.
  Volume3 with_data(std::vector<double> data) const { return with_data(kind_, std::move(data)); }
  Volume3 with_data(VolumeKind kind, std::vector<double> data) const {
    return Volume3(dims_, spacing_, kind, std::move(data));
  }

  friend bool operator==(const Volume3&, const Volume3&) = default;

 private:
  Dims dims_;
  Spacing spacing_;
  VolumeKind kind_;
  std::vector<double> data_;
};

// Throws VolumeError naming `what` when the two volumes differ in geometry.
void require_same_geometry(const Volume3& a, const Volume3& b, std::string_view what);

// Ordered stochastic prediction passes sharing one geometry.
class PassStack {
 public:
  explicit PassStack(std::vector<Volume3> passes);

  std::size_t size() const { return passes_.size(); }
  const Volume3& operator[](std::size_t t) const { return passes_[t]; }
  const std::vector<Volume3>& passes() const { return passes_; }
  const Volume3& front() const { return passes_.front(); }

 private:
  std::vector<Volume3> passes_;
};

// Native on-disk format: `<name>.json` header plus `<name>.raw` payload of
// little-endian float32 values, x fastest. `path` is the header path; the
// payload path is derived by replacing the extension with `.raw`.
Volume3 load_volume(const std::filesystem::path& path);
void save_volume(const Volume3& v, const std::filesystem::path& path);
std::filesystem::path payload_path(const std::filesystem::path& header_path);

// out(x) = 1 iff v(x) > t.
Volume3 threshold(const Volume3& v, double t);

// Repeated 6-connected dilation, `radius` passes.
Volume3 dilate(const Volume3& mask, int radius);

// Keeps the largest 26-connected foreground component. Ties go to the
// component whose first voxel in scan order has the smallest flat index.
Volume3 largest_connected_component(const Volume3& mask);

// 2|A∩B| / (|A|+|B|); 1 when both are empty.
double dice(const Volume3& a, const Volume3& b);

// Voxelwise union of two masks.
Volume3 mask_union(const Volume3& a, const Volume3& b);

}  // namespace gcnrefine

#endif  // GCNREFINE_VOLUME_HPP_
