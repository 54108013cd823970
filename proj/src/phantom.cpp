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

#include "gcnrefine/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

namespace gcnrefine {

namespace {

using Vec3 = std::array<double, 3>;

constexpr int kMaxCorruptionAttempts = 64;

struct Ellipsoid {
  Vec3 center;
  Vec3 radii;

  // Positive inside; roughly the depth in voxels near the surface.
  double depth(const Vec3& p) const {
    double f = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double d = (p[a] - center[a]) / radii[a];
      f += d * d;
    }
    const double r_min = std::min({radii[0], radii[1], radii[2]});
    return r_min * (1.0 - std::sqrt(f));
  }
};

enum class Corruption { kFalsePositive, kFalseNegative, kShift };

struct Region {
  Corruption type;
  Vec3 center;
  double radius;     // sphere radius, or bump width for kShift
  double amplitude;  // boundary displacement for kShift
  double vote;       // probability a pass repeats the prediction here
};

double dist2(const Vec3& a, const Vec3& b) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    Vec3 v{n(rng), n(rng), n(rng)};
    const double len = std::sqrt(dist2(v, {0, 0, 0}));
    if (len > 1e-6) return {v[0] / len, v[1] / len, v[2] / len};
  }
}

}  // namespace

Phantom synth_phantom(std::uint64_t seed, const PhantomParams& params) {
  const Dims dims = params.size;
  if (dims.nx < 24 || dims.ny < 24 || dims.nz < 24) {
    throw VolumeError("synth_phantom: every dimension must be >= 24");
  }
  if (params.passes < 1) throw VolumeError("synth_phantom: need at least one pass");

  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  const double scale = static_cast<double>(std::min({dims.nx, dims.ny, dims.nz}));
  const double unit = scale / 48.0;

  std::vector<Ellipsoid> organ;
  const Vec3 c0{dims.nx / 2.0 + uniform(-2, 2), dims.ny / 2.0 + uniform(-2, 2),
                dims.nz / 2.0 + uniform(-2, 2)};
  const Vec3 r0{scale * uniform(0.17, 0.24), scale * uniform(0.17, 0.24),
                scale * uniform(0.17, 0.24)};
  organ.push_back({c0, r0});
  const double r_mean = (r0[0] + r0[1] + r0[2]) / 3.0;
  for (int lobes = pick(1, 2); lobes > 0; --lobes) {
    const Vec3 u = random_direction(rng);
    const double off = uniform(0.4, 0.7) * r_mean;
    organ.push_back({{c0[0] + u[0] * off, c0[1] + u[1] * off, c0[2] + u[2] * off},
                     {r0[0] * uniform(0.5, 0.75), r0[1] * uniform(0.5, 0.75),
                      r0[2] * uniform(0.5, 0.75)}});
  }
  auto depth = [&](const Vec3& p) {
    double d = -1e300;
    for (const auto& e : organ) d = std::max(d, e.depth(p));
    return d;
  };
  auto surface_point = [&](const Vec3& u) {
    double t = 0.0;
    Vec3 p = c0;
    while (depth(p) > 0.0) {
      t += 0.25;
      p = {c0[0] + u[0] * t, c0[1] + u[1] * t, c0[2] + u[2] * t};
    }
    return p;
  };

  const std::size_t n = dims.voxel_count();
  std::vector<double> depth_map(n), gt(n);
  std::size_t gt_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Voxel v{i % dims.nx, (i / dims.nx) % dims.ny, i / (dims.nx * dims.ny)};
    depth_map[i] = depth({static_cast<double>(v.x), static_cast<double>(v.y), static_cast<double>(v.z)});
    gt[i] = depth_map[i] > 0.0 ? 1.0 : 0.0;
    gt_count += depth_map[i] > 0.0;
  }

  // Corruptions are redrawn until the prediction's Dice falls inside the
  // target band, so every seed yields a comparably damaged prediction.
  std::vector<Region> regions;
  std::vector<double> pred(n);
  std::vector<int> error_region(n, -1);
  for (int attempt = 0; attempt < kMaxCorruptionAttempts; ++attempt) {
    regions.clear();
    auto add_sphere = [&](Corruption type, double r_lo, double r_hi, double push) {
      const Vec3 u = random_direction(rng);
      const Vec3 p = surface_point(u);
      const double r = r_mean * uniform(r_lo, r_hi);
      const double off = push * r;
      regions.push_back({type,
                         {p[0] + u[0] * off, p[1] + u[1] * off, p[2] + u[2] * off},
                         r,
                         0.0,
                         uniform(params.vote_min, params.vote_max)});
    };
    for (int k = pick(1, 2); k > 0; --k) add_sphere(Corruption::kFalsePositive, 0.45, 0.7, 0.35);
    for (int k = pick(1, 2); k > 0; --k) add_sphere(Corruption::kFalseNegative, 0.45, 0.65, -0.2);
    for (int k = 2; k > 0; --k) {
      const Vec3 p = surface_point(random_direction(rng));
      const double sign = pick(0, 1) ? 1.0 : -1.0;
      regions.push_back({Corruption::kShift, p, uniform(3.0, 5.0) * unit,
                         sign * uniform(1.5, 2.5) * unit,
                         uniform(params.vote_min, params.vote_max)});
    }

    std::size_t pred_count = 0, overlap = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Voxel v{i % dims.nx, (i / dims.nx) % dims.ny, i / (dims.nx * dims.ny)};
      const Vec3 p{static_cast<double>(v.x), static_cast<double>(v.y), static_cast<double>(v.z)};
      double shifted = depth_map[i];
      int region = -1;
      double dominant_shift = 0.0;
      for (std::size_t r = 0; r < regions.size(); ++r) {
        if (regions[r].type != Corruption::kShift) continue;
        const double w = regions[r].radius;
        const double s = regions[r].amplitude * std::exp(-dist2(p, regions[r].center) / (2 * w * w));
        shifted += s;
        if (std::abs(s) > std::abs(dominant_shift)) {
          dominant_shift = s;
          region = static_cast<int>(r);
        }
      }
      double label = shifted > 0.0 ? 1.0 : 0.0;
      for (std::size_t r = 0; r < regions.size(); ++r) {
        const auto& reg = regions[r];
        if (reg.type == Corruption::kShift) continue;
        if (dist2(p, reg.center) > reg.radius * reg.radius) continue;
        label = reg.type == Corruption::kFalsePositive ? 1.0 : 0.0;
        region = static_cast<int>(r);
      }
      pred[i] = label;
      error_region[i] = label != gt[i] ? region : -1;
      pred_count += label != 0.0;
      overlap += label != 0.0 && gt[i] != 0.0;
    }
    const double d = 2.0 * static_cast<double>(overlap) / static_cast<double>(pred_count + gt_count);
    if (d >= params.dice_min && d <= params.dice_max) break;
  }

  std::normal_distribution<double> noise(0.0, params.intensity_noise);
  std::vector<double> intensity(n);
  for (std::size_t i = 0; i < n; ++i) {
    intensity[i] = (gt[i] != 0.0 ? params.organ_intensity : params.background_intensity) + noise(rng);
  }

  std::normal_distribution<double> jitter(0.0, params.boundary_jitter);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const double jitter_reach = 6.0 * params.boundary_jitter;
  std::vector<Volume3> passes;
  passes.reserve(static_cast<std::size_t>(params.passes));
  const Spacing spacing{1.0, 1.0, 1.0};
  for (int t = 0; t < params.passes; ++t) {
    std::vector<double> pass(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (error_region[i] >= 0) {
        pass[i] = coin(rng) < regions[static_cast<std::size_t>(error_region[i])].vote ? pred[i] : gt[i];
      } else if (std::abs(depth_map[i]) < jitter_reach) {
        pass[i] = depth_map[i] + jitter(rng) > 0.0 ? 1.0 : 0.0;
      } else {
        pass[i] = gt[i];
      }
    }
    passes.emplace_back(dims, spacing, VolumeKind::kMask, std::move(pass));
  }

  return {Volume3(dims, spacing, VolumeKind::kIntensity, std::move(intensity)),
          Volume3(dims, spacing, VolumeKind::kMask, std::move(gt)),
          Volume3(dims, spacing, VolumeKind::kMask, std::move(pred)),
          PassStack(std::move(passes))};
}

}  // namespace gcnrefine
