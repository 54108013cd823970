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

#ifndef GCNREFINE_PHANTOM_HPP_
#define GCNREFINE_PHANTOM_HPP_

#include <cstdint>

#include "gcnrefine/volume.hpp"

namespace gcnrefine {

// Synthetic organ phantom with a simulated stochastic predictor.
//
// The organ is a union of ellipsoids. The deterministic prediction corrupts
// it with attached false-positive blobs, false-negative notches and shifted
// boundary patches. Each stochastic pass follows the prediction inside a
// corrupted region with a per-region probability and the ground truth
// otherwise, and jitters the true boundary, so disagreement concentrates on
// the boundary and on the errors. Passes are hard 0/1 masks.
struct PhantomParams {
  Dims size{48, 48, 48};
  int passes = 20;
  double organ_intensity = 1.0;
  double background_intensity = 0.0;
  double intensity_noise = 0.35;   // Gaussian sd
  double boundary_jitter = 0.6;    // per-pass boundary noise sd, voxels
  double vote_min = 0.3;           // per-region probability a pass repeats
  double vote_max = 0.6;           // the prediction's error
  double dice_min = 0.65;          // accepted Dice band of the prediction
  double dice_max = 0.88;
};

struct Phantom {
  Volume3 intensity;
  Volume3 ground_truth;
  Volume3 prediction;
  PassStack passes;
};

// Throws VolumeError when any dimension is below 24 or passes < 1.
Phantom synth_phantom(std::uint64_t seed, const PhantomParams& params = {});

}  // namespace gcnrefine

#endif  // GCNREFINE_PHANTOM_HPP_
