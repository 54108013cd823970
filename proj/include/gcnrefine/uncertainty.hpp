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

#ifndef GCNREFINE_UNCERTAINTY_HPP_
#define GCNREFINE_UNCERTAINTY_HPP_

#include "gcnrefine/volume.hpp"

namespace gcnrefine {

struct UncertaintyMaps {
  Volume3 expectation;     // probability
  Volume3 entropy;         // entropy, base 2
  Volume3 uncertain_mask;  // entropy > tau
  double tau;
};

// Voxelwise mean over the passes. Each voxel's values are summed in sorted
// order, so the result does not depend on the pass order.
Volume3 expectation(const PassStack& stack);

// H(p) = -p log2 p - (1-p) log2 (1-p), with 0 log 0 = 0. Throws
// std::domain_error outside [0,1].
double binary_entropy(double p);

Volume3 entropy_map(const Volume3& expectation);

Volume3 uncertain_mask(const Volume3& entropy, double tau);

UncertaintyMaps analyze_uncertainty(const PassStack& stack, double tau);

// Recomputes only the mask for a new threshold.
UncertaintyMaps with_tau(const UncertaintyMaps& maps, double tau);

}  // namespace gcnrefine

#endif  // GCNREFINE_UNCERTAINTY_HPP_
