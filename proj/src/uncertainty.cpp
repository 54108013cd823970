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

#include "gcnrefine/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gcnrefine {

Volume3 expectation(const PassStack& stack) {
  const auto& first = stack.front();
  const std::size_t n = first.size();
  const std::size_t t_count = stack.size();
  std::vector<double> out(n);
  std::vector<double> values(t_count);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < t_count; ++t) values[t] = stack[t][i];
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    out[i] = std::clamp(sum / static_cast<double>(t_count), 0.0, 1.0);
  }
  return first.with_data(VolumeKind::kProbability, std::move(out));
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("binary_entropy: p=" + std::to_string(p) + " outside [0,1]");
  }
  if (p == 0.0 || p == 1.0) return 0.0;
  const double q = 1.0 - p;
  return std::min(1.0, -p * std::log2(p) - q * std::log2(q));
}

Volume3 entropy_map(const Volume3& expectation) {
  if (expectation.kind() != VolumeKind::kProbability) {
    throw VolumeError("entropy_map: expected probability volume, got " +
                      std::string(to_string(expectation.kind())));
  }
  std::vector<double> out(expectation.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = binary_entropy(expectation[i]);
  return expectation.with_data(VolumeKind::kEntropy, std::move(out));
}

Volume3 uncertain_mask(const Volume3& entropy, double tau) { return threshold(entropy, tau); }

UncertaintyMaps analyze_uncertainty(const PassStack& stack, double tau) {
  auto e = expectation(stack);
  auto h = entropy_map(e);
  auto u = uncertain_mask(h, tau);
  return {std::move(e), std::move(h), std::move(u), tau};
}

UncertaintyMaps with_tau(const UncertaintyMaps& maps, double tau) {
  return {maps.expectation, maps.entropy, uncertain_mask(maps.entropy, tau), tau};
}

}  // namespace gcnrefine
