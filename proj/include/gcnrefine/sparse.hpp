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

#ifndef GCNREFINE_SPARSE_HPP_
#define GCNREFINE_SPARSE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gcnrefine {

struct WeightedEdge {
  std::uint32_t i;
  std::uint32_t j;
  double weight;
};

// Square compressed-sparse-row matrix with ascending column indices per row.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  std::size_t nnz() const { return col.size(); }
  std::size_t row_size(std::size_t r) const { return row_ptr[r + 1] - row_ptr[r]; }

  // Entry (r, c), or 0 when structurally absent.
  double at(std::size_t r, std::size_t c) const;
  bool contains(std::size_t r, std::size_t c) const;

  // y = A x for a row-major dense x of shape n x width. Rows accumulate in
  // column order, so the result is deterministic.
  void multiply(std::span<const double> x, std::size_t width, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x, std::size_t width) const;

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;
};

// Symmetric adjacency from undirected edges (each listed once, i != j).
// Throws std::invalid_argument on self-loops, duplicates, or out-of-range ids.
CsrMatrix symmetric_from_edges(std::size_t n, std::span<const WeightedEdge> edges);

}  // namespace gcnrefine

#endif  // GCNREFINE_SPARSE_HPP_
