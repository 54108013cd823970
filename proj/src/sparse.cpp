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

#include "gcnrefine/sparse.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gcnrefine {

namespace {

std::ptrdiff_t find_entry(const CsrMatrix& m, std::size_t r, std::size_t c) {
  const auto begin = m.col.begin() + static_cast<std::ptrdiff_t>(m.row_ptr[r]);
  const auto end = m.col.begin() + static_cast<std::ptrdiff_t>(m.row_ptr[r + 1]);
  const auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(c));
  if (it == end || *it != c) return -1;
  return it - m.col.begin();
}

}  // namespace

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  const auto k = find_entry(*this, r, c);
  return k < 0 ? 0.0 : val[static_cast<std::size_t>(k)];
}

bool CsrMatrix::contains(std::size_t r, std::size_t c) const { return find_entry(*this, r, c) >= 0; }

void CsrMatrix::multiply(std::span<const double> x, std::size_t width, std::span<double> y) const {
  if (x.size() != n * width || y.size() != n * width) {
    throw std::invalid_argument("CsrMatrix::multiply: shape mismatch");
  }
  for (std::size_t r = 0; r < n; ++r) {
    double* out = y.data() + r * width;
    std::fill(out, out + width, 0.0);
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      const double a = val[k];
      const double* in = x.data() + static_cast<std::size_t>(col[k]) * width;
      for (std::size_t w = 0; w < width; ++w) out[w] += a * in[w];
    }
  }
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x, std::size_t width) const {
  std::vector<double> y(n * width);
  multiply(x, width, y);
  return y;
}

CsrMatrix symmetric_from_edges(std::size_t n, std::span<const WeightedEdge> edges) {
  std::vector<std::size_t> degree(n, 0);
  for (const auto& e : edges) {
    if (e.i >= n || e.j >= n) throw std::invalid_argument("edge endpoint out of range");
    if (e.i == e.j) throw std::invalid_argument("self-loop in edge list");
    ++degree[e.i];
    ++degree[e.j];
  }

  CsrMatrix m;
  m.n = n;
  m.row_ptr.assign(n + 1, 0);
  std::partial_sum(degree.begin(), degree.end(), m.row_ptr.begin() + 1);
  m.col.resize(m.row_ptr[n]);
  m.val.resize(m.row_ptr[n]);

  std::vector<std::size_t> fill(m.row_ptr.begin(), m.row_ptr.end() - 1);
  for (const auto& e : edges) {
    m.col[fill[e.i]] = e.j;
    m.val[fill[e.i]++] = e.weight;
    m.col[fill[e.j]] = e.i;
    m.val[fill[e.j]++] = e.weight;
  }

  std::vector<std::size_t> order;
  std::vector<std::uint32_t> col_tmp;
  std::vector<double> val_tmp;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t b = m.row_ptr[r];
    const std::size_t len = m.row_size(r);
    order.resize(len);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t c) { return m.col[b + a] < m.col[b + c]; });
    col_tmp.resize(len);
    val_tmp.resize(len);
    for (std::size_t k = 0; k < len; ++k) {
      col_tmp[k] = m.col[b + order[k]];
      val_tmp[k] = m.val[b + order[k]];
      if (k > 0 && col_tmp[k] == col_tmp[k - 1]) {
        throw std::invalid_argument("duplicate edge (" + std::to_string(r) + "," +
                                    std::to_string(col_tmp[k]) + ")");
      }
    }
    std::copy(col_tmp.begin(), col_tmp.end(), m.col.begin() + static_cast<std::ptrdiff_t>(b));
    std::copy(val_tmp.begin(), val_tmp.end(), m.val.begin() + static_cast<std::ptrdiff_t>(b));
  }
  return m;
}

}  // namespace gcnrefine
