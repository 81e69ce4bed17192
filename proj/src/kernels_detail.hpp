//
// Copyright 2026 The Curagen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef CURAGEN_SRC_KERNELS_DETAIL_HPP_
#define CURAGEN_SRC_KERNELS_DETAIL_HPP_

// Per-point bodies shared by the serial and OpenMP kernels.

#include <cmath>
#include <limits>
#include <vector>

#include "curagen/kernels.hpp"

namespace curagen::kernels::detail {

inline void nearest_one(const Matrix& data, const Matrix& centroids,
                        std::size_t i, std::size_t& label, double& best) {
  const auto x = data.row(i);
  best = std::numeric_limits<double>::infinity();
  label = 0;
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(x, centroids.row(c));
    if (d < best) {
      best = d;
      label = c;
    }
  }
}

// `sums` is scratch of size num_labels.
inline double silhouette_one(const Matrix& data,
                             std::span<const std::size_t> labels,
                             std::span<const std::size_t> counts,
                             std::size_t i, std::vector<double>& sums) {
  std::fill(sums.begin(), sums.end(), 0.0);
  const auto x = data.row(i);
  for (std::size_t j = 0; j < data.rows(); ++j) {
    if (j == i) continue;
    sums[labels[j]] += std::sqrt(squared_distance(x, data.row(j)));
  }
  const std::size_t own = labels[i];
  if (counts[own] <= 1) return 0.0;
  const double a = sums[own] / static_cast<double>(counts[own] - 1);
  double b = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (c == own || counts[c] == 0) continue;
    b = std::min(b, sums[c] / static_cast<double>(counts[c]));
  }
  const double denom = std::max(a, b);
  return denom > 0.0 ? (b - a) / denom : 0.0;
}

inline std::vector<std::size_t> label_counts(
    std::span<const std::size_t> labels, std::size_t num_labels) {
  std::vector<std::size_t> counts(num_labels, 0);
  for (std::size_t l : labels) {
    if (l >= num_labels) {
      throw Error(ErrorKind::kInvariant, "label out of range");
    }
    ++counts[l];
  }
  std::size_t nonempty = 0;
  for (std::size_t c : counts) nonempty += c > 0;
  if (nonempty < 2) {
    throw Error(ErrorKind::kInvariant,
                "silhouette needs at least 2 non-empty clusters");
  }
  return counts;
}

inline void check_rows(const Matrix& data, std::size_t n) {
  if (data.rows() != n) {
    throw Error(ErrorKind::kInvariant, "kernel output size mismatch");
  }
}

}  // namespace curagen::kernels::detail

#endif  // CURAGEN_SRC_KERNELS_DETAIL_HPP_
