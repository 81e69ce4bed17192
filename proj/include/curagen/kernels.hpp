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

#ifndef CURAGEN_KERNELS_HPP_
#define CURAGEN_KERNELS_HPP_

// Data-parallel distance kernels. `serial` is the reference implementation
// kept for tests and benchmarks; `parallel` is the OpenMP version used by
// the library. Both compute every per-point quantity with the same
// arithmetic in the same order, so their outputs are bitwise identical.

#include <cstddef>
#include <span>

#include "curagen/common.hpp"

namespace curagen::kernels {

// Squared Euclidean distance, accumulated left to right in double.
inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return acc;
}

namespace serial {

// For each row: index of the nearest centroid (lowest index on ties) and
// the squared distance to it.
void nearest_centroid(const Matrix& data, const Matrix& centroids,
                      std::span<std::size_t> labels,
                      std::span<double> squared_distances);

// Per-point silhouette values s(i). labels[i] < num_labels. Points alone
// in their cluster get 0. Requires at least two non-empty labels.
void silhouette_values(const Matrix& data, std::span<const std::size_t> labels,
                       std::size_t num_labels, std::span<double> values);

// min_distances[i] = min(min_distances[i], ||data[i] - center||).
void update_min_distance(const Matrix& data, std::span<const double> center,
                         std::span<double> min_distances);

}  // namespace serial

namespace parallel {

void nearest_centroid(const Matrix& data, const Matrix& centroids,
                      std::span<std::size_t> labels,
                      std::span<double> squared_distances);

void silhouette_values(const Matrix& data, std::span<const std::size_t> labels,
                       std::size_t num_labels, std::span<double> values);

void update_min_distance(const Matrix& data, std::span<const double> center,
                         std::span<double> min_distances);

}  // namespace parallel

}  // namespace curagen::kernels

#endif  // CURAGEN_KERNELS_HPP_
