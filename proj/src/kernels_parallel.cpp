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

#include <cmath>

#include "curagen/kernels.hpp"
#include "kernels_detail.hpp"

namespace curagen::kernels::parallel {

void nearest_centroid(const Matrix& data, const Matrix& centroids,
                      std::span<std::size_t> labels,
                      std::span<double> squared_distances) {
  detail::check_rows(data, labels.size());
  detail::check_rows(data, squared_distances.size());
  const auto n = static_cast<std::ptrdiff_t>(data.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    detail::nearest_one(data, centroids, static_cast<std::size_t>(i),
                        labels[i], squared_distances[i]);
  }
}

void silhouette_values(const Matrix& data, std::span<const std::size_t> labels,
                       std::size_t num_labels, std::span<double> values) {
  detail::check_rows(data, labels.size());
  detail::check_rows(data, values.size());
  const auto counts = detail::label_counts(labels, num_labels);
  const auto n = static_cast<std::ptrdiff_t>(data.rows());
#pragma omp parallel
  {
    std::vector<double> sums(num_labels);
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      values[i] = detail::silhouette_one(data, labels, counts,
                                         static_cast<std::size_t>(i), sums);
    }
  }
}

void update_min_distance(const Matrix& data, std::span<const double> center,
                         std::span<double> min_distances) {
  detail::check_rows(data, min_distances.size());
  const auto n = static_cast<std::ptrdiff_t>(data.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double d = std::sqrt(squared_distance(data.row(i), center));
    if (d < min_distances[i]) min_distances[i] = d;
  }
}

}  // namespace curagen::kernels::parallel
