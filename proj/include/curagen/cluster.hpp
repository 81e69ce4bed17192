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

#ifndef CURAGEN_CLUSTER_HPP_
#define CURAGEN_CLUSTER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "curagen/common.hpp"
#include "json.hpp"

namespace curagen {

struct KMeansParams {
  std::size_t batch_size = 1024;
  std::size_t iterations = 100;
  // Independent restarts from different seeded initializations; the run
  // with the lowest SSE on the full data is kept.
  std::size_t restarts = 20;
  // Stop once no centroid moves more than this in one iteration.
  double tolerance = 1e-6;
};

struct KMeansModel {
  std::size_t k = 0;
  Matrix centroids;                   // k x dim
  std::vector<std::uint64_t> counts;  // per-centroid update counts
  std::uint64_t seed = 0;
};

struct ClusterAssignment {
  std::vector<std::size_t> cluster;  // index in [0, k)
  std::vector<double> distance;      // Euclidean distance to that centroid
};

// Mini-batch k-means with per-centroid 1/count learning rates.
//
// Each restart initializes the centroids to k distinct rows drawn uniformly
// with a seeded generator. An iteration draws a mini-batch (uniform with
// replacement, or every row in order when batch_size >= rows), assigns the
// batch against the centroids as they were at the start of the iteration,
// then moves each assigned centroid toward its point with rate 1/count after
// incrementing that centroid's count.
KMeansModel minibatch_kmeans(const Matrix& data, std::size_t k,
                             const KMeansParams& params, std::uint64_t seed);

// Nearest centroid per row; ties go to the lowest centroid index.
ClusterAssignment assign(const KMeansModel& model, const Matrix& data);

// Sum of squared distances from each row to its assigned centroid.
double sse(const Matrix& data, const ClusterAssignment& assignment,
           const KMeansModel& model);

struct SilhouetteOptions {
  // Above this many rows, the score is computed on a seeded uniform sample.
  // 0 disables sampling.
  std::size_t sample_cap = 5000;
  std::uint64_t seed = 0;
};

struct SilhouetteResult {
  double value = 0.0;
  bool sampled = false;
  std::size_t nonempty_clusters = 0;
};

// Mean silhouette coefficient over the rows. Empty labels are ignored.
// Throws kInvariant when fewer than two clusters are non-empty.
SilhouetteResult silhouette(const Matrix& data,
                            std::span<const std::size_t> labels,
                            const SilhouetteOptions& options = {});

struct KSweepEntry {
  std::size_t k = 0;
  std::size_t nonempty = 0;  // clusters with at least one assigned row
  double sse = 0.0;
  double silhouette = -1.0;
  bool sampled = false;
};

struct KSweepResult {
  std::vector<KSweepEntry> entries;
  std::size_t chosen_p = 0;
};

// Index of the entry with the highest silhouette. A later entry must beat
// the best so far by more than 1e-12, so near-ties keep the smaller k.
std::size_t argmax_silhouette(std::span<const KSweepEntry> entries);

// Runs clustering for every k in [k_min, k_max] with seed ^ k, recording
// SSE and silhouette, and picks p by argmax silhouette. A k whose run leaves
// fewer than two non-empty clusters gets silhouette -1.
KSweepResult select_k(const Matrix& data, std::size_t k_min, std::size_t k_max,
                      const KMeansParams& params,
                      const SilhouetteOptions& silhouette_options,
                      std::uint64_t seed);

nlohmann::json to_json(const KSweepResult& result);
KSweepResult sweep_from_json(const nlohmann::json& j);
nlohmann::json to_json(const KMeansModel& model);
KMeansModel model_from_json(const nlohmann::json& j);

}  // namespace curagen

#endif  // CURAGEN_CLUSTER_HPP_
