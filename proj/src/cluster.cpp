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

#include "curagen/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "curagen/kernels.hpp"

namespace curagen {
namespace {

struct TrainedRun {
  Matrix centroids;
  std::vector<std::uint64_t> counts;
};

TrainedRun train_once(const Matrix& data, std::size_t k,
                      const KMeansParams& params, std::uint64_t seed) {
  Rng rng(seed);
  const auto init = sample_without_replacement(rng, data.rows(), k);
  TrainedRun run{data.select_rows(init), std::vector<std::uint64_t>(k, 0)};

  const bool full_batch = params.batch_size >= data.rows();
  const std::size_t batch = full_batch ? data.rows() : params.batch_size;
  std::vector<std::size_t> batch_rows(batch);
  if (full_batch) std::iota(batch_rows.begin(), batch_rows.end(), 0);
  std::vector<std::size_t> labels(batch);
  std::vector<double> dist(batch);
  Matrix previous;

  for (std::size_t it = 0; it < params.iterations; ++it) {
    if (!full_batch) {
      for (auto& r : batch_rows) r = rng.uniform_index(data.rows());
    }
    const Matrix batch_data = data.select_rows(batch_rows);
    kernels::parallel::nearest_centroid(batch_data, run.centroids, labels, dist);

    previous = run.centroids;
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t c = labels[b];
      const double eta = 1.0 / static_cast<double>(++run.counts[c]);
      auto centroid = run.centroids.row(c);
      const auto x = batch_data.row(b);
      for (std::size_t j = 0; j < centroid.size(); ++j) {
        centroid[j] = (1.0 - eta) * centroid[j] + eta * x[j];
      }
    }
    double max_shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      max_shift = std::max(max_shift, std::sqrt(kernels::squared_distance(
                                          run.centroids.row(c), previous.row(c))));
    }
    if (max_shift < params.tolerance) break;
  }
  return run;
}

}  // namespace

KMeansModel minibatch_kmeans(const Matrix& data, std::size_t k,
                             const KMeansParams& params, std::uint64_t seed) {
  if (k == 0) throw Error(ErrorKind::kConfig, "k must be >= 1");
  if (k > data.rows()) {
    throw Error(ErrorKind::kConfig, "k = " + std::to_string(k) + " exceeds " +
                                        std::to_string(data.rows()) + " rows");
  }
  if (params.batch_size < 1) throw Error(ErrorKind::kConfig, "batch_size must be >= 1");
  if (params.iterations < 1) throw Error(ErrorKind::kConfig, "iterations must be >= 1");
  if (!all_finite(data.data())) {
    throw Error(ErrorKind::kInvariant, "clustering input has non-finite values");
  }

  const std::size_t restarts = std::max<std::size_t>(params.restarts, 1);
  KMeansModel best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < restarts; ++r) {
    KMeansModel candidate;
    candidate.k = k;
    candidate.seed = seed;
    auto run = train_once(data, k, params, derive_seed(seed, r));
    candidate.centroids = std::move(run.centroids);
    candidate.counts = std::move(run.counts);
    if (restarts == 1) return candidate;
    const double value = sse(data, assign(candidate, data), candidate);
    if (value < best_sse) {
      best_sse = value;
      best = std::move(candidate);
    }
  }
  return best;
}

ClusterAssignment assign(const KMeansModel& model, const Matrix& data) {
  if (data.rows() > 0 && data.cols() != model.centroids.cols()) {
    throw Error(ErrorKind::kInvariant,
                "data dim " + std::to_string(data.cols()) +
                    " does not match centroid dim " +
                    std::to_string(model.centroids.cols()));
  }
  ClusterAssignment out;
  out.cluster.resize(data.rows());
  out.distance.resize(data.rows());
  kernels::parallel::nearest_centroid(data, model.centroids, out.cluster,
                                      out.distance);
  for (auto& d : out.distance) d = std::sqrt(d);
  return out;
}

double sse(const Matrix& data, const ClusterAssignment& assignment,
           const KMeansModel& model) {
  if (assignment.cluster.size() != data.rows()) {
    throw Error(ErrorKind::kInvariant, "assignment does not match data");
  }
  if (data.rows() > 0 && data.cols() != model.centroids.cols()) {
    throw Error(ErrorKind::kInvariant, "data dim does not match centroids");
  }
  std::vector<double> per_row(data.rows());
  const auto n = static_cast<std::ptrdiff_t>(data.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::size_t c = assignment.cluster[i];
    per_row[i] = kernels::squared_distance(data.row(i), model.centroids.row(c));
  }
  double total = 0.0;
  for (double v : per_row) total += v;
  return total;
}

SilhouetteResult silhouette(const Matrix& data,
                            std::span<const std::size_t> labels,
                            const SilhouetteOptions& options) {
  if (labels.size() != data.rows()) {
    throw Error(ErrorKind::kInvariant, "labels do not match data");
  }
  if (data.rows() < 2) {
    throw Error(ErrorKind::kInvariant, "silhouette needs at least 2 rows");
  }
  SilhouetteResult result;
  const Matrix* rows = &data;
  std::span<const std::size_t> used = labels;
  Matrix sample;
  std::vector<std::size_t> sample_labels;
  if (options.sample_cap > 0 && data.rows() > options.sample_cap) {
    Rng rng(options.seed);
    auto idx = sample_without_replacement(rng, data.rows(), options.sample_cap);
    std::sort(idx.begin(), idx.end());
    sample = data.select_rows(idx);
    sample_labels.reserve(idx.size());
    for (std::size_t i : idx) sample_labels.push_back(labels[i]);
    rows = &sample;
    used = sample_labels;
    result.sampled = true;
  }

  // Compact labels to the non-empty ones.
  std::size_t max_label = 0;
  for (std::size_t l : used) max_label = std::max(max_label, l);
  std::vector<std::size_t> remap(max_label + 1, std::numeric_limits<std::size_t>::max());
  std::size_t next = 0;
  std::vector<std::size_t> compact(used.size());
  for (std::size_t l : used) {
    if (remap[l] == std::numeric_limits<std::size_t>::max()) remap[l] = next++;
  }
  for (std::size_t i = 0; i < used.size(); ++i) compact[i] = remap[used[i]];
  result.nonempty_clusters = next;
  if (next < 2) {
    throw Error(ErrorKind::kInvariant,
                "silhouette needs at least 2 non-empty clusters, got " +
                    std::to_string(next));
  }

  std::vector<double> values(rows->rows());
  kernels::parallel::silhouette_values(*rows, compact, next, values);
  double total = 0.0;
  for (double v : values) total += v;
  result.value = total / static_cast<double>(values.size());
  return result;
}

std::size_t argmax_silhouette(std::span<const KSweepEntry> entries) {
  if (entries.empty()) throw Error(ErrorKind::kInvariant, "empty k sweep");
  std::size_t best = 0;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].silhouette > entries[best].silhouette + 1e-12) best = i;
  }
  return best;
}

KSweepResult select_k(const Matrix& data, std::size_t k_min, std::size_t k_max,
                      const KMeansParams& params,
                      const SilhouetteOptions& silhouette_options,
                      std::uint64_t seed) {
  if (k_min < 2 || k_min > k_max || k_max > data.rows()) {
    throw Error(ErrorKind::kConfig,
                "k range [" + std::to_string(k_min) + ", " +
                    std::to_string(k_max) + "] invalid for " +
                    std::to_string(data.rows()) + " rows");
  }
  KSweepResult result;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    const std::uint64_t k_seed = seed ^ static_cast<std::uint64_t>(k);
    const KMeansModel model = minibatch_kmeans(data, k, params, k_seed);
    const ClusterAssignment a = assign(model, data);
    KSweepEntry entry;
    entry.k = k;
    entry.sse = sse(data, a, model);
    std::vector<bool> used(k, false);
    for (std::size_t c : a.cluster) used[c] = true;
    entry.nonempty = static_cast<std::size_t>(std::count(used.begin(), used.end(), true));
    if (entry.nonempty >= 2) {
      SilhouetteOptions opts = silhouette_options;
      opts.seed = derive_seed(silhouette_options.seed, k);
      const auto s = silhouette(data, a.cluster, opts);
      entry.silhouette = s.value;
      entry.sampled = s.sampled;
    }
    result.entries.push_back(entry);
  }
  result.chosen_p = result.entries[argmax_silhouette(result.entries)].k;
  return result;
}

nlohmann::json to_json(const KSweepResult& result) {
  nlohmann::json sweep = nlohmann::json::array();
  for (const auto& e : result.entries) {
    sweep.push_back({{"k", e.k},
                     {"nonempty", e.nonempty},
                     {"sse", e.sse},
                     {"silhouette", e.silhouette},
                     {"sampled", e.sampled}});
  }
  return {{"sweep", sweep}, {"chosen_p", result.chosen_p}};
}

KSweepResult sweep_from_json(const nlohmann::json& j) {
  KSweepResult r;
  for (const auto& e : j.at("sweep")) {
    KSweepEntry entry;
    entry.k = e.at("k").get<std::size_t>();
    entry.nonempty = e.value("nonempty", entry.k);
    entry.sse = e.at("sse").get<double>();
    entry.silhouette = e.at("silhouette").get<double>();
    entry.sampled = e.value("sampled", false);
    r.entries.push_back(entry);
  }
  r.chosen_p = j.at("chosen_p").get<std::size_t>();
  return r;
}

nlohmann::json to_json(const KMeansModel& model) {
  nlohmann::json centroids = nlohmann::json::array();
  for (std::size_t c = 0; c < model.centroids.rows(); ++c) {
    auto row = model.centroids.row(c);
    centroids.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"k", model.k},
          {"seed", model.seed},
          {"counts", model.counts},
          {"centroids", centroids}};
}

KMeansModel model_from_json(const nlohmann::json& j) {
  KMeansModel m;
  m.k = j.at("k").get<std::size_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.counts = j.at("counts").get<std::vector<std::uint64_t>>();
  for (const auto& row : j.at("centroids")) {
    m.centroids.append_row(row.get<std::vector<double>>());
  }
  if (m.centroids.rows() != m.k || m.counts.size() != m.k) {
    throw Error(ErrorKind::kIo, "k-means model has inconsistent sizes");
  }
  return m;
}

}  // namespace curagen
