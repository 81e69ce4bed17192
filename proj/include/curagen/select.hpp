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

#ifndef CURAGEN_SELECT_HPP_
#define CURAGEN_SELECT_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "curagen/common.hpp"
#include "curagen/score.hpp"
#include "json.hpp"

namespace curagen {

enum class SelectionMethod { kGeneralizationTopK, kRandom, kKCenterGreedy };

std::string_view to_string(SelectionMethod method);
SelectionMethod selection_method_from_string(std::string_view text);

struct SelectedItem {
  std::string id;
  std::optional<double> score;   // generalization-topk
  std::optional<double> radius;  // kcenter-greedy: distance at pick time
};

struct ClusterSelection {
  std::optional<std::size_t> cluster_index;  // empty for corpus-wide picks
  std::size_t quota = 0;
  std::size_t cluster_size = 0;
  std::vector<SelectedItem> items;
};

struct SelectionManifest {
  SelectionMethod method = SelectionMethod::kGeneralizationTopK;
  std::size_t total = 0;
  std::vector<ClusterSelection> per_cluster;
  std::uint64_t seed = 0;
  std::string fingerprint;  // hash of the producing configuration
  std::optional<double> coverage_radius;  // kcenter-greedy only

  std::vector<std::string> selected_ids() const;
};

// Throws kInvariant if an id appears twice or a count disagrees with total.
void validate_manifest(const SelectionManifest& manifest);

// First min(quota, |cluster|) ids of each ranking, ordered by
// (cluster_index, rank).
SelectionManifest select_top(std::span<const ClusterRanking> rankings,
                             std::size_t quota);

// Seeded uniform sample of `size` ids without replacement.
SelectionManifest select_random(std::span<const std::string> ids,
                                std::size_t size, std::uint64_t seed);

// Per-cluster variant: min(quota, |cluster|) ids from each cluster.
SelectionManifest select_random_per_cluster(
    std::span<const std::vector<std::string>> clusters, std::size_t quota,
    std::uint64_t seed);

struct KCenterResult {
  std::vector<std::size_t> picks;  // row indices in pick order
  // radii[t] = distance from picks[t] to its nearest earlier pick; the
  // first entry is +inf.
  std::vector<double> radii;
  // max over rows of the distance to the nearest pick.
  double coverage_radius = 0.0;
};

// Farthest-first traversal from row `first`. Ties go to the lowest row.
KCenterResult kcenter_greedy(const Matrix& data, std::size_t size,
                             std::size_t first);

// KCenterGreedy baseline. Starts at a seeded-random row, or row 0 when
// `start_at_first_row`.
SelectionManifest select_kcenter(const Matrix& data,
                                 std::span<const std::string> ids,
                                 std::size_t size, std::uint64_t seed,
                                 bool start_at_first_row = false);

nlohmann::json to_json(const SelectionManifest& manifest);
SelectionManifest manifest_from_json(const nlohmann::json& j);

}  // namespace curagen

#endif  // CURAGEN_SELECT_HPP_
