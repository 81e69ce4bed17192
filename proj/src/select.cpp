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

#include "curagen/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "curagen/kernels.hpp"

namespace curagen {

std::string_view to_string(SelectionMethod method) {
  switch (method) {
    case SelectionMethod::kGeneralizationTopK:
      return "generalization-topk";
    case SelectionMethod::kRandom:
      return "random";
    case SelectionMethod::kKCenterGreedy:
      return "kcenter-greedy";
  }
  return "unknown";
}

SelectionMethod selection_method_from_string(std::string_view text) {
  if (text == "generalization-topk") return SelectionMethod::kGeneralizationTopK;
  if (text == "random") return SelectionMethod::kRandom;
  if (text == "kcenter-greedy") return SelectionMethod::kKCenterGreedy;
  throw Error(ErrorKind::kConfig, "unknown selection method '" + std::string(text) + "'");
}

std::vector<std::string> SelectionManifest::selected_ids() const {
  std::vector<std::string> ids;
  ids.reserve(total);
  for (const auto& c : per_cluster) {
    for (const auto& item : c.items) ids.push_back(item.id);
  }
  return ids;
}

void validate_manifest(const SelectionManifest& manifest) {
  std::unordered_set<std::string> seen;
  std::size_t count = 0;
  for (const auto& c : manifest.per_cluster) {
    if (c.items.size() != std::min(c.quota, c.cluster_size)) {
      throw Error(ErrorKind::kInvariant, "selection count differs from min(quota, size)");
    }
    for (const auto& item : c.items) {
      if (!seen.insert(item.id).second) {
        throw Error(ErrorKind::kInvariant, "id '" + item.id + "' selected twice");
      }
      ++count;
    }
  }
  if (count != manifest.total) {
    throw Error(ErrorKind::kInvariant, "manifest total does not match its items");
  }
}

SelectionManifest select_top(std::span<const ClusterRanking> rankings,
                             std::size_t quota) {
  if (rankings.empty()) throw Error(ErrorKind::kInvariant, "no rankings to select from");
  if (quota == 0) throw Error(ErrorKind::kConfig, "quota must be >= 1");
  std::vector<const ClusterRanking*> ordered;
  for (const auto& r : rankings) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    return a->cluster_index < b->cluster_index;
  });

  SelectionManifest m;
  m.method = SelectionMethod::kGeneralizationTopK;
  for (const auto* r : ordered) {
    ClusterSelection c;
    c.cluster_index = r->cluster_index;
    c.quota = quota;
    c.cluster_size = r->ordered.size();
    const std::size_t take = std::min(quota, r->ordered.size());
    for (std::size_t i = 0; i < take; ++i) {
      c.items.push_back({r->ordered[i], r->scores[i], std::nullopt});
    }
    m.total += take;
    m.per_cluster.push_back(std::move(c));
  }
  validate_manifest(m);
  return m;
}

SelectionManifest select_random(std::span<const std::string> ids,
                                std::size_t size, std::uint64_t seed) {
  if (size == 0) throw Error(ErrorKind::kConfig, "selection size must be >= 1");
  if (size > ids.size()) {
    throw Error(ErrorKind::kConfig, "selection size " + std::to_string(size) +
                                        " exceeds corpus size " +
                                        std::to_string(ids.size()));
  }
  Rng rng(seed);
  const auto picks = sample_without_replacement(rng, ids.size(), size);
  SelectionManifest m;
  m.method = SelectionMethod::kRandom;
  m.seed = seed;
  ClusterSelection c;
  c.quota = size;
  c.cluster_size = ids.size();
  for (std::size_t p : picks) c.items.push_back({ids[p], std::nullopt, std::nullopt});
  m.total = size;
  m.per_cluster.push_back(std::move(c));
  validate_manifest(m);
  return m;
}

SelectionManifest select_random_per_cluster(
    std::span<const std::vector<std::string>> clusters, std::size_t quota,
    std::uint64_t seed) {
  if (quota == 0) throw Error(ErrorKind::kConfig, "quota must be >= 1");
  SelectionManifest m;
  m.method = SelectionMethod::kRandom;
  m.seed = seed;
  for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
    Rng rng(derive_seed(seed, ci));
    const auto& ids = clusters[ci];
    ClusterSelection c;
    c.cluster_index = ci;
    c.quota = quota;
    c.cluster_size = ids.size();
    for (std::size_t p : sample_without_replacement(rng, ids.size(),
                                                    std::min(quota, ids.size()))) {
      c.items.push_back({ids[p], std::nullopt, std::nullopt});
    }
    m.total += c.items.size();
    m.per_cluster.push_back(std::move(c));
  }
  validate_manifest(m);
  return m;
}

KCenterResult kcenter_greedy(const Matrix& data, std::size_t size,
                             std::size_t first) {
  if (size < 1 || size > data.rows()) {
    throw Error(ErrorKind::kConfig, "k-center size " + std::to_string(size) +
                                        " out of range [1, " +
                                        std::to_string(data.rows()) + "]");
  }
  if (first >= data.rows()) throw Error(ErrorKind::kConfig, "k-center start out of range");
  KCenterResult r;
  std::vector<double> min_dist(data.rows(), std::numeric_limits<double>::infinity());
  std::vector<bool> picked(data.rows(), false);
  std::size_t next = first;
  double next_radius = std::numeric_limits<double>::infinity();
  while (true) {
    r.picks.push_back(next);
    r.radii.push_back(next_radius);
    picked[next] = true;
    kernels::parallel::update_min_distance(data, data.row(next), min_dist);
    // Farthest remaining row; strict > keeps the lowest index on ties.
    double best = -1.0;
    std::size_t best_row = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (min_dist[i] > best) {
        best = min_dist[i];
        best_row = i;
      }
    }
    if (r.picks.size() == size) {
      r.coverage_radius = best;
      break;
    }
    // Every row is picked or covered at distance 0; take the lowest
    // unpicked row so the result still has `size` distinct rows.
    if (picked[best_row]) {
      best_row = static_cast<std::size_t>(
          std::find(picked.begin(), picked.end(), false) - picked.begin());
    }
    next = best_row;
    next_radius = min_dist[best_row];
  }
  return r;
}

SelectionManifest select_kcenter(const Matrix& data,
                                 std::span<const std::string> ids,
                                 std::size_t size, std::uint64_t seed,
                                 bool start_at_first_row) {
  if (ids.size() != data.rows()) {
    throw Error(ErrorKind::kInvariant, "k-center ids do not match data rows");
  }
  if (size < 1 || size > data.rows()) {
    throw Error(ErrorKind::kConfig, "k-center size " + std::to_string(size) +
                                        " out of range [1, " +
                                        std::to_string(data.rows()) + "]");
  }
  Rng rng(seed);
  const std::size_t first = start_at_first_row ? 0 : rng.uniform_index(data.rows());
  const KCenterResult r = kcenter_greedy(data, size, first);
  SelectionManifest m;
  m.method = SelectionMethod::kKCenterGreedy;
  m.seed = seed;
  m.coverage_radius = r.coverage_radius;
  ClusterSelection c;
  c.quota = size;
  c.cluster_size = data.rows();
  for (std::size_t t = 0; t < r.picks.size(); ++t) {
    std::optional<double> radius;
    if (std::isfinite(r.radii[t])) radius = r.radii[t];
    c.items.push_back({ids[r.picks[t]], std::nullopt, radius});
  }
  m.total = c.items.size();
  m.per_cluster.push_back(std::move(c));
  validate_manifest(m);
  return m;
}

nlohmann::json to_json(const SelectionManifest& manifest) {
  nlohmann::json per_cluster = nlohmann::json::array();
  for (const auto& c : manifest.per_cluster) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& item : c.items) {
      nlohmann::json j{{"id", item.id}};
      if (item.score) j["score"] = *item.score;
      if (item.radius) j["radius"] = *item.radius;
      items.push_back(std::move(j));
    }
    nlohmann::json entry{{"quota", c.quota}, {"size", c.cluster_size},
                         {"selected", std::move(items)}};
    entry["cluster"] = c.cluster_index ? nlohmann::json(*c.cluster_index)
                                       : nlohmann::json(nullptr);
    per_cluster.push_back(std::move(entry));
  }
  nlohmann::json j{{"method", to_string(manifest.method)},
                   {"total", manifest.total},
                   {"seed", manifest.seed},
                   {"fingerprint", manifest.fingerprint},
                   {"per_cluster", std::move(per_cluster)}};
  if (manifest.coverage_radius) j["coverage_radius"] = *manifest.coverage_radius;
  return j;
}

SelectionManifest manifest_from_json(const nlohmann::json& j) {
  SelectionManifest m;
  m.method = selection_method_from_string(j.at("method").get<std::string>());
  m.total = j.at("total").get<std::size_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.fingerprint = j.value("fingerprint", std::string());
  if (j.contains("coverage_radius")) m.coverage_radius = j["coverage_radius"].get<double>();
  for (const auto& c : j.at("per_cluster")) {
    ClusterSelection sel;
    if (!c.at("cluster").is_null()) sel.cluster_index = c["cluster"].get<std::size_t>();
    sel.quota = c.at("quota").get<std::size_t>();
    sel.cluster_size = c.at("size").get<std::size_t>();
    for (const auto& item : c.at("selected")) {
      SelectedItem s{item.at("id").get<std::string>(), std::nullopt, std::nullopt};
      if (item.contains("score")) s.score = item["score"].get<double>();
      if (item.contains("radius")) s.radius = item["radius"].get<double>();
      sel.items.push_back(std::move(s));
    }
    m.per_cluster.push_back(std::move(sel));
  }
  return m;
}

}  // namespace curagen
