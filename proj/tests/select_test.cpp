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

#include <cmath>
#include <set>

#include "gtest/gtest.h"
#include "test_util.hpp"

namespace curagen {
namespace {

ClusterRanking ranking(std::size_t cluster, std::size_t size) {
  ClusterRanking r;
  r.cluster_index = cluster;
  for (std::size_t i = 0; i < size; ++i) {
    r.ordered.push_back("c" + std::to_string(cluster) + "_" + std::to_string(i));
    r.scores.push_back(static_cast<double>(size - i));
  }
  return r;
}

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("id" + std::to_string(i));
  return out;
}

TEST(SelectTopTest, QuotaPerCluster) {
  std::vector<ClusterRanking> r;
  for (std::size_t c = 0; c < 7; ++c) r.push_back(ranking(c, 15000 + 10 * c));
  const auto m = select_top(r, 15000);
  EXPECT_EQ(m.total, 105000u);
  EXPECT_EQ(m.selected_ids().size(), 105000u);
}

TEST(SelectTopTest, ClampsToClusterSize) {
  std::vector<ClusterRanking> r{ranking(1, 3), ranking(0, 10)};
  const auto m = select_top(r, 5);
  EXPECT_EQ(m.total, 8u);
  ASSERT_EQ(m.per_cluster.size(), 2u);
  EXPECT_EQ(m.per_cluster[0].cluster_index, 0u);  // sorted by cluster
  EXPECT_EQ(m.per_cluster[0].items.size(), 5u);
  EXPECT_EQ(m.per_cluster[1].items.size(), 3u);
  EXPECT_EQ(m.per_cluster[0].items[0].id, "c0_0");
  EXPECT_EQ(*m.per_cluster[0].items[0].score, 10.0);
}

TEST(SelectTopTest, QuotaOneTakesEachTop) {
  std::vector<ClusterRanking> r{ranking(0, 4), ranking(1, 4), ranking(2, 1)};
  const auto m = select_top(r, 1);
  EXPECT_EQ(m.selected_ids(), (std::vector<std::string>{"c0_0", "c1_0", "c2_0"}));
  EXPECT_THROW(select_top(r, 0), Error);
}

TEST(ValidateTest, CatchesDuplicatesAndTotals) {
  SelectionManifest m;
  ClusterSelection c;
  c.quota = 2;
  c.cluster_size = 5;
  c.items = {{"a", {}, {}}, {"a", {}, {}}};
  m.per_cluster.push_back(c);
  m.total = 2;
  EXPECT_THROW(validate_manifest(m), Error);
  m.per_cluster[0].items[1].id = "b";
  EXPECT_NO_THROW(validate_manifest(m));
  m.total = 3;
  EXPECT_THROW(validate_manifest(m), Error);
}

TEST(SelectRandomTest, FullCorpusAndBounds) {
  const auto all = ids(20);
  const auto m = select_random(all, 20, 4);
  const auto got = m.selected_ids();
  EXPECT_EQ(std::set<std::string>(got.begin(), got.end()),
            std::set<std::string>(all.begin(), all.end()));
  EXPECT_THROW(select_random(all, 21, 4), Error);
  EXPECT_THROW(select_random(all, 0, 4), Error);
}

TEST(SelectRandomTest, Deterministic) {
  const auto all = ids(500);
  EXPECT_EQ(select_random(all, 40, 9).selected_ids(), select_random(all, 40, 9).selected_ids());
  EXPECT_NE(select_random(all, 40, 9).selected_ids(), select_random(all, 40, 10).selected_ids());
}

TEST(SelectRandomTest, InclusionIsUniform) {
  const auto all = ids(10);
  std::vector<int> hits(10, 0);
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    for (const auto& id : select_random(all, 3, static_cast<std::uint64_t>(t)).selected_ids()) {
      ++hits[std::stoi(id.substr(2))];
    }
  }
  // p = 0.3 per id; allow 5 sigma.
  const double sigma = std::sqrt(trials * 0.3 * 0.7);
  for (int h : hits) EXPECT_NEAR(h, trials * 0.3, 5 * sigma);
}

TEST(SelectRandomTest, PerCluster) {
  const std::vector<std::vector<std::string>> clusters{ids(5), {"x", "y"}};
  const auto m = select_random_per_cluster(clusters, 3, 1);
  EXPECT_EQ(m.total, 5u);
  EXPECT_EQ(m.per_cluster[1].items.size(), 2u);
}

TEST(KCenterTest, CollinearExample) {
  const Matrix data = Matrix::from_rows({{0.0}, {1.0}, {10.0}});
  const auto r = kcenter_greedy(data, 2, 0);
  EXPECT_EQ(r.picks, (std::vector<std::size_t>{0, 2}));
  EXPECT_TRUE(std::isinf(r.radii[0]));
  EXPECT_EQ(r.radii[1], 10.0);
  EXPECT_EQ(r.coverage_radius, 1.0);
}

TEST(KCenterTest, TiesGoToLowestRow) {
  const Matrix data = Matrix::from_rows({{0.0}, {-1.0}, {1.0}});
  EXPECT_EQ(kcenter_greedy(data, 2, 0).picks, (std::vector<std::size_t>{0, 1}));
}

TEST(KCenterTest, AllRowsAndDuplicates) {
  const Matrix data = Matrix::from_rows({{1.0}, {1.0}, {1.0}, {2.0}});
  const auto r = kcenter_greedy(data, 4, 0);
  EXPECT_EQ(std::set<std::size_t>(r.picks.begin(), r.picks.end()).size(), 4u);
  EXPECT_EQ(r.coverage_radius, 0.0);
  EXPECT_THROW(kcenter_greedy(data, 5, 0), Error);
  EXPECT_THROW(kcenter_greedy(data, 0, 0), Error);
}

// Property: pick radii never increase.
TEST(KCenterTest, RadiiNonIncreasing) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 2 + rng.uniform_index(200);
    const auto data = testing::random_matrix(rows, 1 + rng.uniform_index(8), rng.next());
    const auto r = kcenter_greedy(data, 1 + rng.uniform_index(rows), rng.uniform_index(rows));
    for (std::size_t t = 2; t < r.radii.size(); ++t) EXPECT_LE(r.radii[t], r.radii[t - 1]);
    EXPECT_LE(r.coverage_radius, r.radii.back());
  }
}

TEST(KCenterTest, WithinTwiceOptimal) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rows = 3 + rng.uniform_index(8);
    const std::size_t size = 1 + rng.uniform_index(3);
    const auto data = testing::random_matrix(rows, 2, rng.next());
    const auto r = kcenter_greedy(data, size, rng.uniform_index(rows));
    EXPECT_LE(r.coverage_radius, 2.0 * testing::oracle_kcenter_radius(data, size) + 1e-12);
  }
}

TEST(KCenterTest, ManifestCarriesRadii) {
  const auto data = testing::random_matrix(30, 3, 2);
  const auto m = select_kcenter(data, ids(30), 5, 7);
  EXPECT_EQ(m.total, 5u);
  ASSERT_TRUE(m.coverage_radius.has_value());
  EXPECT_FALSE(m.per_cluster[0].items[0].radius.has_value());
  EXPECT_TRUE(m.per_cluster[0].items[1].radius.has_value());
  EXPECT_EQ(select_kcenter(data, ids(30), 5, 7, true).per_cluster[0].items[0].id, "id0");
}

TEST(ManifestJsonTest, RoundTrip) {
  std::vector<ClusterRanking> r{ranking(0, 4), ranking(3, 2)};
  auto m = select_top(r, 3);
  m.fingerprint = "abc";
  const auto j = to_json(m);
  EXPECT_EQ(j["method"], "generalization-topk");
  EXPECT_EQ(to_json(manifest_from_json(j)).dump(), j.dump());
  const auto k = select_kcenter(testing::random_matrix(10, 2, 1), ids(10), 3, 1);
  EXPECT_EQ(to_json(manifest_from_json(to_json(k))).dump(), to_json(k).dump());
  EXPECT_TRUE(to_json(k)["per_cluster"][0]["cluster"].is_null());
}

}  // namespace
}  // namespace curagen
