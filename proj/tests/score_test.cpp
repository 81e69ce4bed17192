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

#include "curagen/score.hpp"

#include <algorithm>
#include <cmath>

#include "gtest/gtest.h"
#include "test_util.hpp"

namespace curagen {
namespace {

using testing::make_record;
using testing::pointers;
using testing::synthetic_records;

TEST(EuclideanTest, Examples) {
  const std::vector<double> o{0, 0}, p{3, 4}, q{1, 1, 1};
  EXPECT_EQ(euclidean(o, p), 5.0);
  EXPECT_EQ(euclidean(p, p), 0.0);
  EXPECT_THROW(euclidean(o, q), Error);
}

TEST(EuclideanTest, AgreesWithExtendedPrecision) {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t dim = 1 + rng.uniform_index(256);
    std::vector<double> a(dim), b(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      a[j] = rng.normal() * 10;
      b[j] = rng.normal() * 10;
    }
    const double oracle = static_cast<double>(testing::oracle_distance(a, b));
    EXPECT_LE(std::abs(euclidean(a, b) - oracle), 1e-12 * std::max(1.0, oracle));
  }
}

TEST(ScoreTest, MeanOfVariantDistances) {
  const std::vector<EmbeddingVector> e{{0, 0}, {3, 0}, {0, 5}};
  const auto s = score_from_embeddings("r", 1, e, false);
  EXPECT_EQ(s.distances, (std::vector<double>{3, 5}));
  EXPECT_EQ(s.score, 4.0);
}

TEST(ScoreTest, ZeroDeletionScoresZero) {
  MockProvider mock(32, 1);
  PerturbationConfig cfg;
  cfg.n = 0;
  cfg.variants = 4;
  for (const auto& r : synthetic_records(50, 2)) {
    const auto s = score_entry(mock, r, cfg);
    EXPECT_EQ(s.score, 0.0);
    EXPECT_EQ(s.distances.size(), 4u);
  }
}

TEST(ScoreTest, MockSingleDeletionScoresOne) {
  MockProvider mock(64, 7);
  PerturbationConfig cfg;
  cfg.variants = 3;
  for (const auto& r : synthetic_records(40, 5)) {
    const auto s = score_entry(mock, r, cfg);
    for (double d : s.distances) EXPECT_NEAR(d, 1.0, 1e-9);
    EXPECT_NEAR(s.score, 1.0, 1e-9);
    EXPECT_FALSE(s.truncated);
  }
}

TEST(ScoreTest, ErrorsNameTheRecord) {
  testing::StubProvider stub(2, {});
  try {
    score_entry(stub, make_record("bad-one", "a b"), PerturbationConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kProvider);
    EXPECT_NE(std::string(e.what()).find("bad-one"), std::string::npos);
  }
}

// Oracle: independent per-record loop that embeds one input at a time.
std::vector<double> loop_scores(EmbeddingProvider& provider,
                                const std::vector<InstructionRecord>& records,
                                const PerturbationConfig& cfg) {
  std::vector<double> out;
  for (const auto& r : records) {
    const auto e0 = embed_batch(provider, std::vector<std::string>{composite_text(r)})[0];
    long double total = 0;
    const auto variants = perturb(r.instruction, cfg, r.id);
    for (const auto& v : variants) {
      const auto ei = embed_batch(provider, std::vector<std::string>{composite_text(r, v.text)})[0];
      total += testing::oracle_distance(ei, e0);
    }
    out.push_back(static_cast<double>(total / variants.size()));
  }
  return out;
}

TEST(ScoreClusterTest, MatchesLoopOracle) {
  const auto records = synthetic_records(100, 9);
  MockProvider mock(48, 3);
  PerturbationConfig cfg;
  cfg.n = 3;
  cfg.variants = 5;
  cfg.seed = 17;
  const auto oracle = loop_scores(mock, records, cfg);
  const auto ptrs = pointers(records);
  const auto got = score_cluster(mock, ptrs, cfg);
  ASSERT_EQ(got.scores.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(got.scores[i].record_id, records[i].id);
    EXPECT_NEAR(got.scores[i].score, oracle[i], 1e-9);
  }
}

// Property: batching and worker count do not change any score.
TEST(ScoreClusterTest, PartitionAndWorkerIndependent) {
  const auto records = synthetic_records(61, 4);
  const auto ptrs = pointers(records);
  MockProvider mock(32, 8);
  PerturbationConfig cfg;
  cfg.n = 2;
  cfg.seed = 5;
  const auto base = score_cluster(mock, ptrs, cfg, ScoreOptions{1, 1, false});
  for (std::size_t batch : {2u, 7u, 16u, 100u}) {
    for (std::size_t workers : {1u, 3u}) {
      const auto got = score_cluster(mock, ptrs, cfg, ScoreOptions{workers, batch, false});
      ASSERT_EQ(got.scores.size(), base.scores.size());
      for (std::size_t i = 0; i < base.scores.size(); ++i) {
        EXPECT_EQ(got.scores[i].record_id, base.scores[i].record_id);
        EXPECT_EQ(got.scores[i].distances, base.scores[i].distances);
      }
    }
  }
}

// Fails whenever an input contains the word "poison".
class PoisonProvider : public EmbeddingProvider {
 public:
  std::string name() const override { return "poison"; }
  std::size_t dim() const override { return 16; }
  std::vector<EmbeddingVector> embed(std::span<const std::string> inputs) override {
    for (const auto& s : inputs) {
      if (s.find("poison") != std::string::npos) throw Error(ErrorKind::kProvider, "poisoned");
    }
    return MockProvider(16, 0).embed(inputs);
  }
};

TEST(ScoreClusterTest, SkipErrorsIsolatesFailures) {
  auto records = synthetic_records(20, 1);
  records[5] = make_record("p5", "poison word here and there");
  records[13] = make_record("p13", "more poison words to drop");
  const auto ptrs = pointers(records);
  PoisonProvider provider;
  PerturbationConfig cfg;
  EXPECT_THROW(score_cluster(provider, ptrs, cfg, ScoreOptions{1, 4, false}), Error);
  const auto got = score_cluster(provider, ptrs, cfg, ScoreOptions{1, 4, true});
  EXPECT_EQ(got.scores.size(), 18u);
  ASSERT_EQ(got.failures.size(), 2u);
  EXPECT_EQ(got.failures[0].record_id, "p5");
  EXPECT_EQ(got.failures[1].record_id, "p13");
}

TEST(RankTest, Examples) {
  std::vector<EntryScore> s(4);
  const char* ids[] = {"b", "a", "c", "d"};
  const double v[] = {0.5, 0.5, 0.9, 0.1};
  for (int i = 0; i < 4; ++i) {
    s[i].record_id = ids[i];
    s[i].score = v[i];
  }
  const auto r = rank_cluster(2, s);
  EXPECT_EQ(r.cluster_index, 2u);
  EXPECT_EQ(r.ordered, (std::vector<std::string>{"c", "a", "b", "d"}));
  EXPECT_EQ(r.scores, (std::vector<double>{0.9, 0.5, 0.5, 0.1}));
}

TEST(RankTest, MatchesSortOracle) {
  Rng rng(12);
  std::vector<EntryScore> s(500);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i].record_id = "id" + std::to_string(rng.uniform_index(100000)) + "_" + std::to_string(i);
    s[i].score = static_cast<double>(rng.uniform_index(20)) / 4.0;  // many ties
  }
  auto oracle = s;
  std::stable_sort(oracle.begin(), oracle.end(), [](const EntryScore& a, const EntryScore& b) {
    return a.record_id < b.record_id;
  });
  std::stable_sort(oracle.begin(), oracle.end(),
                   [](const EntryScore& a, const EntryScore& b) { return a.score > b.score; });
  const auto r = rank_cluster(0, s);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(r.ordered[i], oracle[i].record_id);
}

// Property: uniform scaling scales every score; translation changes none.
TEST(ScoreInvarianceTest, ScaleAndTranslation) {
  const auto records = synthetic_records(30, 6);
  const auto ptrs = pointers(records);
  auto mock = std::make_shared<MockProvider>(24, 2);
  std::vector<double> shift(24);
  for (std::size_t j = 0; j < 24; ++j) shift[j] = 1000.0 * std::sin(static_cast<double>(j));
  testing::AffineProvider scaled(mock, 3.7, {});
  testing::AffineProvider shifted(mock, 1.0, shift);
  PerturbationConfig cfg;
  cfg.n = 2;
  const auto base = score_cluster(*mock, ptrs, cfg);
  const auto a = score_cluster(scaled, ptrs, cfg);
  const auto b = score_cluster(shifted, ptrs, cfg);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_NEAR(a.scores[i].score, 3.7 * base.scores[i].score, 1e-9);
    EXPECT_NEAR(b.scores[i].score, base.scores[i].score, 1e-9);
  }
  EXPECT_EQ(rank_cluster(0, a.scores).ordered, rank_cluster(0, base.scores).ordered);
}

TEST(ScoreJsonTest, RoundTrip) {
  EntryScore s;
  s.record_id = "x";
  s.n = 2;
  s.distances = {0.1, 1.0 / 3.0};
  s.score = (0.1 + 1.0 / 3.0) / 2;
  s.truncated = true;
  const auto j = to_json(s, 4);
  EXPECT_EQ(j["cluster"], 4);
  const auto back = entry_score_from_json(j);
  EXPECT_EQ(back.record_id, "x");
  EXPECT_EQ(back.distances, s.distances);
  EXPECT_EQ(back.score, s.score);
  EXPECT_TRUE(back.truncated);
}

}  // namespace
}  // namespace curagen
