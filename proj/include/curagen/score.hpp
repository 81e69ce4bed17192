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

#ifndef CURAGEN_SCORE_HPP_
#define CURAGEN_SCORE_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "curagen/corpus.hpp"
#include "curagen/embed.hpp"
#include "curagen/perturb.hpp"
#include "json.hpp"

namespace curagen {

// Euclidean distance in double precision. Throws on a dim mismatch.
double euclidean(std::span<const double> a, std::span<const double> b);

// Generalization measure of one record: the mean distance between the
// embedding of its original composite and those of its N perturbed
// composites.
struct EntryScore {
  std::string record_id;
  std::size_t n = 0;
  std::vector<double> distances;  // one per variant
  double score = 0.0;
  bool truncated = false;  // some variant could not delete n words
};

// Scores one record from embeddings of [original, variant_0, ...].
EntryScore score_from_embeddings(const std::string& record_id, std::size_t n,
                                 std::span<const EmbeddingVector> embeddings,
                                 bool truncated);

// Builds the original and N perturbed composites, embeds all N + 1 in one
// batch, and averages the N distances to the original.
EntryScore score_entry(EmbeddingProvider& provider,
                       const InstructionRecord& record,
                       const PerturbationConfig& config);

struct ScoreOptions {
  std::size_t workers = 1;
  // Records embedded together in one provider call.
  std::size_t records_per_batch = 16;
  // Record per-record failures and continue instead of aborting.
  bool skip_errors = false;
};

struct ScoreFailure {
  std::string record_id;
  std::string error;
};

struct ClusterScores {
  std::vector<EntryScore> scores;  // input order, failures omitted
  std::vector<ScoreFailure> failures;
};

// Scores every record; output order matches input order regardless of the
// worker count or batch partitioning.
ClusterScores score_cluster(EmbeddingProvider& provider,
                            std::span<const InstructionRecord* const> records,
                            const PerturbationConfig& config,
                            const ScoreOptions& options = {});

struct ClusterRanking {
  std::size_t cluster_index = 0;
  std::vector<std::string> ordered;  // highest score first
  std::vector<double> scores;        // aligned with `ordered`
};

// Sorts by score descending, ties by record id ascending.
ClusterRanking rank_cluster(std::size_t cluster_index,
                            std::span<const EntryScore> scores);

nlohmann::json to_json(const EntryScore& score, std::size_t cluster);
EntryScore entry_score_from_json(const nlohmann::json& j);

}  // namespace curagen

#endif  // CURAGEN_SCORE_HPP_
