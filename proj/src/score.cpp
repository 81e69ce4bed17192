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
#include <exception>
#include <optional>

#include "curagen/common.hpp"
#include "curagen/kernels.hpp"

namespace curagen {
namespace {

struct PreparedRecord {
  std::vector<std::string> inputs;  // original composite, then variants
  bool truncated = false;
};

PreparedRecord prepare(const InstructionRecord& record,
                       const PerturbationConfig& config) {
  PreparedRecord p;
  p.inputs.reserve(config.variants + 1);
  p.inputs.push_back(composite_text(record));
  for (const auto& v : perturb(record.instruction, config, record.id)) {
    p.inputs.push_back(composite_text(record, v.text));
    p.truncated = p.truncated || v.truncated;
  }
  return p;
}

Error with_record_context(const Error& e, const std::string& record_id) {
  return Error(e.kind(), "record '" + record_id + "': " + e.what());
}

// Scores a run of records with one provider call.
std::vector<EntryScore> score_chunk(EmbeddingProvider& provider,
                                    std::span<const InstructionRecord* const> records,
                                    const PerturbationConfig& config) {
  std::vector<PreparedRecord> prepared;
  std::vector<std::string> inputs;
  prepared.reserve(records.size());
  for (const auto* r : records) {
    prepared.push_back(prepare(*r, config));
    inputs.insert(inputs.end(), prepared.back().inputs.begin(),
                  prepared.back().inputs.end());
  }
  const auto embeddings = embed_batch(provider, inputs);
  std::vector<EntryScore> out;
  out.reserve(records.size());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::size_t len = prepared[i].inputs.size();
    out.push_back(score_from_embeddings(
        records[i]->id, config.n,
        std::span<const EmbeddingVector>(embeddings).subspan(offset, len),
        prepared[i].truncated));
    offset += len;
  }
  return out;
}

}  // namespace

double euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kInvariant,
                "euclidean: dim " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
  return std::sqrt(kernels::squared_distance(a, b));
}

EntryScore score_from_embeddings(const std::string& record_id, std::size_t n,
                                 std::span<const EmbeddingVector> embeddings,
                                 bool truncated) {
  if (embeddings.size() < 2) {
    throw Error(ErrorKind::kInvariant, "scoring needs an original and >= 1 variant");
  }
  EntryScore s;
  s.record_id = record_id;
  s.n = n;
  s.truncated = truncated;
  s.distances.reserve(embeddings.size() - 1);
  double total = 0.0;
  for (std::size_t i = 1; i < embeddings.size(); ++i) {
    const double d = euclidean(embeddings[i], embeddings[0]);
    s.distances.push_back(d);
    total += d;
  }
  s.score = total / static_cast<double>(s.distances.size());
  return s;
}

EntryScore score_entry(EmbeddingProvider& provider,
                       const InstructionRecord& record,
                       const PerturbationConfig& config) {
  try {
    const PreparedRecord p = prepare(record, config);
    const auto embeddings = embed_batch(provider, p.inputs);
    return score_from_embeddings(record.id, config.n, embeddings, p.truncated);
  } catch (const Error& e) {
    throw with_record_context(e, record.id);
  }
}

ClusterScores score_cluster(EmbeddingProvider& provider,
                            std::span<const InstructionRecord* const> records,
                            const PerturbationConfig& config,
                            const ScoreOptions& options) {
  if (records.empty()) {
    throw Error(ErrorKind::kInvariant, "score_cluster called with no records");
  }
  const std::size_t per_batch = std::max<std::size_t>(options.records_per_batch, 1);
  const std::size_t chunks = (records.size() + per_batch - 1) / per_batch;

  std::vector<std::vector<std::optional<EntryScore>>> results(chunks);
  std::vector<std::vector<ScoreFailure>> failures(chunks);
  std::vector<std::exception_ptr> errors(chunks);

  const auto num_chunks = static_cast<std::ptrdiff_t>(chunks);
  const int workers = static_cast<int>(std::max<std::size_t>(options.workers, 1));
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::ptrdiff_t c = 0; c < num_chunks; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * per_batch;
    const std::size_t len = std::min(per_batch, records.size() - begin);
    const auto chunk = records.subspan(begin, len);
    try {
      try {
        for (auto& s : score_chunk(provider, chunk, config)) {
          results[c].emplace_back(std::move(s));
        }
      } catch (const Error&) {
        if (!options.skip_errors) throw;
        // Isolate the failing records.
        results[c].clear();
        for (const auto* r : chunk) {
          try {
            results[c].emplace_back(score_entry(provider, *r, config));
          } catch (const Error& e) {
            failures[c].push_back({r->id, e.what()});
          }
        }
      }
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }

  for (std::size_t c = 0; c < chunks; ++c) {
    if (!errors[c]) continue;
    try {
      std::rethrow_exception(errors[c]);
    } catch (const Error& e) {
      // Name the first record of the failing batch.
      throw with_record_context(e, records[c * per_batch]->id);
    }
  }

  ClusterScores out;
  for (std::size_t c = 0; c < chunks; ++c) {
    for (auto& s : results[c]) out.scores.push_back(std::move(*s));
    for (auto& f : failures[c]) out.failures.push_back(std::move(f));
  }
  return out;
}

ClusterRanking rank_cluster(std::size_t cluster_index,
                            std::span<const EntryScore> scores) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a].score != scores[b].score) return scores[a].score > scores[b].score;
    return scores[a].record_id < scores[b].record_id;
  });
  ClusterRanking r;
  r.cluster_index = cluster_index;
  r.ordered.reserve(order.size());
  r.scores.reserve(order.size());
  for (std::size_t i : order) {
    r.ordered.push_back(scores[i].record_id);
    r.scores.push_back(scores[i].score);
  }
  return r;
}

nlohmann::json to_json(const EntryScore& score, std::size_t cluster) {
  return {{"record_id", score.record_id}, {"cluster", cluster},
          {"n", score.n},                 {"score", score.score},
          {"distances", score.distances}, {"truncated", score.truncated}};
}

EntryScore entry_score_from_json(const nlohmann::json& j) {
  EntryScore s;
  s.record_id = j.at("record_id").get<std::string>();
  s.n = j.at("n").get<std::size_t>();
  s.score = j.at("score").get<double>();
  s.distances = j.at("distances").get<std::vector<double>>();
  s.truncated = j.value("truncated", false);
  return s;
}

}  // namespace curagen
