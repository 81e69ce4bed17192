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

#ifndef CURAGEN_TUNE_HPP_
#define CURAGEN_TUNE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "curagen/corpus.hpp"
#include "curagen/embed.hpp"
#include "json.hpp"

namespace curagen {

struct TuneLevel {
  std::size_t n = 0;
  double s_pool = 0.0;  // mean distance over the sample at this level
  double d = 0.0;       // s_pool(n) - s_pool(n - 1), with s_pool(0) = 0
  std::size_t truncated = 0;  // sample records that could not delete n words
};

struct SweepAggregate {
  std::size_t n_max = 0;
  std::vector<TuneLevel> levels;  // n = 1 .. n_max
  std::size_t chosen_n = 0;
  std::vector<std::string> sample_ids;
};

// argmax of the relative differences, 1-based; smallest n on ties.
std::size_t choose_n(std::span<const double> d);
std::size_t choose_n(const SweepAggregate& aggregate);

// Builds levels (with first differences) and chosen_n from a pool curve
// s_pool(1..n_max).
SweepAggregate aggregate_from_pool(std::span<const double> s_pool);

// For each sample record and level m = 1..n_max, deletes m words (one
// seeded draw per record and level), embeds the composite next to the
// original, and averages the distances over the sample.
SweepAggregate sweep_perturbation(EmbeddingProvider& provider,
                                  std::span<const InstructionRecord* const> sample,
                                  std::size_t n_max, std::uint64_t seed,
                                  std::size_t workers = 1);

// Seeded uniform choice of min(k, population) indices, returned sorted.
std::vector<std::size_t> draw_tune_sample(std::size_t population, std::size_t k,
                                          std::uint64_t seed);

nlohmann::json to_json(const SweepAggregate& aggregate);
SweepAggregate aggregate_from_json(const nlohmann::json& j);
// "n,D" CSV with a header row.
std::string curve_csv(const SweepAggregate& aggregate);

}  // namespace curagen

#endif  // CURAGEN_TUNE_HPP_
