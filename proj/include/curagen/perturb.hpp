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

#ifndef CURAGEN_PERTURB_HPP_
#define CURAGEN_PERTURB_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace curagen {

// Splits on runs of Unicode whitespace (UTF-8 input); empty tokens are
// dropped. Punctuation stays attached to its word.
std::vector<std::string> tokenize_words(std::string_view text);

struct PerturbationConfig {
  std::size_t n = 1;         // words deleted per variant
  std::size_t variants = 5;  // N, variants per entry
  std::uint64_t seed = 0;
};

struct PerturbedVariant {
  std::string record_id;
  std::size_t variant_index = 0;
  std::vector<std::size_t> deleted_positions;  // sorted word indices
  std::string text;
  // Set when the instruction had no more than n words, so only
  // word_count - 1 could be deleted.
  bool truncated = false;
};

// Seed of one variant. Scoped by record so draws do not depend on corpus
// order.
std::uint64_t variant_seed(std::uint64_t seed, std::string_view record_scope,
                           std::size_t variant_index);

// Deletes min(n, words.size() - 1) distinct positions drawn with `seed`.
// `words` must be tokenize_words(original). With nothing deleted the text
// is `original` verbatim.
PerturbedVariant delete_words(std::string_view original,
                              const std::vector<std::string>& words,
                              std::size_t n, std::uint64_t seed);

// N word-deletion variants of an instruction. Throws when the instruction
// has no words.
std::vector<PerturbedVariant> perturb(std::string_view instruction,
                                      const PerturbationConfig& config,
                                      std::string_view record_scope);

nlohmann::json to_json(const PerturbedVariant& variant);

}  // namespace curagen

#endif  // CURAGEN_PERTURB_HPP_
