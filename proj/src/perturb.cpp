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

#include "curagen/perturb.hpp"

#include <algorithm>

#include "curagen/common.hpp"

namespace curagen {
namespace {

// Decodes one UTF-8 code point at text[i]; returns its byte length.
// Malformed bytes decode as a single non-space unit.
std::size_t decode_utf8(std::string_view text, std::size_t i, char32_t& cp) {
  const auto b0 = static_cast<unsigned char>(text[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= text.size()) return -1;
    const auto b = static_cast<unsigned char>(text[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    cp = b0;
    return 1;
  }
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) {
      cp = (char32_t(b0 & 0x1F) << 6) | char32_t(c1);
      return 2;
    }
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) {
      cp = (char32_t(b0 & 0x0F) << 12) | (char32_t(c1) << 6) | char32_t(c2);
      return 3;
    }
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      cp = (char32_t(b0 & 0x07) << 18) | (char32_t(c1) << 12) |
           (char32_t(c2) << 6) | char32_t(c3);
      return 4;
    }
  }
  cp = 0xFFFD;
  return 1;
}

// Unicode White_Space property.
bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

std::string join_words(const std::vector<std::string>& words,
                       const std::vector<bool>& removed) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (removed[i]) continue;
    if (!out.empty()) out.push_back(' ');
    out += words[i];
  }
  return out;
}

}  // namespace

std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  std::size_t start = std::string_view::npos;
  while (i < text.size()) {
    char32_t cp = 0;
    const std::size_t len = decode_utf8(text, i, cp);
    if (is_unicode_space(cp)) {
      if (start != std::string_view::npos) {
        words.emplace_back(text.substr(start, i - start));
        start = std::string_view::npos;
      }
    } else if (start == std::string_view::npos) {
      start = i;
    }
    i += len;
  }
  if (start != std::string_view::npos) words.emplace_back(text.substr(start));
  return words;
}

std::uint64_t variant_seed(std::uint64_t seed, std::string_view record_scope,
                           std::size_t variant_index) {
  return derive_seed(derive_seed(seed, record_scope), variant_index);
}

PerturbedVariant delete_words(std::string_view original,
                              const std::vector<std::string>& words,
                              std::size_t n, std::uint64_t seed) {
  if (words.empty()) {
    throw Error(ErrorKind::kInvariant, "cannot perturb a zero-word text");
  }
  const std::size_t count = std::min(n, words.size() - 1);
  Rng rng(seed);
  PerturbedVariant v;
  v.deleted_positions = sample_without_replacement(rng, words.size(), count);
  std::sort(v.deleted_positions.begin(), v.deleted_positions.end());
  std::vector<bool> removed(words.size(), false);
  for (std::size_t p : v.deleted_positions) removed[p] = true;
  v.text = count == 0 ? std::string(original) : join_words(words, removed);
  v.truncated = n > 0 && words.size() <= n;
  return v;
}

std::vector<PerturbedVariant> perturb(std::string_view instruction,
                                      const PerturbationConfig& config,
                                      std::string_view record_scope) {
  if (config.variants == 0) {
    throw Error(ErrorKind::kConfig, "perturbation variants must be >= 1");
  }
  const auto words = tokenize_words(instruction);
  if (words.empty()) {
    throw Error(ErrorKind::kInvariant,
                "instruction of record '" + std::string(record_scope) +
                    "' has no words");
  }
  std::vector<PerturbedVariant> out;
  out.reserve(config.variants);
  for (std::size_t v = 0; v < config.variants; ++v) {
    auto variant =
        delete_words(instruction, words, config.n, variant_seed(config.seed, record_scope, v));
    variant.record_id = std::string(record_scope);
    variant.variant_index = v;
    out.push_back(std::move(variant));
  }
  return out;
}

nlohmann::json to_json(const PerturbedVariant& variant) {
  return {{"record_id", variant.record_id},
          {"variant_index", variant.variant_index},
          {"deleted_positions", variant.deleted_positions},
          {"text", variant.text},
          {"truncated", variant.truncated}};
}

}  // namespace curagen
