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

#ifndef CURAGEN_CORPUS_HPP_
#define CURAGEN_CORPUS_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace curagen {

struct InstructionRecord {
  std::string id;
  std::optional<std::string> image_ref;
  std::string instruction;
  std::string answer;
  std::optional<std::string> tag;
  // The unmodified source line, re-emitted for selected records.
  std::string source_line;
};

struct Corpus {
  std::vector<InstructionRecord> records;
  std::string source_path;
  // sha256 of the file bytes.
  std::string fingerprint;
};

// Parses JSONL content (one record object per line, blank lines skipped).
// Throws Error(kIo) naming the offending line on malformed JSON, missing or
// empty id/instruction, a wordless instruction, or a duplicate id.
Corpus parse_corpus(std::string_view content, std::string source_path);

Corpus load_corpus(const std::string& path);

// The string submitted to embedding providers:
//   "<image:{image_ref}>\n{instruction}\n{answer}"
// with the image segment (and its newline) omitted when there is no image.
// `variant_instruction`, when given, replaces the record's instruction.
std::string composite_text(
    const InstructionRecord& record,
    std::optional<std::string_view> variant_instruction = std::nullopt);

}  // namespace curagen

#endif  // CURAGEN_CORPUS_HPP_
