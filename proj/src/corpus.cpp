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

#include "curagen/corpus.hpp"

#include <unordered_map>

#include "curagen/common.hpp"
#include "curagen/perturb.hpp"
#include "json.hpp"

namespace curagen {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& source, std::size_t line,
                       const std::string& what) {
  throw Error(ErrorKind::kIo,
              source + ":" + std::to_string(line) + ": " + what);
}

std::optional<std::string> optional_string(const json& obj, const char* key,
                                           const std::string& source,
                                           std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) fail(source, line, std::string(key) + " must be a string");
  return it->get<std::string>();
}

}  // namespace

Corpus parse_corpus(std::string_view content, std::string source_path) {
  Corpus corpus;
  corpus.source_path = std::move(source_path);
  corpus.fingerprint = sha256_hex(content);
  const std::string& src = corpus.source_path;

  std::unordered_map<std::string, std::size_t> first_line_of;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(src, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) fail(src, line_no, "record must be a JSON object");

    InstructionRecord rec;
    auto id = optional_string(obj, "id", src, line_no);
    if (!id || id->empty()) fail(src, line_no, "missing or empty id");
    rec.id = std::move(*id);
    auto instruction = optional_string(obj, "instruction", src, line_no);
    if (!instruction || instruction->empty()) {
      fail(src, line_no, "missing or empty instruction in record '" + rec.id + "'");
    }
    if (tokenize_words(*instruction).empty()) {
      fail(src, line_no, "instruction of record '" + rec.id + "' has no words");
    }
    rec.instruction = std::move(*instruction);
    rec.answer = optional_string(obj, "answer", src, line_no).value_or("");
    rec.image_ref = optional_string(obj, "image_ref", src, line_no);
    rec.tag = optional_string(obj, "tag", src, line_no);
    rec.source_line = std::string(line);

    auto [it, inserted] = first_line_of.emplace(rec.id, line_no);
    if (!inserted) {
      fail(src, line_no,
           "duplicate id '" + rec.id + "' (first seen on line " +
               std::to_string(it->second) + ")");
    }
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

Corpus load_corpus(const std::string& path) {
  return parse_corpus(read_file(path), path);
}

std::string composite_text(const InstructionRecord& record,
                           std::optional<std::string_view> variant_instruction) {
  std::string out;
  if (record.image_ref) {
    out += "<image:";
    out += *record.image_ref;
    out += ">\n";
  }
  out += variant_instruction ? *variant_instruction
                             : std::string_view(record.instruction);
  out.push_back('\n');
  out += record.answer;
  return out;
}

}  // namespace curagen
