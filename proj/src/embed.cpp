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

#include "curagen/embed.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "curagen/common.hpp"
#include "curagen/perturb.hpp"
#include "httplib.h"

namespace curagen {

using nlohmann::json;

std::string_view to_string(Modality modality) {
  return modality == Modality::kTextOnly ? "text-only" : "text+image-ref";
}

Modality modality_from_string(std::string_view text) {
  if (text == "text-only") return Modality::kTextOnly;
  if (text == "text+image-ref") return Modality::kTextImageRef;
  throw Error(ErrorKind::kConfig, "unknown modality '" + std::string(text) + "'");
}

std::vector<EmbeddingVector> embed_batch(EmbeddingProvider& provider,
                                         std::span<const std::string> inputs) {
  if (inputs.empty()) {
    throw Error(ErrorKind::kInvariant, "embed_batch called with no inputs");
  }
  for (const auto& s : inputs) {
    if (s.empty()) {
      throw Error(ErrorKind::kInvariant, "embed_batch input is empty");
    }
  }
  auto out = provider.embed(inputs);
  if (out.size() != inputs.size()) {
    throw Error(ErrorKind::kProvider,
                provider.name() + " returned " + std::to_string(out.size()) +
                    " vectors for " + std::to_string(inputs.size()) + " inputs");
  }
  for (const auto& v : out) {
    if (v.size() != provider.dim()) {
      throw Error(ErrorKind::kProvider,
                  provider.name() + " returned dim " + std::to_string(v.size()) +
                      ", declared " + std::to_string(provider.dim()));
    }
    if (!all_finite(v)) {
      throw Error(ErrorKind::kProvider,
                  provider.name() + " returned a non-finite component");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mock

EmbeddingVector unit_word_vector(std::string_view word, std::size_t dim,
                                 std::uint64_t seed) {
  Rng rng(derive_seed(seed, word));
  EmbeddingVector v(dim);
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      norm_sq += x * x;
    }
  } while (norm_sq == 0.0);
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (auto& x : v) x *= inv;
  return v;
}

EmbeddingVector mock_embed(std::string_view text, std::size_t dim,
                           std::uint64_t seed) {
  if (dim < 8) {
    throw Error(ErrorKind::kConfig, "mock embedding dim must be >= 8");
  }
  auto words = tokenize_words(text);
  if (words.empty()) {
    throw Error(ErrorKind::kInvariant, "mock_embed: text has no words");
  }
  std::sort(words.begin(), words.end());
  EmbeddingVector sum(dim, 0.0);
  EmbeddingVector u;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i == 0 || words[i] != words[i - 1]) u = unit_word_vector(words[i], dim, seed);
    for (std::size_t j = 0; j < dim; ++j) sum[j] += u[j];
  }
  return sum;
}

MockProvider::MockProvider(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim < 8) {
    throw Error(ErrorKind::kConfig, "mock embedding dim must be >= 8");
  }
}

std::string MockProvider::name() const {
  return "mock:d" + std::to_string(dim_) + ":s" + std::to_string(seed_);
}

std::vector<EmbeddingVector> MockProvider::embed(
    std::span<const std::string> inputs) {
  std::vector<EmbeddingVector> out;
  out.reserve(inputs.size());
  for (const auto& s : inputs) out.push_back(mock_embed(s, dim_, seed_));
  return out;
}

// ---------------------------------------------------------------------------
// Store

std::string cache_key(std::string_view provider_name, std::string_view input) {
  std::string buf;
  buf.reserve(provider_name.size() + input.size() + 1);
  buf.append(provider_name);
  buf.push_back('\0');
  buf.append(input);
  return sha256_hex(buf);
}

EmbeddingStore::EmbeddingStore(EmbeddingStore&& other) noexcept {
  std::lock_guard lock(other.mu_);
  dim_ = other.dim_;
  entries_ = std::move(other.entries_);
}

EmbeddingStore& EmbeddingStore::operator=(EmbeddingStore&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mu_, other.mu_);
    dim_ = other.dim_;
    entries_ = std::move(other.entries_);
  }
  return *this;
}

std::size_t EmbeddingStore::dim() const {
  std::lock_guard lock(mu_);
  return dim_;
}

std::size_t EmbeddingStore::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::optional<EmbeddingVector> EmbeddingStore::find(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingStore::insert(const std::string& key, EmbeddingVector vector) {
  if (vector.empty()) {
    throw Error(ErrorKind::kIo, "embedding for key " + key + " is empty");
  }
  if (!all_finite(vector)) {
    throw Error(ErrorKind::kIo, "embedding for key " + key + " is non-finite");
  }
  std::lock_guard lock(mu_);
  if (entries_.empty() && dim_ == 0) {
    dim_ = vector.size();
  } else if (vector.size() != dim_) {
    throw Error(ErrorKind::kIo, "embedding for key " + key + " has dim " +
                                    std::to_string(vector.size()) +
                                    ", store dim is " + std::to_string(dim_));
  }
  entries_[key] = std::move(vector);
}

std::string EmbeddingStore::serialize() const {
  std::lock_guard lock(mu_);
  std::string out;
  for (const auto& [key, vec] : entries_) {
    out += json{{"key", key}, {"vector", vec}}.dump();
    out.push_back('\n');
  }
  return out;
}

void EmbeddingStore::save(const std::string& path) const {
  write_file(path, serialize());
}

EmbeddingStore parse_store(std::string_view content, const std::string& source) {
  EmbeddingStore store;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    const std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    // NaN/Infinity are not JSON; accept them as strings or bare tokens so the
    // error names the real problem instead of a parse failure.
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() &&
        (line.find("NaN") != std::string_view::npos ||
         line.find("Infinity") != std::string_view::npos)) {
      throw Error(ErrorKind::kIo, where + "non-finite vector component");
    }
    if (obj.is_discarded() || !obj.is_object() || !obj.contains("key") ||
        !obj["key"].is_string() || !obj.contains("vector") ||
        !obj["vector"].is_array()) {
      throw Error(ErrorKind::kIo, where + "expected {\"key\":..., \"vector\":[...]}");
    }
    EmbeddingVector v;
    v.reserve(obj["vector"].size());
    for (const auto& x : obj["vector"]) {
      if (x.is_number()) {
        v.push_back(x.get<double>());
      } else if (x.is_string()) {
        throw Error(ErrorKind::kIo, where + "non-finite vector component");
      } else {
        throw Error(ErrorKind::kIo, where + "vector components must be numbers");
      }
    }
    if (!all_finite(v)) {
      throw Error(ErrorKind::kIo, where + "non-finite vector component");
    }
    if (store.size() > 0 && v.size() != store.dim()) {
      throw Error(ErrorKind::kIo, where + "dimension mismatch: " +
                                      std::to_string(v.size()) + " vs " +
                                      std::to_string(store.dim()));
    }
    store.insert(obj["key"].get<std::string>(), std::move(v));
  }
  return store;
}

EmbeddingStore load_precomputed(const std::string& path) {
  return parse_store(read_file(path), path);
}

// ---------------------------------------------------------------------------
// File

FileProvider::FileProvider(std::shared_ptr<const EmbeddingStore> store,
                           std::string name, Modality modality)
    : store_(std::move(store)), name_(std::move(name)), modality_(modality) {
  if (store_->size() == 0) {
    throw Error(ErrorKind::kConfig, "precomputed embedding store is empty");
  }
}

std::vector<EmbeddingVector> FileProvider::embed(
    std::span<const std::string> inputs) {
  std::vector<EmbeddingVector> out;
  out.reserve(inputs.size());
  for (const auto& s : inputs) {
    const std::string key = cache_key(name_, s);
    auto v = store_->find(key);
    if (!v) {
      throw Error(ErrorKind::kProvider,
                  "key not found in precomputed store: " + key);
    }
    out.push_back(std::move(*v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Remote

namespace {

std::unique_ptr<httplib::Client> make_client(const RemoteOptions& options) {
  auto client = std::make_unique<httplib::Client>(options.url);
  if (!client->is_valid()) {
    throw Error(ErrorKind::kConfig, "invalid provider url '" + options.url + "'");
  }
  const auto secs = static_cast<time_t>(options.timeout_seconds);
  const auto usecs = static_cast<time_t>(
      (options.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client->set_connection_timeout(secs, usecs);
  client->set_read_timeout(secs, usecs);
  client->set_write_timeout(secs, usecs);
  return client;
}

std::string describe_failure(const httplib::Result& res) {
  if (!res) return "connection failed: " + httplib::to_string(res.error());
  std::string msg = "HTTP " + std::to_string(res->status);
  auto body = json::parse(res->body, nullptr, false);
  if (body.is_object() && body.contains("error") && body["error"].is_string()) {
    msg += ": " + body["error"].get<std::string>();
  }
  return msg;
}

// Runs `attempt` up to retries + 1 times. `attempt` returns an empty string
// on success or a failure description.
template <typename Attempt>
void with_retries(const RemoteOptions& options, const std::string& what,
                  Attempt attempt) {
  std::string last;
  for (std::size_t i = 0; i <= options.retries; ++i) {
    if (i > 0 && options.retry_backoff_ms > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(options.retry_backoff_ms * static_cast<int>(i)));
    }
    last = attempt();
    if (last.empty()) return;
  }
  throw Error(ErrorKind::kProvider,
              what + " at " + options.url + " failed after " +
                  std::to_string(options.retries + 1) + " attempts: " + last);
}

}  // namespace

RemoteProvider::RemoteProvider(RemoteOptions options)
    : options_(std::move(options)) {
  if (options_.max_batch == 0) {
    throw Error(ErrorKind::kConfig, "remote max_batch must be >= 1");
  }
  auto client = make_client(options_);
  with_retries(options_, "GET /v1/info", [&]() -> std::string {
    auto res = client->Get("/v1/info");
    if (!res || res->status / 100 != 2) return describe_failure(res);
    auto body = json::parse(res->body, nullptr, false);
    if (!body.is_object() || !body.contains("dim") ||
        !body["dim"].is_number_unsigned() || body["dim"].get<std::size_t>() == 0) {
      return "malformed /v1/info body";
    }
    dim_ = body["dim"].get<std::size_t>();
    name_ = body.value("name", std::string("remote"));
    if (body.contains("modality") && body["modality"].is_string()) {
      try {
        modality_ = modality_from_string(body["modality"].get<std::string>());
      } catch (const Error&) {
        return "unknown modality in /v1/info";
      }
    }
    return {};
  });
}

bool RemoteProvider::healthy() const {
  auto client = make_client(options_);
  auto res = client->Get("/healthz");
  return res && res->status == 200;
}

std::vector<EmbeddingVector> RemoteProvider::embed(
    std::span<const std::string> inputs) {
  std::vector<EmbeddingVector> out;
  out.reserve(inputs.size());
  for (std::size_t start = 0; start < inputs.size(); start += options_.max_batch) {
    const std::size_t len = std::min(options_.max_batch, inputs.size() - start);
    auto chunk = embed_chunk(inputs.subspan(start, len));
    for (auto& v : chunk) out.push_back(std::move(v));
  }
  return out;
}

std::vector<EmbeddingVector> RemoteProvider::embed_chunk(
    std::span<const std::string> inputs) {
  const std::string payload =
      json{{"inputs", std::vector<std::string>(inputs.begin(), inputs.end())}}.dump();
  auto client = make_client(options_);
  std::vector<EmbeddingVector> out;
  with_retries(options_, "POST /v1/embed", [&]() -> std::string {
    auto res = client->Post("/v1/embed", payload, "application/json");
    if (!res || res->status / 100 != 2) return describe_failure(res);
    auto body = json::parse(res->body, nullptr, false);
    if (!body.is_object() || !body.contains("vectors") || !body["vectors"].is_array()) {
      return "malformed /v1/embed body";
    }
    if (body.contains("dim") && body["dim"] != dim_) {
      return "dimension mismatch: response dim " + body["dim"].dump() +
             ", declared " + std::to_string(dim_);
    }
    const auto& vectors = body["vectors"];
    if (vectors.size() != inputs.size()) {
      return "expected " + std::to_string(inputs.size()) + " vectors, got " +
             std::to_string(vectors.size());
    }
    std::vector<EmbeddingVector> parsed;
    parsed.reserve(vectors.size());
    for (const auto& vec : vectors) {
      if (!vec.is_array() || vec.size() != dim_) {
        return "dimension mismatch against declared dim " + std::to_string(dim_);
      }
      EmbeddingVector v;
      v.reserve(dim_);
      for (const auto& x : vec) {
        if (!x.is_number()) return "non-numeric vector component";
        v.push_back(x.get<double>());
      }
      parsed.push_back(std::move(v));
    }
    out = std::move(parsed);
    return {};
  });
  return out;
}

// ---------------------------------------------------------------------------
// Wrappers

CachingProvider::CachingProvider(std::shared_ptr<EmbeddingProvider> inner,
                                 std::shared_ptr<EmbeddingStore> store)
    : inner_(std::move(inner)), store_(std::move(store)) {}

std::vector<EmbeddingVector> CachingProvider::embed(
    std::span<const std::string> inputs) {
  const std::string name = inner_->name();
  std::vector<EmbeddingVector> out(inputs.size());
  std::vector<std::string> keys(inputs.size());
  std::vector<std::string> misses;
  std::vector<std::size_t> miss_index;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    keys[i] = cache_key(name, inputs[i]);
    if (auto hit = store_->find(keys[i])) {
      out[i] = std::move(*hit);
    } else {
      misses.push_back(inputs[i]);
      miss_index.push_back(i);
    }
  }
  if (!misses.empty()) {
    auto fresh = embed_batch(*inner_, misses);
    for (std::size_t m = 0; m < fresh.size(); ++m) {
      store_->insert(keys[miss_index[m]], fresh[m]);
      out[miss_index[m]] = std::move(fresh[m]);
    }
  }
  return out;
}

std::vector<EmbeddingVector> NormalizingProvider::embed(
    std::span<const std::string> inputs) {
  auto out = embed_batch(*inner_, inputs);
  for (auto& v : out) {
    double norm_sq = 0.0;
    for (double x : v) norm_sq += x * x;
    if (norm_sq == 0.0) continue;
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& x : v) x *= inv;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Specs

ProviderSpec provider_spec_from_json(const json& j) {
  if (!j.is_object()) {
    throw Error(ErrorKind::kConfig, "provider config must be an object");
  }
  ProviderSpec spec;
  try {
    spec.type = j.value("type", spec.type);
    spec.dim = j.value("dim", spec.dim);
    spec.seed = j.value("seed", spec.seed);
    spec.path = j.value("path", spec.path);
    spec.name = j.value("name", spec.name);
    spec.modality = j.value("modality", spec.modality);
    spec.normalize = j.value("normalize", spec.normalize);
    spec.remote.url = j.value("url", spec.remote.url);
    spec.remote.retries = j.value("retries", spec.remote.retries);
    spec.remote.timeout_seconds = j.value("timeout_seconds", spec.remote.timeout_seconds);
    spec.remote.max_batch = j.value("max_batch", spec.remote.max_batch);
    spec.remote.retry_backoff_ms = j.value("retry_backoff_ms", spec.remote.retry_backoff_ms);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("provider config: ") + e.what());
  }
  if (spec.type != "mock" && spec.type != "file" && spec.type != "remote") {
    throw Error(ErrorKind::kConfig, "unknown provider type '" + spec.type + "'");
  }
  if (spec.type == "file" && spec.path.empty()) {
    throw Error(ErrorKind::kConfig, "file provider needs a path");
  }
  if (spec.type == "remote" && spec.remote.url.empty()) {
    throw Error(ErrorKind::kConfig, "remote provider needs a url");
  }
  return spec;
}

json to_json(const ProviderSpec& spec) {
  json j{{"type", spec.type}, {"normalize", spec.normalize}};
  if (spec.type == "mock") {
    j["dim"] = spec.dim;
    j["seed"] = spec.seed;
  } else if (spec.type == "file") {
    j["path"] = spec.path;
    j["name"] = spec.name;
    j["modality"] = spec.modality;
  } else {
    j["url"] = spec.remote.url;
    j["retries"] = spec.remote.retries;
    j["timeout_seconds"] = spec.remote.timeout_seconds;
    j["max_batch"] = spec.remote.max_batch;
    j["retry_backoff_ms"] = spec.remote.retry_backoff_ms;
  }
  return j;
}

std::shared_ptr<EmbeddingProvider> make_provider(const ProviderSpec& spec) {
  std::shared_ptr<EmbeddingProvider> p;
  if (spec.type == "mock") {
    p = std::make_shared<MockProvider>(spec.dim, spec.seed);
  } else if (spec.type == "file") {
    auto store = std::make_shared<EmbeddingStore>(load_precomputed(spec.path));
    p = std::make_shared<FileProvider>(std::move(store),
                                       spec.name.empty() ? "file" : spec.name,
                                       modality_from_string(spec.modality));
  } else if (spec.type == "remote") {
    p = std::make_shared<RemoteProvider>(spec.remote);
  } else {
    throw Error(ErrorKind::kConfig, "unknown provider type '" + spec.type + "'");
  }
  if (spec.normalize) p = std::make_shared<NormalizingProvider>(std::move(p));
  return p;
}

}  // namespace curagen
