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

#ifndef CURAGEN_EMBED_HPP_
#define CURAGEN_EMBED_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace curagen {

using EmbeddingVector = std::vector<double>;

enum class Modality { kTextOnly, kTextImageRef };

std::string_view to_string(Modality modality);
Modality modality_from_string(std::string_view text);

// Maps input strings to fixed-dimension vectors. Implementations must be
// safe for concurrent embed() calls and deterministic for fixed state.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual Modality modality() const { return Modality::kTextOnly; }

  // Raw batch call. Use embed_batch(), which validates the result.
  virtual std::vector<EmbeddingVector> embed(
      std::span<const std::string> inputs) = 0;
};

// Embeds `inputs` in order. Inputs must be nonempty strings. Checks that the
// provider returned one finite vector of its declared dim per input.
std::vector<EmbeddingVector> embed_batch(EmbeddingProvider& provider,
                                         std::span<const std::string> inputs);

// Seeded unit vector for one word. Same (word, dim, seed) gives the same
// direction.
EmbeddingVector unit_word_vector(std::string_view word, std::size_t dim,
                                 std::uint64_t seed);

// Sum of the unit word vectors of every whitespace token of `text`. Tokens
// are summed in sorted order so the result does not depend on word order.
// Requires dim >= 8 and at least one token.
EmbeddingVector mock_embed(std::string_view text, std::size_t dim,
                           std::uint64_t seed);

class MockProvider : public EmbeddingProvider {
 public:
  MockProvider(std::size_t dim, std::uint64_t seed);

  std::string name() const override;
  std::size_t dim() const override { return dim_; }
  std::vector<EmbeddingVector> embed(
      std::span<const std::string> inputs) override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Cache/store key: sha256 of provider name and input, NUL-separated.
std::string cache_key(std::string_view provider_name, std::string_view input);

// key -> vector map with one shared dim. Thread-safe.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(EmbeddingStore&& other) noexcept;
  EmbeddingStore& operator=(EmbeddingStore&& other) noexcept;

  std::size_t dim() const;
  std::size_t size() const;
  std::optional<EmbeddingVector> find(const std::string& key) const;
  // Throws on a dim mismatch or a non-finite component.
  void insert(const std::string& key, EmbeddingVector vector);

  // JSONL, one {"key":..., "vector":[...]} per line, sorted by key.
  std::string serialize() const;
  void save(const std::string& path) const;

 private:
  mutable std::mutex mu_;
  std::size_t dim_ = 0;
  std::map<std::string, EmbeddingVector> entries_;
};

EmbeddingStore parse_store(std::string_view content, const std::string& source);
EmbeddingStore load_precomputed(const std::string& path);

// Looks inputs up in a precomputed store under cache_key(name, input).
class FileProvider : public EmbeddingProvider {
 public:
  FileProvider(std::shared_ptr<const EmbeddingStore> store, std::string name,
               Modality modality = Modality::kTextOnly);

  std::string name() const override { return name_; }
  std::size_t dim() const override { return store_->dim(); }
  Modality modality() const override { return modality_; }
  std::vector<EmbeddingVector> embed(
      std::span<const std::string> inputs) override;

 private:
  std::shared_ptr<const EmbeddingStore> store_;
  std::string name_;
  Modality modality_;
};

struct RemoteOptions {
  std::string url;  // scheme://host:port
  std::size_t retries = 3;
  double timeout_seconds = 30.0;
  std::size_t max_batch = 64;
  int retry_backoff_ms = 200;
};

// Client for the HTTP embedding protocol:
//   POST /v1/embed {"inputs":[...]} -> {"dim":d,"vectors":[[...],...]}
//   GET  /v1/info -> {"name":...,"dim":d,"modality":...}
//   GET  /healthz -> 200
// Connection failures, non-2xx responses and malformed or wrong-dim bodies
// are retried `retries` times before failing with kProvider.
class RemoteProvider : public EmbeddingProvider {
 public:
  explicit RemoteProvider(RemoteOptions options);

  std::string name() const override { return name_; }
  std::size_t dim() const override { return dim_; }
  Modality modality() const override { return modality_; }
  std::vector<EmbeddingVector> embed(
      std::span<const std::string> inputs) override;

  bool healthy() const;

 private:
  std::vector<EmbeddingVector> embed_chunk(std::span<const std::string> inputs);

  RemoteOptions options_;
  std::string name_;
  std::size_t dim_ = 0;
  Modality modality_ = Modality::kTextOnly;
};

// Serves repeated inputs from a shared store and forwards misses.
class CachingProvider : public EmbeddingProvider {
 public:
  CachingProvider(std::shared_ptr<EmbeddingProvider> inner,
                  std::shared_ptr<EmbeddingStore> store);

  std::string name() const override { return inner_->name(); }
  std::size_t dim() const override { return inner_->dim(); }
  Modality modality() const override { return inner_->modality(); }
  std::vector<EmbeddingVector> embed(
      std::span<const std::string> inputs) override;

 private:
  std::shared_ptr<EmbeddingProvider> inner_;
  std::shared_ptr<EmbeddingStore> store_;
};

// Opt-in L2 normalization of another provider's output.
class NormalizingProvider : public EmbeddingProvider {
 public:
  explicit NormalizingProvider(std::shared_ptr<EmbeddingProvider> inner)
      : inner_(std::move(inner)) {}

  std::string name() const override { return inner_->name() + "+l2"; }
  std::size_t dim() const override { return inner_->dim(); }
  Modality modality() const override { return inner_->modality(); }
  std::vector<EmbeddingVector> embed(
      std::span<const std::string> inputs) override;

 private:
  std::shared_ptr<EmbeddingProvider> inner_;
};

// Provider configuration as it appears in pipeline config files.
struct ProviderSpec {
  std::string type = "mock";  // mock | file | remote
  std::size_t dim = 64;       // mock
  std::uint64_t seed = 0;     // mock
  std::string path;           // file
  std::string name;           // file: provider name the store was keyed by
  std::string modality = "text-only";  // file
  RemoteOptions remote;       // remote
  bool normalize = false;
};

ProviderSpec provider_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProviderSpec& spec);

std::shared_ptr<EmbeddingProvider> make_provider(const ProviderSpec& spec);

}  // namespace curagen

#endif  // CURAGEN_EMBED_HPP_
