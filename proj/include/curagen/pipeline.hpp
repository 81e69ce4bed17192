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

#ifndef CURAGEN_PIPELINE_HPP_
#define CURAGEN_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "curagen/cluster.hpp"
#include "curagen/embed.hpp"
#include "curagen/select.hpp"
#include "json.hpp"

namespace curagen {

struct PipelineConfig {
  std::string corpus_path;
  std::optional<std::uint64_t> seed;
  std::string output_dir = "curagen_out";

  ProviderSpec cluster_provider;
  ProviderSpec score_provider;
  bool cache = true;

  std::size_t k_min = 2;
  std::size_t k_max = 16;
  std::optional<std::size_t> k;  // fixed cluster count; skips argmax
  KMeansParams clustering;
  std::size_t silhouette_sample_cap = 5000;

  std::size_t variants = 5;
  std::optional<std::size_t> n;  // empty means "auto" (tuned)
  std::size_t tune_sample = 512;
  std::size_t tune_n_max = 8;
  std::optional<std::size_t> tune_cluster;  // default: largest cluster

  SelectionMethod method = SelectionMethod::kGeneralizationTopK;
  std::size_t quota = 15000;
  std::optional<std::size_t> size;  // random / kcenter-greedy
  bool random_per_cluster = false;
  bool kcenter_start_first = false;

  std::size_t workers = 1;
  std::size_t records_per_batch = 16;
  bool skip_errors = false;
};

// Reads a config object. Unknown keys are rejected. The "n" key takes an
// integer or "auto".
PipelineConfig config_from_json(const nlohmann::json& j);
// Canonical form, used for fingerprints.
nlohmann::json to_json(const PipelineConfig& config);
PipelineConfig load_config(const std::string& path);
// Throws kConfig when the configuration cannot run.
void validate(const PipelineConfig& config);

// Parses a provider argument: a JSON object, "mock[:dim[:seed]]",
// "file:PATH[@NAME]" or "remote:URL".
ProviderSpec parse_provider_arg(std::string_view arg);

// Per-stage seeds derived from the top-level seed.
struct StageSeeds {
  std::uint64_t cluster;
  std::uint64_t silhouette;
  std::uint64_t tune_sample;
  std::uint64_t tune;
  std::uint64_t score;
  std::uint64_t select;
};
StageSeeds derive_stage_seeds(std::uint64_t seed);

enum class Stage { kIngest, kEmbed, kSweepK, kCluster, kTuneN, kScore, kSelect, kReport };

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view name);
const std::vector<Stage>& all_stages();

// Artifact file names inside the output directory.
namespace artifacts {
inline constexpr const char* kIngest = "ingest.json";
inline constexpr const char* kEmbeddings = "embeddings.jsonl";
inline constexpr const char* kCache = "embedding_cache.jsonl";
inline constexpr const char* kSweep = "k_sweep.json";
inline constexpr const char* kModel = "kmeans_model.json";
inline constexpr const char* kAssignments = "assignments.jsonl";
inline constexpr const char* kTune = "tune.json";
inline constexpr const char* kTuneCurve = "tune_curve.csv";
inline constexpr const char* kScores = "scores.jsonl";
inline constexpr const char* kExclusions = "score_exclusions.json";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kSelected = "selected.jsonl";
inline constexpr const char* kTimings = "timings.json";
inline constexpr const char* kSummary = "summary.json";
inline constexpr const char* kState = "state.json";
}  // namespace artifacts

// Runs stages against artifacts in config.output_dir. Every stage reads
// its inputs from disk, so stages can be invoked one at a time.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, bool resume, std::ostream* log = nullptr);

  // Runs one stage. Returns false if it was skipped by --resume. Errors are
  // rethrown with the stage name prefixed.
  bool run_stage(Stage stage);

  // All stages in order, then timings.json and summary.json.
  void run_all();

  const std::map<std::string, double>& timings() const { return timings_; }
  std::string path(std::string_view artifact) const;

 private:
  void ingest();
  void embed();
  void sweep_k();
  void cluster();
  void tune_n();
  void score();
  void select();
  void report();

  std::string stage_fingerprint(Stage stage) const;
  bool outputs_exist(Stage stage) const;
  std::shared_ptr<EmbeddingProvider> provider(const ProviderSpec& spec);
  void save_cache();
  void say(const std::string& line) const;

  PipelineConfig config_;
  StageSeeds seeds_;
  bool resume_;
  std::ostream* log_;
  std::shared_ptr<EmbeddingStore> cache_;
  std::map<std::string, double> timings_;
};

// Renders summary.json as text.
std::string render_summary(const nlohmann::json& summary);

}  // namespace curagen

#endif  // CURAGEN_PIPELINE_HPP_
