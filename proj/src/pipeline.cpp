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

#include "curagen/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>
#include <unordered_map>

#include "curagen/corpus.hpp"
#include "curagen/score.hpp"
#include "curagen/tune.hpp"

namespace curagen {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(known.begin(), known.end(),
                     [&](const char* k) { return key == k; })) {
      throw Error(ErrorKind::kConfig, "unknown config key '" + where + key + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key) && !obj[key].is_null()) out = obj[key].get<T>();
}

template <typename T>
void read(const json& obj, const char* key, std::optional<T>& out) {
  if (obj.contains(key) && !obj[key].is_null()) out = obj[key].get<T>();
}

json optional_json(const auto& value) {
  return value ? json(*value) : json(nullptr);
}

}  // namespace

PipelineConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::kConfig, "config must be a JSON object");
  PipelineConfig c;
  try {
    reject_unknown(j,
                   {"corpus", "seed", "output_dir", "cluster_provider",
                    "score_provider", "cache", "k_range", "k", "clustering",
                    "perturbation", "tune", "selection", "workers",
                    "records_per_batch", "skip_errors"},
                   "");
    read(j, "corpus", c.corpus_path);
    read(j, "seed", c.seed);
    read(j, "output_dir", c.output_dir);
    if (j.contains("cluster_provider")) {
      c.cluster_provider = provider_spec_from_json(j["cluster_provider"]);
    }
    if (j.contains("score_provider")) {
      c.score_provider = provider_spec_from_json(j["score_provider"]);
    }
    read(j, "cache", c.cache);
    if (j.contains("k_range")) {
      const auto& r = j["k_range"];
      if (!r.is_array() || r.size() != 2) {
        throw Error(ErrorKind::kConfig, "k_range must be [k_min, k_max]");
      }
      c.k_min = r[0].get<std::size_t>();
      c.k_max = r[1].get<std::size_t>();
    }
    read(j, "k", c.k);
    if (j.contains("clustering")) {
      const auto& s = j["clustering"];
      reject_unknown(s, {"batch_size", "iterations", "restarts", "tolerance",
                         "silhouette_sample_cap"},
                     "clustering.");
      read(s, "batch_size", c.clustering.batch_size);
      read(s, "iterations", c.clustering.iterations);
      read(s, "restarts", c.clustering.restarts);
      read(s, "tolerance", c.clustering.tolerance);
      read(s, "silhouette_sample_cap", c.silhouette_sample_cap);
    }
    if (j.contains("perturbation")) {
      const auto& s = j["perturbation"];
      reject_unknown(s, {"variants", "n"}, "perturbation.");
      read(s, "variants", c.variants);
      if (s.contains("n")) {
        if (s["n"].is_string()) {
          if (s["n"].get<std::string>() != "auto") {
            throw Error(ErrorKind::kConfig, "perturbation.n must be an integer or \"auto\"");
          }
        } else if (!s["n"].is_null()) {
          c.n = s["n"].get<std::size_t>();
        }
      }
    }
    if (j.contains("tune")) {
      const auto& s = j["tune"];
      reject_unknown(s, {"sample_size", "n_max", "cluster"}, "tune.");
      read(s, "sample_size", c.tune_sample);
      read(s, "n_max", c.tune_n_max);
      read(s, "cluster", c.tune_cluster);
    }
    if (j.contains("selection")) {
      const auto& s = j["selection"];
      reject_unknown(s, {"method", "quota", "size", "random_per_cluster",
                         "kcenter_start_first"},
                     "selection.");
      if (s.contains("method")) {
        c.method = selection_method_from_string(s["method"].get<std::string>());
      }
      read(s, "quota", c.quota);
      read(s, "size", c.size);
      read(s, "random_per_cluster", c.random_per_cluster);
      read(s, "kcenter_start_first", c.kcenter_start_first);
    }
    read(j, "workers", c.workers);
    read(j, "records_per_batch", c.records_per_batch);
    read(j, "skip_errors", c.skip_errors);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("config: ") + e.what());
  }
  return c;
}

json to_json(const PipelineConfig& c) {
  return {
      {"corpus", c.corpus_path},
      {"seed", optional_json(c.seed)},
      {"output_dir", c.output_dir},
      {"cluster_provider", to_json(c.cluster_provider)},
      {"score_provider", to_json(c.score_provider)},
      {"cache", c.cache},
      {"k_range", {c.k_min, c.k_max}},
      {"k", optional_json(c.k)},
      {"clustering",
       {{"batch_size", c.clustering.batch_size},
        {"iterations", c.clustering.iterations},
        {"restarts", c.clustering.restarts},
        {"tolerance", c.clustering.tolerance},
        {"silhouette_sample_cap", c.silhouette_sample_cap}}},
      {"perturbation",
       {{"variants", c.variants}, {"n", c.n ? json(*c.n) : json("auto")}}},
      {"tune",
       {{"sample_size", c.tune_sample},
        {"n_max", c.tune_n_max},
        {"cluster", optional_json(c.tune_cluster)}}},
      {"selection",
       {{"method", to_string(c.method)},
        {"quota", c.quota},
        {"size", optional_json(c.size)},
        {"random_per_cluster", c.random_per_cluster},
        {"kcenter_start_first", c.kcenter_start_first}}},
      {"workers", c.workers},
      {"records_per_batch", c.records_per_batch},
      {"skip_errors", c.skip_errors},
  };
}

PipelineConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::kConfig, path + ": not valid JSON");
  return config_from_json(j);
}

void validate(const PipelineConfig& c) {
  auto bad = [](const std::string& msg) { throw Error(ErrorKind::kConfig, msg); };
  if (c.corpus_path.empty()) bad("corpus path is required");
  if (!c.seed) bad("seed is required (config, --seed, or CURAGEN_SEED)");
  if (c.output_dir.empty()) bad("output_dir must not be empty");
  if (c.k_min < 2 || c.k_min > c.k_max) bad("k_range must satisfy 2 <= k_min <= k_max");
  if (c.k && *c.k < 1) bad("k must be >= 1");
  if (c.clustering.batch_size < 1) bad("clustering.batch_size must be >= 1");
  if (c.clustering.iterations < 1) bad("clustering.iterations must be >= 1");
  if (c.variants < 1) bad("perturbation.variants must be >= 1");
  if (c.tune_sample < 1) bad("tune.sample_size must be >= 1");
  if (c.tune_n_max < 1) bad("tune.n_max must be >= 1");
  if (c.quota < 1) bad("selection.quota must be >= 1");
  if (c.workers < 1) bad("workers must be >= 1");
  if (c.method != SelectionMethod::kGeneralizationTopK && !c.random_per_cluster &&
      (!c.size || *c.size < 1)) {
    bad("selection.size is required for method " + std::string(to_string(c.method)));
  }
}

ProviderSpec parse_provider_arg(std::string_view arg) {
  if (!arg.empty() && arg.front() == '{') {
    json j = json::parse(arg, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::kConfig, "provider argument is not valid JSON");
    return provider_spec_from_json(j);
  }
  auto parse_uint = [](std::string_view s) -> std::uint64_t {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(std::string(s), &used);
      if (used != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::kConfig, "bad number '" + std::string(s) + "' in provider argument");
    }
  };
  ProviderSpec spec;
  const auto colon = arg.find(':');
  const std::string_view type = arg.substr(0, colon);
  const std::string_view rest = colon == std::string_view::npos ? "" : arg.substr(colon + 1);
  if (type == "mock") {
    spec.type = "mock";
    if (!rest.empty()) {
      const auto c2 = rest.find(':');
      spec.dim = parse_uint(rest.substr(0, c2));
      if (c2 != std::string_view::npos) spec.seed = parse_uint(rest.substr(c2 + 1));
    }
  } else if (type == "file") {
    spec.type = "file";
    // Provider names may contain ':', so the name follows the last '@'.
    const auto c2 = rest.rfind('@');
    if (c2 == std::string_view::npos) {
      spec.path = std::string(rest);
    } else {
      spec.path = std::string(rest.substr(0, c2));
      spec.name = std::string(rest.substr(c2 + 1));
    }
  } else if (type == "remote") {
    spec.type = "remote";
    spec.remote.url = std::string(rest);
  } else {
    throw Error(ErrorKind::kConfig, "unknown provider '" + std::string(arg) + "'");
  }
  return provider_spec_from_json(to_json(spec));
}

StageSeeds derive_stage_seeds(std::uint64_t seed) {
  return {derive_seed(seed, "cluster"), derive_seed(seed, "silhouette"),
          derive_seed(seed, "tune-sample"), derive_seed(seed, "tune"),
          derive_seed(seed, "score"),   derive_seed(seed, "select")};
}

// ---------------------------------------------------------------------------
// Stages

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kIngest: return "ingest";
    case Stage::kEmbed: return "embed";
    case Stage::kSweepK: return "sweep-k";
    case Stage::kCluster: return "cluster";
    case Stage::kTuneN: return "tune-n";
    case Stage::kScore: return "score";
    case Stage::kSelect: return "select";
    case Stage::kReport: return "report";
  }
  return "unknown";
}

Stage stage_from_string(std::string_view name) {
  for (Stage s : all_stages()) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorKind::kConfig, "unknown stage '" + std::string(name) + "'");
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> kStages = {
      Stage::kIngest, Stage::kEmbed, Stage::kSweepK, Stage::kCluster,
      Stage::kTuneN,  Stage::kScore, Stage::kSelect, Stage::kReport};
  return kStages;
}

namespace {

struct Embeddings {
  std::vector<std::string> ids;
  Matrix vectors;
};

struct AssignmentRow {
  std::string id;
  std::size_t cluster;
  double distance;
};

template <typename Fn>
void for_each_jsonl(const std::string& path, Fn fn) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorKind::kIo, path + ":" + std::to_string(line_no) + ": malformed JSON");
    }
    try {
      fn(j);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kIo, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

json read_json(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::kIo, path + ": malformed JSON");
  return j;
}

Embeddings read_embeddings(const std::string& path) {
  Embeddings e;
  for_each_jsonl(path, [&](const json& j) {
    e.ids.push_back(j.at("id").get<std::string>());
    e.vectors.append_row(j.at("vector").get<std::vector<double>>());
  });
  return e;
}

std::vector<AssignmentRow> read_assignments(const std::string& path) {
  std::vector<AssignmentRow> rows;
  for_each_jsonl(path, [&](const json& j) {
    rows.push_back({j.at("id").get<std::string>(), j.at("cluster").get<std::size_t>(),
                    j.at("distance").get<double>()});
  });
  return rows;
}

std::vector<std::pair<EntryScore, std::size_t>> read_scores(const std::string& path) {
  std::vector<std::pair<EntryScore, std::size_t>> rows;
  for_each_jsonl(path, [&](const json& j) {
    rows.emplace_back(entry_score_from_json(j), j.at("cluster").get<std::size_t>());
  });
  return rows;
}

std::string file_hash(const std::string& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) return "missing";
  return sha256_hex(read_file(path));
}

// Members of each cluster as corpus indices, in corpus order.
std::vector<std::vector<std::size_t>> cluster_members(
    const Corpus& corpus, const std::vector<AssignmentRow>& rows) {
  if (rows.size() != corpus.records.size()) {
    throw Error(ErrorKind::kIo, "assignments do not match the corpus (" +
                                    std::to_string(rows.size()) + " vs " +
                                    std::to_string(corpus.records.size()) + " records)");
  }
  std::size_t k = 0;
  for (const auto& r : rows) k = std::max(k, r.cluster + 1);
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].id != corpus.records[i].id) {
      throw Error(ErrorKind::kIo, "assignment row " + std::to_string(i + 1) +
                                      " has id '" + rows[i].id + "', corpus has '" +
                                      corpus.records[i].id + "'");
    }
    members[rows[i].cluster].push_back(i);
  }
  return members;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

Pipeline::Pipeline(PipelineConfig config, bool resume, std::ostream* log)
    : config_(std::move(config)), resume_(resume), log_(log) {
  validate(config_);
  seeds_ = derive_stage_seeds(*config_.seed);
  omp_set_num_threads(static_cast<int>(config_.workers));
}

std::string Pipeline::path(std::string_view artifact) const {
  return (fs::path(config_.output_dir) / artifact).string();
}

void Pipeline::say(const std::string& line) const {
  if (log_) *log_ << line << '\n';
}

std::shared_ptr<EmbeddingProvider> Pipeline::provider(const ProviderSpec& spec) {
  auto p = make_provider(spec);
  if (!config_.cache) return p;
  if (!cache_) {
    cache_ = std::make_shared<EmbeddingStore>();
    std::error_code ec;
    if (fs::exists(path(artifacts::kCache), ec)) {
      *cache_ = load_precomputed(path(artifacts::kCache));
    }
  }
  return std::make_shared<CachingProvider>(std::move(p), cache_);
}

void Pipeline::save_cache() {
  if (cache_ && cache_->size() > 0) cache_->save(path(artifacts::kCache));
}

std::string Pipeline::stage_fingerprint(Stage stage) const {
  const json cfg = to_json(config_);
  const std::string corpus = file_hash(config_.corpus_path);
  json in{{"stage", to_string(stage)}, {"seed", *config_.seed}};
  switch (stage) {
    case Stage::kIngest:
      in["corpus"] = corpus;
      break;
    case Stage::kEmbed:
      in["corpus"] = corpus;
      in["provider"] = cfg["cluster_provider"];
      break;
    case Stage::kSweepK:
      in["embeddings"] = file_hash(path(artifacts::kEmbeddings));
      in["k_range"] = cfg["k_range"];
      in["clustering"] = cfg["clustering"];
      break;
    case Stage::kCluster:
      in["embeddings"] = file_hash(path(artifacts::kEmbeddings));
      in["k"] = cfg["k"];
      if (!config_.k) in["sweep"] = file_hash(path(artifacts::kSweep));
      in["clustering"] = cfg["clustering"];
      break;
    case Stage::kTuneN:
      in["corpus"] = corpus;
      in["assignments"] = file_hash(path(artifacts::kAssignments));
      in["provider"] = cfg["score_provider"];
      in["tune"] = cfg["tune"];
      break;
    case Stage::kScore:
      in["corpus"] = corpus;
      in["assignments"] = file_hash(path(artifacts::kAssignments));
      in["provider"] = cfg["score_provider"];
      in["perturbation"] = cfg["perturbation"];
      if (!config_.n) in["tune"] = file_hash(path(artifacts::kTune));
      in["skip_errors"] = config_.skip_errors;
      break;
    case Stage::kSelect:
      in["corpus"] = corpus;
      in["selection"] = cfg["selection"];
      in["scores"] = file_hash(path(artifacts::kScores));
      in["assignments"] = file_hash(path(artifacts::kAssignments));
      in["embeddings"] = file_hash(path(artifacts::kEmbeddings));
      break;
    case Stage::kReport:
      in["nonce"] = "always";
      break;
  }
  return sha256_hex(in.dump());
}

bool Pipeline::outputs_exist(Stage stage) const {
  std::vector<const char*> outs;
  switch (stage) {
    case Stage::kIngest: outs = {artifacts::kIngest}; break;
    case Stage::kEmbed: outs = {artifacts::kEmbeddings}; break;
    case Stage::kSweepK: outs = {artifacts::kSweep}; break;
    case Stage::kCluster: outs = {artifacts::kAssignments, artifacts::kModel}; break;
    case Stage::kTuneN:
      if (config_.n) return true;
      outs = {artifacts::kTune, artifacts::kTuneCurve};
      break;
    case Stage::kScore: outs = {artifacts::kScores, artifacts::kExclusions}; break;
    case Stage::kSelect: outs = {artifacts::kManifest, artifacts::kSelected}; break;
    case Stage::kReport: return false;
  }
  std::error_code ec;
  for (const char* o : outs) {
    if (!fs::exists(path(o), ec)) return false;
  }
  return true;
}

bool Pipeline::run_stage(Stage stage) {
  const std::string name(to_string(stage));
  const auto start = std::chrono::steady_clock::now();
  try {
    std::error_code ec;
    fs::create_directories(config_.output_dir, ec);
    if (ec) throw Error(ErrorKind::kIo, "cannot create " + config_.output_dir);

    json state = json::object();
    if (fs::exists(path(artifacts::kState), ec)) {
      state = json::parse(read_file(path(artifacts::kState)), nullptr, false);
      if (!state.is_object()) state = json::object();
    }
    const std::string fingerprint = stage_fingerprint(stage);
    if (resume_ && stage != Stage::kReport && state.value(name, "") == fingerprint &&
        outputs_exist(stage)) {
      say("[" + name + "] inputs unchanged, skipping");
      return false;
    }
    say("[" + name + "] running");
    struct CacheGuard {
      Pipeline* p;
      ~CacheGuard() {
        try {
          p->save_cache();
        } catch (...) {
        }
      }
    } guard{this};
    switch (stage) {
      case Stage::kIngest: ingest(); break;
      case Stage::kEmbed: embed(); break;
      case Stage::kSweepK: sweep_k(); break;
      case Stage::kCluster: cluster(); break;
      case Stage::kTuneN: tune_n(); break;
      case Stage::kScore: score(); break;
      case Stage::kSelect: select(); break;
      case Stage::kReport: report(); break;
    }
    if (stage != Stage::kReport) {
      state[name] = fingerprint;
      write_file(path(artifacts::kState), state.dump(2) + "\n");
    }
  } catch (const Error& e) {
    throw Error(e.kind(), name + ": " + e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kIo, name + ": " + e.what());
  }
  timings_[name] = seconds_since(start);
  return true;
}

void Pipeline::run_all() {
  for (Stage s : all_stages()) {
    if (s == Stage::kReport) break;
    run_stage(s);
  }
  json t = json::object();
  for (const auto& [stage, secs] : timings_) t[stage] = secs;
  write_file(path(artifacts::kTimings), t.dump(2) + "\n");
  run_stage(Stage::kReport);
}

void Pipeline::ingest() {
  const Corpus corpus = load_corpus(config_.corpus_path);
  if (corpus.records.empty()) throw Error(ErrorKind::kIo, "corpus is empty");
  json j{{"source", corpus.source_path},
         {"records", corpus.records.size()},
         {"fingerprint", corpus.fingerprint}};
  write_file(path(artifacts::kIngest), j.dump(2) + "\n");
  say("  " + std::to_string(corpus.records.size()) + " records");
}

void Pipeline::embed() {
  const Corpus corpus = load_corpus(config_.corpus_path);
  auto p = provider(config_.cluster_provider);
  std::vector<std::string> texts;
  texts.reserve(corpus.records.size());
  for (const auto& r : corpus.records) texts.push_back(composite_text(r));

  std::vector<EmbeddingVector> vectors(texts.size());
  const std::size_t per_batch = std::max<std::size_t>(config_.records_per_batch, 1) * 8;
  const auto chunks = static_cast<std::ptrdiff_t>((texts.size() + per_batch - 1) / per_batch);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    try {
      const std::size_t begin = static_cast<std::size_t>(c) * per_batch;
      const std::size_t len = std::min(per_batch, texts.size() - begin);
      auto out = embed_batch(*p, std::span<const std::string>(texts).subspan(begin, len));
      for (std::size_t i = 0; i < len; ++i) vectors[begin + i] = std::move(out[i]);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::string out;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    out += json{{"id", corpus.records[i].id}, {"vector", vectors[i]}}.dump();
    out.push_back('\n');
  }
  write_file(path(artifacts::kEmbeddings), out);
  say("  " + std::to_string(vectors.size()) + " vectors of dim " + std::to_string(p->dim()));
}

void Pipeline::sweep_k() {
  const Embeddings e = read_embeddings(path(artifacts::kEmbeddings));
  const std::size_t k_max = std::min(config_.k_max, e.vectors.rows());
  if (config_.k_min > k_max) {
    throw Error(ErrorKind::kConfig, "k_min exceeds the number of records");
  }
  SilhouetteOptions sopts{config_.silhouette_sample_cap, seeds_.silhouette};
  const KSweepResult r =
      select_k(e.vectors, config_.k_min, k_max, config_.clustering, sopts, seeds_.cluster);
  write_file(path(artifacts::kSweep), to_json(r).dump(2) + "\n");
  say("  chosen p = " + std::to_string(r.chosen_p));
}

void Pipeline::cluster() {
  const Embeddings e = read_embeddings(path(artifacts::kEmbeddings));
  std::size_t k = 0;
  if (config_.k) {
    k = *config_.k;
  } else {
    k = sweep_from_json(read_json(path(artifacts::kSweep))).chosen_p;
  }
  const KMeansModel model =
      minibatch_kmeans(e.vectors, k, config_.clustering, seeds_.cluster ^ k);
  const ClusterAssignment a = assign(model, e.vectors);
  std::string out;
  for (std::size_t i = 0; i < e.ids.size(); ++i) {
    out += json{{"id", e.ids[i]}, {"cluster", a.cluster[i]}, {"distance", a.distance[i]}}.dump();
    out.push_back('\n');
  }
  write_file(path(artifacts::kModel), to_json(model).dump() + "\n");
  write_file(path(artifacts::kAssignments), out);
  say("  k = " + std::to_string(k));
}

void Pipeline::tune_n() {
  if (config_.n) {
    say("  n fixed at " + std::to_string(*config_.n) + ", nothing to tune");
    return;
  }
  const Corpus corpus = load_corpus(config_.corpus_path);
  const auto members = cluster_members(corpus, read_assignments(path(artifacts::kAssignments)));
  std::size_t target = 0;
  if (config_.tune_cluster) {
    target = *config_.tune_cluster;
    if (target >= members.size() || members[target].empty()) {
      throw Error(ErrorKind::kConfig, "tune.cluster " + std::to_string(target) + " is empty");
    }
  } else {
    for (std::size_t c = 1; c < members.size(); ++c) {
      if (members[c].size() > members[target].size()) target = c;
    }
  }
  const auto& pool = members[target];
  std::vector<const InstructionRecord*> sample;
  for (std::size_t i : draw_tune_sample(pool.size(), config_.tune_sample, seeds_.tune_sample)) {
    sample.push_back(&corpus.records[pool[i]]);
  }
  auto p = provider(config_.score_provider);
  const SweepAggregate agg =
      sweep_perturbation(*p, sample, config_.tune_n_max, seeds_.tune, config_.workers);
  json j = to_json(agg);
  j["cluster"] = target;
  write_file(path(artifacts::kTune), j.dump(2) + "\n");
  write_file(path(artifacts::kTuneCurve), curve_csv(agg));
  say("  chosen n = " + std::to_string(agg.chosen_n) + " (cluster " + std::to_string(target) +
      ", K = " + std::to_string(sample.size()) + ")");
}

void Pipeline::score() {
  const Corpus corpus = load_corpus(config_.corpus_path);
  const auto rows = read_assignments(path(artifacts::kAssignments));
  const auto members = cluster_members(corpus, rows);
  std::size_t n = 0;
  if (config_.n) {
    n = *config_.n;
  } else {
    n = read_json(path(artifacts::kTune)).at("chosen_n").get<std::size_t>();
  }
  PerturbationConfig pc{n, config_.variants, seeds_.score};
  ScoreOptions opts{config_.workers, config_.records_per_batch, config_.skip_errors};
  auto p = provider(config_.score_provider);

  std::unordered_map<std::string, EntryScore> by_id;
  json exclusions = json::array();
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].empty()) continue;
    std::vector<const InstructionRecord*> recs;
    for (std::size_t i : members[c]) recs.push_back(&corpus.records[i]);
    ClusterScores cs = score_cluster(*p, recs, pc, opts);
    for (auto& s : cs.scores) by_id.emplace(s.record_id, std::move(s));
    for (const auto& f : cs.failures) {
      exclusions.push_back({{"record_id", f.record_id}, {"cluster", c}, {"error", f.error}});
    }
  }
  std::string out;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    auto it = by_id.find(corpus.records[i].id);
    if (it == by_id.end()) continue;
    out += to_json(it->second, rows[i].cluster).dump();
    out.push_back('\n');
  }
  write_file(path(artifacts::kScores), out);
  write_file(path(artifacts::kExclusions), exclusions.dump(2) + "\n");
  say("  scored " + std::to_string(by_id.size()) + " records at n = " + std::to_string(n) +
      (exclusions.empty() ? "" : ", excluded " + std::to_string(exclusions.size())));
}

void Pipeline::select() {
  const Corpus corpus = load_corpus(config_.corpus_path);
  SelectionManifest m;
  switch (config_.method) {
    case SelectionMethod::kGeneralizationTopK: {
      std::map<std::size_t, std::vector<EntryScore>> grouped;
      for (auto& [s, c] : read_scores(path(artifacts::kScores))) {
        grouped[c].push_back(std::move(s));
      }
      if (grouped.empty()) throw Error(ErrorKind::kIo, "score table is empty");
      std::vector<ClusterRanking> rankings;
      for (const auto& [c, scores] : grouped) rankings.push_back(rank_cluster(c, scores));
      m = select_top(rankings, config_.quota);
      break;
    }
    case SelectionMethod::kRandom: {
      if (config_.random_per_cluster) {
        const auto members =
            cluster_members(corpus, read_assignments(path(artifacts::kAssignments)));
        std::vector<std::vector<std::string>> ids(members.size());
        for (std::size_t c = 0; c < members.size(); ++c) {
          for (std::size_t i : members[c]) ids[c].push_back(corpus.records[i].id);
        }
        m = select_random_per_cluster(ids, config_.quota, seeds_.select);
      } else {
        std::vector<std::string> ids;
        for (const auto& r : corpus.records) ids.push_back(r.id);
        m = select_random(ids, *config_.size, seeds_.select);
      }
      break;
    }
    case SelectionMethod::kKCenterGreedy: {
      const Embeddings e = read_embeddings(path(artifacts::kEmbeddings));
      m = select_kcenter(e.vectors, e.ids, *config_.size, seeds_.select,
                         config_.kcenter_start_first);
      break;
    }
  }
  m.seed = *config_.seed;
  json provenance = to_json(config_);
  provenance.erase("output_dir");
  provenance.erase("workers");
  provenance["corpus_fingerprint"] = corpus.fingerprint;
  m.fingerprint = sha256_hex(provenance.dump());

  std::unordered_map<std::string, const InstructionRecord*> by_id;
  for (const auto& r : corpus.records) by_id.emplace(r.id, &r);
  std::string lines;
  for (const auto& id : m.selected_ids()) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw Error(ErrorKind::kInvariant, "selected id '" + id + "' is not in the corpus");
    }
    lines += it->second->source_line;
    lines.push_back('\n');
  }
  write_file(path(artifacts::kManifest), to_json(m).dump(2) + "\n");
  write_file(path(artifacts::kSelected), lines);
  say("  selected " + std::to_string(m.total) + " records (" +
      std::string(to_string(m.method)) + ")");
}

void Pipeline::report() {
  std::error_code ec;
  auto exists = [&](const char* a) { return fs::exists(path(a), ec); };
  json s{{"config", to_json(config_)}};
  if (exists(artifacts::kIngest)) s["corpus"] = read_json(path(artifacts::kIngest));
  if (exists(artifacts::kSweep)) s["k_sweep"] = read_json(path(artifacts::kSweep));
  if (exists(artifacts::kAssignments)) {
    std::map<std::size_t, std::size_t> sizes;
    for (const auto& r : read_assignments(path(artifacts::kAssignments))) ++sizes[r.cluster];
    json cs = json::array();
    for (const auto& [c, count] : sizes) cs.push_back({{"cluster", c}, {"size", count}});
    s["clusters"] = cs;
  }
  if (exists(artifacts::kTune)) {
    json t = read_json(path(artifacts::kTune));
    t.erase("sample_ids");
    s["tune"] = t;
  }
  if (exists(artifacts::kScores)) {
    const auto scores = read_scores(path(artifacts::kScores));
    double total = 0.0;
    std::size_t truncated = 0;
    for (const auto& [sc, _] : scores) {
      total += sc.score;
      truncated += sc.truncated;
    }
    s["scores"] = {{"count", scores.size()},
                   {"mean", scores.empty() ? 0.0 : total / static_cast<double>(scores.size())},
                   {"truncated", truncated}};
    if (exists(artifacts::kExclusions)) {
      s["scores"]["excluded"] = read_json(path(artifacts::kExclusions)).size();
    }
  }
  if (exists(artifacts::kManifest)) {
    const json m = read_json(path(artifacts::kManifest));
    s["selection"] = {{"method", m.at("method")},
                      {"total", m.at("total")},
                      {"fingerprint", m.at("fingerprint")}};
  }
  if (exists(artifacts::kTimings)) s["timings"] = read_json(path(artifacts::kTimings));
  write_file(path(artifacts::kSummary), s.dump(2) + "\n");
  if (log_) *log_ << render_summary(s);
}

std::string render_summary(const json& s) {
  std::ostringstream out;
  char buf[160];
  if (s.contains("corpus")) {
    out << "corpus:     " << s["corpus"].value("records", 0) << " records ("
        << s["corpus"].value("source", std::string()) << ")\n";
  }
  if (s.contains("k_sweep")) {
    out << "k sweep:    chosen p = " << s["k_sweep"].value("chosen_p", 0) << "\n";
    for (const auto& e : s["k_sweep"]["sweep"]) {
      std::snprintf(buf, sizeof(buf), "  k=%-3zu sse=%-14.6g silhouette=%.4f%s\n",
                    e.value("k", std::size_t{0}), e.value("sse", 0.0),
                    e.value("silhouette", 0.0), e.value("sampled", false) ? " (sampled)" : "");
      out << buf;
    }
  }
  if (s.contains("clusters")) {
    out << "clusters:  ";
    for (const auto& c : s["clusters"]) out << " " << c["cluster"] << ":" << c["size"];
    out << "\n";
  }
  if (s.contains("tune")) {
    out << "tune:       chosen n = " << s["tune"].value("chosen_n", 0)
        << " (K = " << s["tune"].value("K", 0) << ")\n";
    for (const auto& l : s["tune"]["levels"]) {
      std::snprintf(buf, sizeof(buf), "  n=%-3zu S_pool=%.6f D=%.6f\n",
                    l.value("n", std::size_t{0}), l.value("S_pool", 0.0), l.value("D", 0.0));
      out << buf;
    }
  }
  if (s.contains("scores")) {
    std::snprintf(buf, sizeof(buf), "scores:     %zu records, mean %.6f\n",
                  s["scores"].value("count", std::size_t{0}), s["scores"].value("mean", 0.0));
    out << buf;
  }
  if (s.contains("selection")) {
    out << "selection:  " << s["selection"].value("total", 0) << " records via "
        << s["selection"].value("method", std::string()) << "\n";
  }
  if (s.contains("timings")) {
    out << "timings:   ";
    for (const auto& [stage, secs] : s["timings"].items()) {
      std::snprintf(buf, sizeof(buf), " %s=%.2fs", stage.c_str(), secs.get<double>());
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace curagen
