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

// curagen: select high-generalization subsets of instruction-tuning corpora.
//
//   curagen run --corpus data.jsonl --seed 7 --out out/
//   curagen sweep-k --config curagen.json --resume

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "curagen/common.hpp"
#include "curagen/pipeline.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::optional<std::string> corpus;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> cluster_provider;
  std::optional<std::string> score_provider;
  std::optional<std::size_t> k_min, k_max, k;
  std::optional<std::size_t> batch_size, iterations, restarts, silhouette_cap;
  std::optional<std::size_t> variants;
  std::optional<std::string> n;
  std::optional<std::size_t> tune_sample, tune_n_max, tune_cluster;
  std::optional<std::string> method;
  std::optional<std::size_t> quota, size;
  std::optional<std::size_t> workers;
  bool per_cluster_random = false;
  bool kcenter_start_first = false;
  bool skip_errors = false;
  bool no_cache = false;
  bool resume = false;
  bool quiet = false;
};

curagen::PipelineConfig build_config(const Flags& f) {
  using curagen::Error;
  using curagen::ErrorKind;
  curagen::PipelineConfig c;
  if (!f.config_path.empty()) c = curagen::load_config(f.config_path);
  if (!c.seed) {
    if (const char* env = std::getenv("CURAGEN_SEED")) {
      try {
        c.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw Error(ErrorKind::kConfig, "CURAGEN_SEED is not an integer");
      }
    }
  }
  if (f.seed) c.seed = f.seed;
  if (f.corpus) c.corpus_path = *f.corpus;
  if (f.out) c.output_dir = *f.out;
  if (f.cluster_provider) c.cluster_provider = curagen::parse_provider_arg(*f.cluster_provider);
  if (f.score_provider) c.score_provider = curagen::parse_provider_arg(*f.score_provider);
  if (f.k_min) c.k_min = *f.k_min;
  if (f.k_max) c.k_max = *f.k_max;
  if (f.k) c.k = f.k;
  if (f.batch_size) c.clustering.batch_size = *f.batch_size;
  if (f.iterations) c.clustering.iterations = *f.iterations;
  if (f.restarts) c.clustering.restarts = *f.restarts;
  if (f.silhouette_cap) c.silhouette_sample_cap = *f.silhouette_cap;
  if (f.variants) c.variants = *f.variants;
  if (f.n) {
    if (*f.n == "auto") {
      c.n.reset();
    } else {
      try {
        c.n = std::stoull(*f.n);
      } catch (const std::exception&) {
        throw Error(ErrorKind::kConfig, "--n takes an integer or 'auto'");
      }
    }
  }
  if (f.tune_sample) c.tune_sample = *f.tune_sample;
  if (f.tune_n_max) c.tune_n_max = *f.tune_n_max;
  if (f.tune_cluster) c.tune_cluster = f.tune_cluster;
  if (f.method) c.method = curagen::selection_method_from_string(*f.method);
  if (f.quota) c.quota = *f.quota;
  if (f.size) c.size = f.size;
  if (f.workers) c.workers = *f.workers;
  if (f.per_cluster_random) c.random_per_cluster = true;
  if (f.kcenter_start_first) c.kcenter_start_first = true;
  if (f.skip_errors) c.skip_errors = true;
  if (f.no_cache) c.cache = false;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curagen: generalization-based instruction data selection"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("-c,--config", f.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--corpus", f.corpus, "Corpus JSONL path");
  app.add_option("--seed", f.seed, "Top-level seed (else config, else CURAGEN_SEED)");
  app.add_option("-o,--out", f.out, "Output directory");
  app.add_option("--cluster-provider", f.cluster_provider,
                 "mock[:dim[:seed]] | file:PATH[@NAME] | remote:URL | JSON object");
  app.add_option("--score-provider", f.score_provider, "Same forms as --cluster-provider");
  app.add_option("--k-min", f.k_min, "Smallest k in the sweep");
  app.add_option("--k-max", f.k_max, "Largest k in the sweep");
  app.add_option("--k", f.k, "Cluster with a fixed k instead of the sweep's choice");
  app.add_option("--batch-size", f.batch_size, "Mini-batch size");
  app.add_option("--iterations", f.iterations, "Mini-batch iterations");
  app.add_option("--restarts", f.restarts, "k-means restarts");
  app.add_option("--silhouette-cap", f.silhouette_cap, "Silhouette sample cap (0 = exact)");
  app.add_option("--variants", f.variants, "Perturbed variants per record (N)");
  app.add_option("--n", f.n, "Words deleted per variant, or 'auto'");
  app.add_option("--tune-sample", f.tune_sample, "Records sampled for the n sweep (K)");
  app.add_option("--tune-n-max", f.tune_n_max, "Largest n in the sweep");
  app.add_option("--tune-cluster", f.tune_cluster, "Cluster used for the n sweep");
  app.add_option("--method", f.method, "generalization-topk | random | kcenter-greedy");
  app.add_option("--quota", f.quota, "Records per cluster (generalization-topk)");
  app.add_option("--size", f.size, "Subset size (random, kcenter-greedy)");
  app.add_option("--workers", f.workers, "Worker threads");
  app.add_flag("--per-cluster-random", f.per_cluster_random, "Random baseline per cluster");
  app.add_flag("--kcenter-start-first", f.kcenter_start_first, "Start k-center at row 0");
  app.add_flag("--skip-errors", f.skip_errors, "Exclude records whose scoring fails");
  app.add_flag("--no-cache", f.no_cache, "Disable the embedding cache");
  app.add_flag("--resume", f.resume, "Skip stages whose inputs are unchanged");
  app.add_flag("-q,--quiet", f.quiet, "No progress output");

  std::optional<curagen::Stage> single;
  bool all = false;
  for (curagen::Stage s : curagen::all_stages()) {
    auto* sub = app.add_subcommand(std::string(curagen::to_string(s)),
                                   "Run the " + std::string(curagen::to_string(s)) + " stage");
    sub->callback([&single, s] { single = s; });
  }
  app.add_subcommand("run", "Run every stage")->callback([&all] { all = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : curagen::exit_code_for(curagen::ErrorKind::kConfig);
  }

  const char* stage_name = all ? "run" : single ? curagen::to_string(*single).data() : "";
  try {
    curagen::Pipeline pipeline(build_config(f), f.resume, f.quiet ? nullptr : &std::cerr);
    if (all) {
      pipeline.run_all();
    } else {
      pipeline.run_stage(*single);
    }
  } catch (const curagen::Error& e) {
    std::cerr << "curagen " << stage_name << ": " << e.what() << "\n";
    return curagen::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "curagen " << stage_name << ": internal error: " << e.what() << "\n";
    return 5;
  }
  return 0;
}
