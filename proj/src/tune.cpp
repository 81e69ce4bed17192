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

#include "curagen/tune.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>

#include "curagen/common.hpp"
#include "curagen/perturb.hpp"
#include "curagen/score.hpp"

namespace curagen {

std::size_t choose_n(std::span<const double> d) {
  if (d.empty()) throw Error(ErrorKind::kInvariant, "choose_n on an empty curve");
  std::size_t best = 0;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (d[i] > d[best]) best = i;
  }
  return best + 1;
}

std::size_t choose_n(const SweepAggregate& aggregate) {
  std::vector<double> d;
  d.reserve(aggregate.levels.size());
  for (const auto& l : aggregate.levels) d.push_back(l.d);
  return choose_n(d);
}

SweepAggregate aggregate_from_pool(std::span<const double> s_pool) {
  SweepAggregate agg;
  agg.n_max = s_pool.size();
  double previous = 0.0;
  for (std::size_t m = 0; m < s_pool.size(); ++m) {
    agg.levels.push_back({m + 1, s_pool[m], s_pool[m] - previous, 0});
    previous = s_pool[m];
  }
  agg.chosen_n = choose_n(agg);
  return agg;
}

SweepAggregate sweep_perturbation(EmbeddingProvider& provider,
                                  std::span<const InstructionRecord* const> sample,
                                  std::size_t n_max, std::uint64_t seed,
                                  std::size_t workers) {
  if (sample.empty()) throw Error(ErrorKind::kConfig, "tune sample is empty");
  if (n_max < 1) throw Error(ErrorKind::kConfig, "n_max must be >= 1");

  // distances[i][m - 1] = ||E_m^i - E_0^i||
  std::vector<std::vector<double>> distances(sample.size());
  std::vector<std::vector<bool>> truncated(sample.size());
  std::vector<std::exception_ptr> errors(sample.size());

  const auto count = static_cast<std::ptrdiff_t>(sample.size());
  const int threads = static_cast<int>(std::max<std::size_t>(workers, 1));
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const InstructionRecord& rec = *sample[i];
    try {
      const auto words = tokenize_words(rec.instruction);
      std::vector<std::string> inputs{composite_text(rec)};
      for (std::size_t m = 1; m <= n_max; ++m) {
        const auto v = delete_words(rec.instruction, words, m,
                                    variant_seed(derive_seed(seed, m), rec.id, 0));
        inputs.push_back(composite_text(rec, v.text));
        truncated[i].push_back(v.truncated);
      }
      const auto emb = embed_batch(provider, inputs);
      for (std::size_t m = 1; m <= n_max; ++m) {
        distances[i].push_back(euclidean(emb[m], emb[0]));
      }
    } catch (const Error& e) {
      errors[i] = std::make_exception_ptr(
          Error(e.kind(), "record '" + rec.id + "': " + e.what()));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<double> pool(n_max, 0.0);
  std::vector<std::size_t> trunc(n_max, 0);
  for (std::size_t m = 0; m < n_max; ++m) {
    double total = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      total += distances[i][m];
      trunc[m] += truncated[i][m];
    }
    pool[m] = total / static_cast<double>(sample.size());
  }
  SweepAggregate agg = aggregate_from_pool(pool);
  for (std::size_t m = 0; m < n_max; ++m) agg.levels[m].truncated = trunc[m];
  agg.sample_ids.reserve(sample.size());
  for (const auto* r : sample) agg.sample_ids.push_back(r->id);
  return agg;
}

std::vector<std::size_t> draw_tune_sample(std::size_t population, std::size_t k,
                                          std::uint64_t seed) {
  Rng rng(seed);
  auto idx = sample_without_replacement(rng, population, std::min(k, population));
  std::sort(idx.begin(), idx.end());
  return idx;
}

nlohmann::json to_json(const SweepAggregate& aggregate) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : aggregate.levels) {
    levels.push_back({{"n", l.n}, {"S_pool", l.s_pool}, {"D", l.d},
                      {"truncated", l.truncated}});
  }
  return {{"levels", levels},
          {"chosen_n", aggregate.chosen_n},
          {"K", aggregate.sample_ids.size()},
          {"n_max", aggregate.n_max},
          {"sample_ids", aggregate.sample_ids}};
}

SweepAggregate aggregate_from_json(const nlohmann::json& j) {
  SweepAggregate agg;
  for (const auto& l : j.at("levels")) {
    agg.levels.push_back({l.at("n").get<std::size_t>(), l.at("S_pool").get<double>(),
                          l.at("D").get<double>(), l.value("truncated", std::size_t{0})});
  }
  agg.n_max = j.value("n_max", agg.levels.size());
  agg.chosen_n = j.at("chosen_n").get<std::size_t>();
  agg.sample_ids = j.value("sample_ids", std::vector<std::string>{});
  return agg;
}

std::string curve_csv(const SweepAggregate& aggregate) {
  std::string out = "n,D\n";
  char buf[64];
  for (const auto& l : aggregate.levels) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", l.n, l.d);
    out += buf;
  }
  return out;
}

}  // namespace curagen
