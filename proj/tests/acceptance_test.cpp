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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "curagen/cluster.hpp"
#include "curagen/common.hpp"
#include "curagen/embed.hpp"
#include "curagen/perturb.hpp"
#include "curagen/score.hpp"
#include "curagen/select.hpp"
#include "curagen/tune.hpp"
#include "test_util.hpp"

namespace curagen {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// Datasets shared by the silhouette and SSE criteria.
struct Dataset {
  Matrix data;
  KMeansModel model;
  ClusterAssignment assignment;
};

const std::vector<Dataset>& oracle_datasets() {
  static const std::vector<Dataset> sets = [] {
    std::vector<Dataset> out;
    Rng rng(2024);
    while (out.size() < 20) {
      const std::size_t n = 20 + rng.uniform_index(181);
      const std::size_t dim = 1 + rng.uniform_index(16);
      const std::size_t k = 2 + rng.uniform_index(3);
      Dataset d;
      d.data = testing::random_matrix(n, dim, rng.next(), 1.0 + rng.uniform01() * 5);
      d.model = minibatch_kmeans(d.data, k, KMeansParams{}, rng.next());
      d.assignment = assign(d.model, d.data);
      std::set<std::size_t> used(d.assignment.cluster.begin(), d.assignment.cluster.end());
      if (used.size() >= 2) out.push_back(std::move(d));
    }
    return out;
  }();
  return sets;
}

Outcome silhouette_oracle() {
  const auto start = Clock::now();
  Outcome o;
  double worst = 0;
  for (const auto& d : oracle_datasets()) {
    const double got = silhouette(d.data, d.assignment.cluster).value;
    const double want = testing::oracle_silhouette(d.data, d.assignment.cluster);
    worst = std::max(worst, std::abs(got - want));
  }
  const double secs = seconds(start);
  o.pass = worst <= 1e-9 && secs < 10;
  o.detail = "max |diff| " + fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + " s";
  return o;
}

Outcome sse_oracle() {
  Outcome o;
  double worst = 0;
  for (const auto& d : oracle_datasets()) {
    const double got = sse(d.data, d.assignment, d.model);
    const double want = testing::oracle_sse(d.data, d.assignment.cluster, d.model.centroids);
    worst = std::max(worst, std::abs(got - want) / want);
  }
  o.pass = worst <= 1e-9;
  o.detail = "max relative diff " + fmt("%.3g", worst);
  return o;
}

Outcome k_recovery() {
  const auto start = Clock::now();
  int hits = 0;
  std::string picks;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    // Equilateral triangle with side 10 sigma, randomly rotated and shifted.
    Rng rng(derive_seed(seed, "blobs"));
    const double angle = rng.uniform01() * 2 * M_PI;
    const double ox = rng.normal() * 50, oy = rng.normal() * 50;
    std::vector<std::vector<double>> centers;
    for (int c = 0; c < 3; ++c) {
      const double a = angle + c * 2 * M_PI / 3;
      const double r = 10.0 / std::sqrt(3.0);
      centers.push_back({ox + r * std::cos(a), oy + r * std::sin(a)});
    }
    const auto data = testing::gaussian_blobs(centers, 200, rng.next());
    const auto result = select_k(data, 2, 8, KMeansParams{}, SilhouetteOptions{}, seed);
    hits += result.chosen_p == 3;
    picks += std::to_string(result.chosen_p);
  }
  const double secs = seconds(start);
  Outcome o;
  o.pass = hits >= 19 && secs < 30;
  o.detail = std::to_string(hits) + "/20 seeds chose 3 (" + picks + "), " + fmt("%.2f", secs) +
             " s";
  return o;
}

Outcome zero_law() {
  const auto records = testing::synthetic_records(1000, 99, 7);
  const auto ptrs = testing::pointers(records);
  PerturbationConfig cfg;
  cfg.n = 0;
  cfg.variants = 5;
  cfg.seed = 3;
  MockProvider mock(64, 1);
  testing::StubEmbeddingServer server(16, 5);
  RemoteOptions ro;
  ro.url = server.url();
  RemoteProvider stub(ro);
  std::size_t nonzero = 0, count = 0;
  for (EmbeddingProvider* p : {static_cast<EmbeddingProvider*>(&mock),
                               static_cast<EmbeddingProvider*>(&stub)}) {
    for (const auto& s : score_cluster(*p, ptrs, cfg, ScoreOptions{1, 32, false}).scores) {
      ++count;
      nonzero += s.score != 0.0;
    }
  }
  Outcome o;
  o.pass = nonzero == 0 && count == 2000;
  o.detail = std::to_string(count) + " scores, " + std::to_string(nonzero) + " nonzero";
  return o;
}

Outcome mock_distance_oracle() {
  const auto records = testing::synthetic_records(300, 17, 7);
  const std::size_t dim = 64;
  const std::uint64_t mseed = 8;
  MockProvider mock(dim, mseed);
  double worst_unit = 0, worst_general = 0;
  std::size_t unit_cases = 0, general_cases = 0;
  for (std::size_t n : {1u, 2u, 3u, 5u}) {
    PerturbationConfig cfg{n, 4, 21};
    for (const auto& r : records) {
      const auto s = score_entry(mock, r, cfg);
      const auto words = tokenize_words(r.instruction);
      const auto variants = perturb(r.instruction, cfg, r.id);
      for (std::size_t v = 0; v < variants.size(); ++v) {
        std::vector<long double> sum(dim, 0.0L);
        for (std::size_t p : variants[v].deleted_positions) {
          const auto u = unit_word_vector(words[p], dim, mseed);
          for (std::size_t j = 0; j < dim; ++j) sum[j] += u[j];
        }
        long double norm = 0;
        for (auto x : sum) norm += x * x;
        const double expect = static_cast<double>(std::sqrt(norm));
        worst_general = std::max(worst_general, std::abs(s.distances[v] - expect));
        ++general_cases;
        if (n == 1) {
          const auto& w = words[variants[v].deleted_positions[0]];
          if (std::count(words.begin(), words.end(), w) == 1) {
            worst_unit = std::max(worst_unit, std::abs(s.distances[v] - 1.0));
            ++unit_cases;
          }
        }
      }
    }
  }
  Outcome o;
  o.pass = worst_unit <= 1e-9 && worst_general <= 1e-9 && unit_cases > 0;
  o.detail = std::to_string(unit_cases) + " unique-word cases max |d-1| " +
             fmt("%.3g", worst_unit) + ", " + std::to_string(general_cases) +
             " general cases max diff " + fmt("%.3g", worst_general);
  return o;
}

Outcome scale_translation() {
  const auto records = testing::synthetic_records(400, 5, 7);
  const auto ptrs = testing::pointers(records);
  auto mock = std::make_shared<MockProvider>(48, 3);
  std::vector<double> shift(48);
  Rng rng(1);
  for (auto& x : shift) x = rng.normal() * 100;
  testing::AffineProvider scaled(mock, 3.7, {});
  testing::AffineProvider moved(mock, 1.0, shift);
  PerturbationConfig cfg{2, 5, 9};
  const auto base = score_cluster(*mock, ptrs, cfg).scores;
  const auto a = score_cluster(scaled, ptrs, cfg).scores;
  const auto b = score_cluster(moved, ptrs, cfg).scores;
  double worst_scale = 0, worst_shift = 0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    worst_scale = std::max(worst_scale, std::abs(a[i].score - 3.7 * base[i].score));
    worst_shift = std::max(worst_shift, std::abs(b[i].score - base[i].score));
  }
  const bool same_order = rank_cluster(0, a).ordered == rank_cluster(0, base).ordered &&
                          rank_cluster(0, b).ordered == rank_cluster(0, base).ordered;
  Outcome o;
  o.pass = worst_scale <= 1e-9 && worst_shift <= 1e-9 && same_order;
  o.detail = "scale diff " + fmt("%.3g", worst_scale) + ", shift diff " +
             fmt("%.3g", worst_shift) + (same_order ? ", rankings identical" : ", ORDER CHANGED");
  return o;
}

Outcome tune_laws() {
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto recs = testing::synthetic_records(60, seed, 7);
    MockProvider mock(32, seed);
    const auto agg = sweep_perturbation(mock, testing::pointers(recs), 6, seed);
    double total = 0;
    for (const auto& l : agg.levels) {
      total += l.d;
      worst = std::max(worst, std::abs(total - l.s_pool));
    }
  }
  const auto recs = testing::synthetic_records(200, 77, 7);
  MockProvider mock(64, 4);
  const auto agg = sweep_perturbation(mock, testing::pointers(recs), 4, 12);
  bool increasing = true;
  std::string pools;
  for (std::size_t m = 0; m < agg.levels.size(); ++m) {
    if (m > 0 && !(agg.levels[m].s_pool > agg.levels[m - 1].s_pool)) increasing = false;
    pools += (m ? " " : "") + fmt("%.3f", agg.levels[m].s_pool);
  }
  Outcome o;
  o.pass = worst <= 1e-9 && increasing;
  o.detail = "telescoping max diff " + fmt("%.3g", worst) + ", S_pool(1..4) = " + pools;
  return o;
}

Outcome argmax_curve() {
  // Rises to a peak at 2, then converges toward zero after 4.
  const std::vector<double> d{0.9, 1.4, 0.3, 0.1, 0.02, 0.01, 0.005, 0.002};
  std::vector<double> pool;
  double running = 0;
  for (double x : d) pool.push_back(running += x);
  bool ok = aggregate_from_pool(pool).chosen_n == 2 && choose_n(d) == 2;
  for (double c : {1e-3, 0.5, 3.7, 250.0}) {
    std::vector<double> scaled;
    for (double x : pool) scaled.push_back(c * x);
    ok = ok && aggregate_from_pool(scaled).chosen_n == 2;
  }
  return {ok, ok ? "chosen_n = 2 at every scale" : "wrong chosen_n"};
}

Outcome kcenter() {
  Rng rng(31);
  std::size_t violations = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t rows = 2 + rng.uniform_index(300);
    const auto data = testing::random_matrix(rows, 1 + rng.uniform_index(10), rng.next());
    const auto r = kcenter_greedy(data, 1 + rng.uniform_index(rows), rng.uniform_index(rows));
    for (std::size_t i = 2; i < r.radii.size(); ++i) violations += r.radii[i] > r.radii[i - 1];
    violations += r.coverage_radius > r.radii.back();
  }
  std::size_t instances = 0, approx_fail = 0;
  double worst_ratio = 0;
  for (std::size_t rows = 1; rows <= 10; ++rows) {
    for (std::size_t size = 1; size <= std::min<std::size_t>(3, rows); ++size) {
      for (int t = 0; t < 10; ++t) {
        const auto data = testing::random_matrix(rows, 2, rng.next());
        const double greedy = kcenter_greedy(data, size, rng.uniform_index(rows)).coverage_radius;
        const double opt = testing::oracle_kcenter_radius(data, size);
        ++instances;
        if (greedy > 2 * opt + 1e-12) ++approx_fail;
        if (opt > 0) worst_ratio = std::max(worst_ratio, greedy / opt);
      }
    }
  }
  Outcome o;
  o.pass = violations == 0 && approx_fail == 0;
  o.detail = std::to_string(violations) + " radius increases on 50 instances; " +
             std::to_string(approx_fail) + "/" + std::to_string(instances) +
             " over 2x optimum (worst ratio " + fmt("%.3f", worst_ratio) + ")";
  return o;
}

Outcome quota_arithmetic() {
  // Seven separated groups of embeddings, each larger than the quota.
  std::vector<std::vector<double>> centers;
  for (int c = 0; c < 7; ++c) {
    std::vector<double> center(8, 0.0);
    center[c] = 40.0;
    centers.push_back(center);
  }
  std::vector<std::size_t> truth;
  const auto data = testing::gaussian_blobs(centers, 15200, 5, &truth);
  KMeansParams params;
  params.restarts = 5;
  const auto model = minibatch_kmeans(data, 7, params, 11);
  const auto a = assign(model, data);
  std::map<std::size_t, std::vector<EntryScore>> groups;
  Rng rng(3);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    EntryScore s;
    s.record_id = "r" + std::to_string(i);
    s.score = rng.uniform01();
    groups[a.cluster[i]].push_back(std::move(s));
  }
  std::vector<ClusterRanking> rankings;
  std::size_t smallest = data.rows();
  for (const auto& [c, scores] : groups) {
    rankings.push_back(rank_cluster(c, scores));
    smallest = std::min(smallest, scores.size());
  }
  const auto m = select_top(rankings, 15000);
  const auto ids = m.selected_ids();
  const std::set<std::string> unique(ids.begin(), ids.end());
  Outcome o;
  o.pass = groups.size() == 7 && smallest >= 15000 && m.total == 105000 &&
           unique.size() == 105000;
  o.detail = std::to_string(groups.size()) + " clusters (smallest " + std::to_string(smallest) +
             "), manifest total " + std::to_string(m.total);
  return o;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CURAGEN_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const auto dir = testing::scratch_dir("acceptance_determinism");
  const std::string corpus = dir + "/corpus.jsonl";
  write_file(corpus, testing::to_jsonl(testing::synthetic_records(3000, 123, 7)));
  const std::string config = dir + "/config.json";
  write_file(config, nlohmann::json{
                         {"corpus", corpus},
                         {"seed", 20260101},
                         {"cluster_provider", {{"type", "mock"}, {"dim", 32}, {"seed", 1}}},
                         {"score_provider", {{"type", "mock"}, {"dim", 32}, {"seed", 2}}},
                         {"perturbation", {{"variants", 5}, {"n", "auto"}}},
                         {"tune", {{"sample_size", 256}, {"n_max", 6}}},
                         {"selection", {{"method", "generalization-topk"}, {"quota", 150}}},
                     }
                         .dump(2));
  const auto start = Clock::now();
  const int rc1 = run_cli("run -q --config " + config + " --out " + dir + "/a");
  const int rc2 = run_cli("run -q --config " + config + " --out " + dir + "/b");
  const double secs = seconds(start);
  bool same = rc1 == 0 && rc2 == 0;
  for (const char* f : {"manifest.json", "scores.jsonl", "selected.jsonl"}) {
    same = same && read_file(dir + "/a/" + f) == read_file(dir + "/b/" + f);
  }
  Outcome o;
  o.pass = same && secs < 60;
  o.detail = std::string(same ? "manifests and score tables identical" : "OUTPUTS DIFFER") +
             ", two runs in " + fmt("%.2f", secs) + " s";
  return o;
}

Outcome selection_quality() {
  // Ordinary records use distinct words, so deletions partly cancel in the
  // mock embedding. Sensitive records repeat one word, so deletions add up.
  Rng rng(404);
  std::vector<InstructionRecord> records;
  std::set<std::string> sensitive;
  for (std::size_t i = 0; i < 2000; ++i) {
    const std::string id = "q" + std::to_string(i);
    const std::size_t words = 8 + rng.uniform_index(5);
    std::string text;
    if (i % 10 == 3) {
      const std::string w = "w" + std::to_string(rng.uniform_index(500));
      for (std::size_t k = 0; k < words; ++k) text += (k ? " " : "") + w;
      sensitive.insert(id);
    } else {
      const auto pick = sample_without_replacement(rng, 500, words);
      for (std::size_t k = 0; k < words; ++k) text += (k ? " w" : "w") + std::to_string(pick[k]);
    }
    records.push_back(testing::make_record(id, text, "a" + std::to_string(i % 7)));
  }
  MockProvider mock(64, 6);
  const PerturbationConfig cfg{3, 5, 77};
  const auto scored = score_cluster(mock, testing::pointers(records), cfg).scores;

  // Brute-force oracle: rebuild each variant text and embed one at a time.
  double worst = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto e0 = mock_embed(composite_text(r), 64, 6);
    long double total = 0;
    const auto words = tokenize_words(r.instruction);
    for (std::size_t v = 0; v < cfg.variants; ++v) {
      const auto del = delete_words(r.instruction, words, cfg.n, variant_seed(cfg.seed, r.id, v));
      total += testing::oracle_distance(mock_embed(composite_text(r, del.text), 64, 6), e0);
    }
    worst = std::max(worst, std::abs(scored[i].score - static_cast<double>(total / cfg.variants)));
  }
  const std::vector<ClusterRanking> rankings{rank_cluster(0, scored)};
  const auto m = select_top(rankings, records.size() / 10);
  std::size_t found = 0;
  for (const auto& id : m.selected_ids()) found += sensitive.count(id);
  const double recall = static_cast<double>(found) / static_cast<double>(sensitive.size());
  Outcome o;
  o.pass = recall >= 0.95 && worst <= 1e-9;
  o.detail = std::to_string(found) + "/" + std::to_string(sensitive.size()) +
             " sensitive records selected (recall " + fmt("%.3f", recall) +
             "), oracle max diff " + fmt("%.3g", worst);
  return o;
}

}  // namespace
}  // namespace curagen

int main() {
  using curagen::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"silhouette-oracle", curagen::silhouette_oracle},
      {"sse-oracle", curagen::sse_oracle},
      {"k-recovery", curagen::k_recovery},
      {"zero-law", curagen::zero_law},
      {"mock-distance-oracle", curagen::mock_distance_oracle},
      {"scale-translation-laws", curagen::scale_translation},
      {"tune-telescoping-monotonicity", curagen::tune_laws},
      {"argmax-n-curve", curagen::argmax_curve},
      {"kcenter-greedy", curagen::kcenter},
      {"quota-arithmetic", curagen::quota_arithmetic},
      {"determinism-end-to-end", curagen::determinism},
      {"selection-quality", curagen::selection_quality},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
