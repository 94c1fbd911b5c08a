// Copyright 2026 The Dartboard Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite. Prints one PASS / FAIL / SKIP line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dartboard/dataset.h"
#include "dartboard/eval.h"
#include "dartboard/retrieve.h"
#include "dartboard/sweep.h"
#include "fixtures.h"
#include "oracles.h"
#include "spdlog/fmt/fmt.h"

namespace dartboard {
namespace {

using Clock = std::chrono::steady_clock;
using Vec = std::vector<double>;

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome Check(bool ok, std::string detail) {
  return {ok ? Status::kPass : Status::kFail, std::move(detail)};
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

RetrievalRequest Request(QueryVector q, Method method, std::size_t k, double sigma,
                         std::size_t triage_k = 100) {
  RetrievalRequest r{QueryRef{std::move(q), std::nullopt}};
  r.k = k;
  r.triage_k = triage_k;
  r.method = method;
  r.kernel = KernelConfig::Cossim(sigma);
  return r;
}

double LogUniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

std::size_t UniformInt(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// 1. Small sigma reduces Dartboard to KNN.
Outcome SmallSigmaReduction() {
  constexpr int kCorpora = 100;
  constexpr std::size_t kN = 500, kDims = 32, kTop = 5;
  constexpr double kGap = 0.01;
  std::mt19937_64 rng(1001);
  int matches = 0;
  int rejected = 0;
  double seconds = 0.0;
  for (int c = 0; c < kCorpora; ++c) {
    EmbeddingMatrix corpus;
    Vec q;
    // Rejection sampling: the top kTop + 1 similarities must be separated by
    // at least kGap so the KNN ranking is unambiguous.
    while (true) {
      corpus = fixtures::RandomCorpus(rng, kN, kDims);
      q = fixtures::GaussianVector(rng, kDims);
      Vec sims = similarity_row(QueryVector(q), corpus);
      std::sort(sims.rbegin(), sims.rend());
      bool separated = true;
      for (std::size_t i = 0; i < kTop; ++i) separated &= sims[i] - sims[i + 1] >= kGap;
      if (separated) break;
      ++rejected;
    }
    const auto start = Clock::now();
    const auto dart =
        dartboard_greedy(corpus, Request(QueryVector(q), Method::kDartboard, kTop, 1e-3));
    const auto near = knn(corpus, Request(QueryVector(q), Method::kKnn, kTop, 1e-3));
    seconds += Seconds(start);
    matches += dart.ids == near.ids;
  }
  return Check(matches == kCorpora && seconds < 5.0,
               fmt::format("{}/{} identical top-{} orderings at sigma=1e-3, {:.3f} s "
                           "({} draws rejected for gaps < {})",
                           matches, kCorpora, kTop, seconds, rejected, kGap));
}

// 2. The duplicate counterexample.
Outcome DuplicateAvoidance() {
  const auto corpus = EmbeddingMatrix::FromRows({"a", "b", "c", "d"},
                                                {{2, 1}, {2, 1}, {1, 2}, {0, 1}});
  auto vectors = [&](const RetrievalResult& r) {
    std::multiset<Vec> out;
    for (std::size_t row : r.rows) out.emplace(corpus.row(row).begin(), corpus.row(row).end());
    return out;
  };
  auto mmr_req = Request(QueryVector({2, 1}), Method::kMmr, 3, 0.1);
  mmr_req.mmr_diversity = 0.5;
  const auto mmr_bag = vectors(mmr(corpus, mmr_req));
  const bool mmr_ok = mmr_bag == std::multiset<Vec>{{0, 1}, {2, 1}, {2, 1}};
  bool dart_ok = true;
  std::string dart_detail;
  for (double sigma : {0.05, 0.1, 0.5, 1.0}) {
    const auto req = Request(QueryVector({2, 1}), Method::kDartboard, 3, sigma);
    const auto bag = vectors(dartboard_greedy(corpus, req));
    const bool ok = bag == std::multiset<Vec>{{2, 1}, {1, 2}, {0, 1}};
    dart_ok &= ok;
    dart_detail += fmt::format(" sigma={}:{}", sigma, ok ? "distinct" : "DUPLICATE");
  }
  return Check(mmr_ok && dart_ok,
               fmt::format("MMR(lambda=0.5) {} the duplicate;{}",
                           mmr_ok ? "keeps" : "does NOT keep", dart_detail));
}

// 3. Incremental objective equals a from-scratch set score.
Outcome BookkeepingOracle() {
  std::mt19937_64 rng(1003);
  constexpr int kInstances = 200;
  int ok = 0;
  double worst = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    const std::size_t k = UniformInt(rng, 1, 10);
    const std::size_t n = UniformInt(rng, k, 100);
    const std::size_t dims = UniformInt(rng, 2, 64);
    const double sigma = LogUniform(rng, 0.01, 2.0);
    const auto corpus = fixtures::RandomCorpus(rng, n, dims);
    QueryRef q{QueryVector(fixtures::GaussianVector(rng, dims)), std::nullopt};
    RetrievalRequest req{q};
    req.k = k;
    req.triage_k = n;
    req.kernel = KernelConfig::Cossim(sigma);
    const auto result = dartboard_greedy(corpus, req);
    const auto pool = triage(q.vector, corpus, n);
    const double fresh = dartboard_set_score(result.ids, q, corpus, pool, req.kernel);
    const double tracked = result.objective.back();
    const double rel = std::abs(fresh - tracked) / std::max(std::abs(fresh), 1e-300);
    worst = std::max(worst, rel);
    ok += rel <= 1e-9;
  }
  return Check(ok == kInstances, fmt::format("{}/{} within 1e-9 relative (worst {:.2e})", ok,
                                             kInstances, worst));
}

// 4. Exact search dominates greedy, and greedy usually attains it.
Outcome ExactVersusGreedy() {
  std::mt19937_64 rng(1004);
  constexpr int kInstances = 50;
  int dominated = 0;
  int attained = 0;
  for (int i = 0; i < kInstances; ++i) {
    const std::size_t k = UniformInt(rng, 1, 4);
    const std::size_t n = UniformInt(rng, k + 1, 12);
    const std::size_t dims = UniformInt(rng, 2, 32);
    const double sigma = LogUniform(rng, 0.02, 1.0);
    const auto corpus = fixtures::RandomCorpus(rng, n, dims);
    QueryRef q{QueryVector(fixtures::GaussianVector(rng, dims)), std::nullopt};
    const auto pool = triage(q.vector, corpus, n);
    const auto cfg = KernelConfig::Cossim(sigma);
    const auto qlp = query_log_probs(q, corpus, pool, cfg);
    const Matrix dlp = guess_log_prob_matrix(corpus, pool, cfg);
    std::vector<PassageId> ids;
    for (std::size_t r : pool) ids.push_back(corpus.id(r));
    const double exact = dartboard_exact_select(qlp, dlp, k, ids).score;
    const double greedy = dartboard_set_score(greedy_select(qlp, dlp, k).selected, qlp, dlp);
    dominated += exact >= greedy;
    attained += std::abs(exact - greedy) <= 1e-12 * std::max(1.0, std::abs(exact));
  }
  const double ratio = static_cast<double>(attained) / kInstances;
  return Check(dominated == kInstances && ratio >= 0.70,
               fmt::format("exact >= greedy in {}/{}; greedy optimal in {}/{} ({:.0f}%, floor 70%)",
                           dominated, kInstances, attained, kInstances, 100 * ratio));
}

// 5. Top-k is a prefix of top-(k+1).
Outcome PrefixProperty() {
  std::mt19937_64 rng(1005);
  constexpr int kInstances = 50;
  int checks = 0;
  int ok = 0;
  for (int i = 0; i < kInstances; ++i) {
    const std::size_t dims = UniformInt(rng, 4, 32);
    const auto corpus = fixtures::RandomCorpus(rng, UniformInt(rng, 30, 300), dims);
    const Vec q = fixtures::GaussianVector(rng, dims);
    const double sigma = LogUniform(rng, 0.01, 1.0);
    for (Method m : {Method::kDartboard, Method::kKnn}) {
      std::vector<PassageId> previous;
      for (std::size_t k = 1; k <= 11; ++k) {
        const auto r = retrieve(corpus, Request(QueryVector(q), m, k, sigma));
        if (k > 1) {
          ++checks;
          ok += std::equal(previous.begin(), previous.end(), r.ids.begin());
        }
        previous = r.ids;
      }
    }
  }
  return Check(ok == checks, fmt::format("{}/{} prefix checks (k = 1..10, dartboard and knn)",
                                         ok, checks));
}

// 6. Diversity grows with sigma on clustered data.
Outcome DiversityEmergence() {
  constexpr std::size_t kClusters = 10, kPerCluster = 30, kDims = 16, kQueries = 20;
  std::mt19937_64 rng(1006);
  auto world = fixtures::ClusteredCorpus(rng, kClusters, kPerCluster, kDims, 0.35);
  std::vector<QueryCase> cases;
  std::vector<std::string> qids;
  std::vector<double> qdata;
  std::normal_distribution<double> jitter(0.0, 0.35);
  for (std::size_t i = 0; i < kQueries; ++i) {
    const std::size_t cluster = i % kClusters;
    QueryCase c;
    c.id = fmt::format("q{}", i);
    for (std::size_t r = cluster; r < world.corpus.rows(); r += kClusters) {
      c.positives.push_back(world.corpus.id(r));
    }
    cases.push_back(std::move(c));
    qids.push_back(fmt::format("q{}", i));
    for (double x : world.centers[cluster]) qdata.push_back(x + jitter(rng));
  }
  const EmbeddingMatrix queries(qids, kDims, qdata);
  const std::vector<double> grid = parse_grid("logspace:0.01:1:8");
  const std::vector<MethodSpec> methods = {MethodSpec::Parse("dartboard-cossim", grid)};
  const SweepData data{world.corpus, queries, cases, nullptr};
  const SweepReport report = run_sweep(data, methods, {});
  std::vector<double> div;
  std::string column;
  for (const auto& row : report.rows) {
    div.push_back(row.diversity);
    column += fmt::format(" {:.3f}", row.diversity);
  }
  const double rho = oracle::Spearman(grid, div);
  return Check(div.back() >= div.front() && rho > 0.7,
               fmt::format("Spearman rho {:.3f} (> 0.7), diversity over sigma 0.01..1:{}",
                           rho, column));
}

// 7. NDCG against an independent implementation.
Outcome NdcgOracle() {
  struct Case {
    std::vector<PassageId> retrieved;
    QueryCase labels;
    std::size_t k;
    bool first_hit_only;
  };
  auto simple = [](std::vector<PassageId> pos) {
    QueryCase c;
    c.id = "q";
    c.positives = std::move(pos);
    return c;
  };
  auto integration = [](std::vector<std::vector<PassageId>> comps) {
    QueryCase c;
    c.id = "q";
    c.components = std::move(comps);
    return c;
  };
  const std::vector<Case> cases = {
      {{"x", "a", "y"}, simple({"a"}), 3, false},
      {{"a", "b", "c", "d", "e"}, simple({"a", "b", "c", "d", "e", "f"}), 5, false},
      {{"x", "y", "z"}, simple({"a"}), 3, false},
      {{"x", "a", "y", "b", "z"}, simple({"a", "b", "c"}), 5, false},
      {{"a", "a", "b"}, simple({"a", "b"}), 3, false},
      {{"x", "y", "b", "a", "z"}, simple({"a", "b"}), 5, true},
      {{"a1", "b1", "x", "y", "z"}, integration({{"a1", "a2"}, {"b1"}}), 5, false},
      {{"a1", "a2", "x", "b1", "y"}, integration({{"a1", "a2"}, {"b1"}}), 5, false},
      {{"x", "c", "y"}, integration({{"a"}, {"b"}, {"c"}, {"d"}}), 3, false},
      {{"s", "x", "t"}, integration({{"s", "t"}, {"s"}, {"u"}}), 3, false},
  };
  int ok = 0;
  double rank_two = 0.0;
  for (const auto& c : cases) {
    const double got = ndcg_at_k(c.retrieved, c.labels, c.k, {.first_hit_only = c.first_hit_only});
    const double want = oracle::Ndcg(c.retrieved, {c.labels.positives, c.labels.components},
                                     c.k, c.first_hit_only);
    ok += std::abs(got - want) <= 1e-12;
    if (&c == &cases.front()) rank_two = got;
  }
  const bool rank_two_ok = std::abs(rank_two - 0.6309297535714575) <= 1e-12;
  return Check(ok == static_cast<int>(cases.size()) && rank_two_ok,
               fmt::format("{}/{} cases match the brute-force NDCG to 1e-12; rank-2 single "
                           "positive = {:.4f}",
                           ok, cases.size(), rank_two));
}

// 8. MMR with lambda = 0 is KNN.
Outcome MmrReduction() {
  std::mt19937_64 rng(1008);
  constexpr int kInstances = 50;
  int ok = 0;
  for (int i = 0; i < kInstances; ++i) {
    const std::size_t dims = UniformInt(rng, 2, 32);
    auto rows = fixtures::Rows(fixtures::RandomCorpus(rng, UniformInt(rng, 10, 200), dims));
    // Some instances carry exact duplicates to exercise tie-breaking.
    if (i % 3 == 0) {
      for (int d = 0; d < 5; ++d) rows.push_back(rows[UniformInt(rng, 0, rows.size() - 1)]);
    }
    const auto corpus = EmbeddingMatrix::FromRows(fixtures::Ids(rows.size()), rows);
    const Vec q = fixtures::GaussianVector(rng, dims);
    const std::size_t k = UniformInt(rng, 1, 10);
    auto mmr_req = Request(QueryVector(q), Method::kMmr, k, 0.1);
    mmr_req.mmr_diversity = 0.0;
    const auto knn_req = Request(QueryVector(q), Method::kKnn, k, 0.1);
    ok += mmr(corpus, mmr_req).ids == knn(corpus, knn_req).ids;
  }
  return Check(ok == kInstances, fmt::format("{}/{} identical rankings", ok, kInstances));
}

// 9. Adding a constant to Q changes nothing but the score offset.
Outcome ConstantShift() {
  std::mt19937_64 rng(1009);
  constexpr int kInstances = 50;
  int ok = 0;
  double worst = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    const std::size_t n = UniformInt(rng, 5, 100);
    const std::size_t dims = UniformInt(rng, 2, 32);
    const double sigma = LogUniform(rng, 0.05, 1.0);
    const auto corpus = fixtures::RandomCorpus(rng, n, dims);
    QueryRef q{QueryVector(fixtures::GaussianVector(rng, dims)), std::nullopt};
    const auto pool = triage(q.vector, corpus, n);
    const auto cfg = KernelConfig::Cossim(sigma);
    const auto qlp = query_log_probs(q, corpus, pool, cfg);
    const Matrix dlp = guess_log_prob_matrix(corpus, pool, cfg);
    const std::size_t k = std::min<std::size_t>(n, 10);
    const auto base = greedy_select(qlp, dlp, k);
    bool good = true;
    for (double c : {-5.0, 5.0}) {
      Vec shifted = qlp;
      for (double& x : shifted) x += c;
      const auto moved = greedy_select(shifted, dlp, k);
      good &= moved.selected == base.selected;
      // Every greedy prefix and a few random sets.
      std::vector<std::vector<std::size_t>> sets;
      for (std::size_t m = 1; m <= k; ++m) {
        sets.emplace_back(base.selected.begin(), base.selected.begin() + m);
      }
      for (int s = 0; s < 5; ++s) {
        std::vector<std::size_t> set;
        for (std::size_t m = UniformInt(rng, 1, k); m > 0; --m) {
          set.push_back(UniformInt(rng, 0, n - 1));
        }
        sets.push_back(set);
      }
      for (const auto& set : sets) {
        const double delta = dartboard_set_score(set, shifted, dlp) -
                             dartboard_set_score(set, qlp, dlp) - c;
        worst = std::max(worst, std::abs(delta));
        good &= std::abs(delta) <= 1e-12;
      }
    }
    ok += good;
  }
  return Check(ok == kInstances,
               fmt::format("{}/{} instances: same selections, score shift exact (worst |err| "
                           "{:.1e}, bound 1e-12)",
                           ok, kInstances, worst));
}

// 10. Latency of one retrieval at the default operating point.
Outcome Runtime() {
  constexpr std::size_t kN = 10000, kDims = 384;
  constexpr int kRuns = 21;
  std::mt19937_64 rng(1010);
  const auto corpus = fixtures::RandomCorpus(rng, kN, kDims);
  std::vector<double> ms;
  for (int i = 0; i < kRuns; ++i) {
    const auto req = Request(QueryVector(fixtures::GaussianVector(rng, kDims)),
                             Method::kDartboard, 5, 0.096, 100);
    const auto start = Clock::now();
    const auto r = dartboard_greedy(corpus, req);
    ms.push_back(1000.0 * Seconds(start));
    if (r.ids.size() != 5) return Check(false, "wrong result size");
  }
  std::sort(ms.begin(), ms.end());
  const double median = ms[kRuns / 2];
  return Check(median < 100.0,
               fmt::format("median {:.2f} ms over {} runs (corpus {}x{}, K=100, k=5; bound 100 ms)",
                           median, kRuns, kN, kDims));
}

// 11. Reported NDCG on the RGB benchmark; runs only with user-supplied data.
Outcome RgbBenchmark() {
  const char* root = std::getenv("DARTBOARD_RGB_DIR");
  if (root == nullptr || *root == '\0') {
    return {Status::kSkip,
            "set DARTBOARD_RGB_DIR to a directory with simple/ and integration/ "
            "(passages.jsonl, embeddings.emb1, queries.emb1, dataset.jsonl, scores.scm1)"};
  }
  namespace fs = std::filesystem;
  struct Target {
    std::string split;
    std::string method;
    double ndcg;
  };
  const std::vector<Target> targets = {{"simple", "dartboard-cossim", 0.975},
                                       {"simple", "mmr-cossim", 0.974},
                                       {"simple", "knn-cossim", 0.973},
                                       {"integration", "dartboard-hybrid", 0.609}};
  const std::vector<double> sigmas = parse_grid("logspace:0.01:1:16");
  const std::vector<double> lambdas = parse_grid("linspace:0:1:11");
  bool pass = true;
  std::string detail;
  for (const std::string split : {"simple", "integration"}) {
    const fs::path dir = fs::path(root) / split;
    const auto corpus = read_emb1(dir / "embeddings.emb1");
    const auto queries = read_emb1(dir / "queries.emb1");
    const auto cases = read_dataset(dir / "dataset.jsonl");
    std::shared_ptr<const ScoreMatrix> scores;
    if (fs::exists(dir / "scores.scm1")) {
      scores = std::make_shared<const ScoreMatrix>(read_scm1(dir / "scores.scm1"));
    }
    std::vector<MethodSpec> methods;
    for (const auto& t : targets) {
      if (t.split != split) continue;
      if (t.method.starts_with("dartboard")) {
        methods.push_back(MethodSpec::Parse(t.method, sigmas));
      } else if (t.method.starts_with("mmr")) {
        methods.push_back(MethodSpec::Parse(t.method, lambdas));
      } else {
        methods.push_back(MethodSpec::Parse(t.method));
      }
      if (methods.back().needs_scores() && !scores) {
        return Check(false, fmt::format("{} needs {}", t.method, (dir / "scores.scm1").string()));
      }
    }
    const SweepData data{corpus, queries, cases, scores};
    const auto best = run_sweep(data, methods, {}).best_rows();
    for (const auto& row : best) {
      const auto t = std::find_if(targets.begin(), targets.end(), [&](const Target& x) {
        return x.split == split && x.method == row.method;
      });
      const bool ok = std::abs(row.ndcg - t->ndcg) <= 0.01;
      pass &= ok;
      detail += fmt::format(" {}/{}={:.3f} (target {:.3f}{})", split, row.method, row.ndcg,
                            t->ndcg, ok ? "" : ", OUTSIDE 0.01");
    }
  }
  return Check(pass, "best NDCG@5 over the grid:" + detail);
}

}  // namespace
}  // namespace dartboard

int main() {
  using dartboard::Outcome;
  using dartboard::Status;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"sigma->0 reduces to KNN", dartboard::SmallSigmaReduction},
      {"duplicate avoidance", dartboard::DuplicateAvoidance},
      {"greedy bookkeeping oracle", dartboard::BookkeepingOracle},
      {"exact vs greedy", dartboard::ExactVersusGreedy},
      {"prefix property", dartboard::PrefixProperty},
      {"diversity emergence", dartboard::DiversityEmergence},
      {"NDCG unit oracle", dartboard::NdcgOracle},
      {"MMR lambda=0 reduction", dartboard::MmrReduction},
      {"constant-shift invariance", dartboard::ConstantShift},
      {"runtime bound", dartboard::Runtime},
      {"RGB benchmark NDCG", dartboard::RgbBenchmark},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Status::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::kPass   ? "PASS"
                      : o.status == Status::kFail ? "FAIL"
                                                  : "SKIP";
    failures += o.status == Status::kFail;
    std::printf("[%s] %2zu %s: %s\n", tag, i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d failed\n", failures);
  return failures == 0 ? 0 : 1;
}
