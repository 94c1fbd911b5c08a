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

#include "dartboard/retrieve.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "dartboard/logging.h"
#include "spdlog/fmt/fmt.h"

namespace dartboard {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Sizes {
  std::size_t k;
  std::size_t triage_k;
};

// Validates k / K and clamps both to the corpus size.
Sizes ResolveSizes(const RetrievalRequest& request, std::size_t corpus_rows) {
  if (corpus_rows == 0) throw Error("cannot retrieve from an empty corpus");
  if (request.k == 0) throw Error("k must be >= 1");
  if (request.triage_k == 0) throw Error("triage K must be >= 1");
  if (request.k > request.triage_k) {
    throw Error(fmt::format("k = {} exceeds triage K = {}", request.k,
                            request.triage_k));
  }
  Sizes s{request.k, request.triage_k};
  if (s.triage_k > corpus_rows) s.triage_k = corpus_rows;
  if (s.k > corpus_rows) {
    Log().warn("k = {} exceeds corpus size {}; returning the whole corpus",
               s.k, corpus_rows);
    s.k = corpus_rows;
  }
  return s;
}

RetrievalResult MakeResult(const EmbeddingMatrix& corpus,
                           const RetrievalRequest& request, const Sizes& sizes,
                           std::span<const std::size_t> pool,
                           std::span<const std::size_t> selected,
                           std::vector<double> objective) {
  RetrievalResult r;
  r.rows.reserve(selected.size());
  r.ids.reserve(selected.size());
  for (std::size_t s : selected) {
    r.rows.push_back(pool[s]);
    r.ids.push_back(corpus.id(pool[s]));
  }
  r.objective = std::move(objective);
  r.method = std::string(MethodName(request.method));
  r.kernel = KernelName(request.kernel);
  if (request.method == Method::kDartboard) r.sigma = request.kernel.sigma;
  if (request.method == Method::kMmr) r.mmr_diversity = request.mmr_diversity;
  r.k = sizes.k;
  r.triage_k = sizes.triage_k;
  return r;
}

// KNN and MMR rank by the query kernel's source. For cross-encoder scores the
// cosine-triaged pool is re-sorted by (score desc, id asc) so pool order is
// the relevance order both methods tie-break on. Returns relevance aligned
// with the reordered pool.
std::vector<double> RelevanceOrderedPool(const EmbeddingMatrix& corpus,
                                         const RetrievalRequest& request,
                                         std::vector<std::size_t>& pool) {
  std::vector<double> rel =
      query_similarities(request.query, corpus, pool, request.kernel.query_source,
                         request.kernel.scores.get());
  if (request.kernel.query_source == KernelSource::kCosine) return rel;
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rel[a] != rel[b]) return rel[a] > rel[b];
    return corpus.id(pool[a]) < corpus.id(pool[b]);
  });
  std::vector<std::size_t> new_pool;
  std::vector<double> new_rel;
  new_pool.reserve(pool.size());
  new_rel.reserve(pool.size());
  for (std::size_t i : order) {
    new_pool.push_back(pool[i]);
    new_rel.push_back(rel[i]);
  }
  pool = std::move(new_pool);
  return new_rel;
}

void CheckSelectedInRange(std::span<const std::size_t> selected,
                          std::size_t pool_size) {
  if (selected.empty()) throw Error("dartboard set score needs a nonempty guess set");
  for (std::size_t g : selected) {
    if (g >= pool_size) {
      throw Error(fmt::format("guess index {} outside pool of size {}", g, pool_size));
    }
  }
}

void CheckKernelShapes(std::span<const double> q, const Matrix& d) {
  if (d.rows() != q.size() || d.cols() != q.size()) {
    throw Error(fmt::format("guess kernel is {}x{} but query kernel has {} entries",
                            d.rows(), d.cols(), q.size()));
  }
}

double BinomialOrInfinity(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    if (c > 1e18) return std::numeric_limits<double>::infinity();
  }
  return std::round(c);
}

}  // namespace

std::string_view MethodName(Method method) {
  switch (method) {
    case Method::kKnn:
      return "knn";
    case Method::kMmr:
      return "mmr";
    case Method::kDartboard:
      return "dartboard";
  }
  return "unknown";
}

Method ParseMethod(std::string_view name) {
  if (name == "knn") return Method::kKnn;
  if (name == "mmr") return Method::kMmr;
  if (name == "dartboard") return Method::kDartboard;
  throw Error(fmt::format("unknown method '{}'", name));
}

std::string KernelName(const KernelConfig& config) {
  using enum KernelSource;
  if (config.query_source == kCosine && config.guess_source == kCosine) {
    return "cossim";
  }
  if (config.query_source == kExternalScores &&
      config.guess_source == kExternalScores) {
    return "crosscoder";
  }
  if (config.query_source == kExternalScores && config.guess_source == kCosine) {
    return "hybrid";
  }
  return "custom";
}

std::vector<std::size_t> triage(const QueryVector& q,
                                const EmbeddingMatrix& corpus,
                                std::size_t triage_k) {
  const std::vector<double> sims = similarity_row(q, corpus);
  std::vector<std::size_t> order(corpus.rows());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t n = std::min(triage_k, order.size());
  auto closer = [&](std::size_t a, std::size_t b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return corpus.id(a) < corpus.id(b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n),
                    order.end(), closer);
  order.resize(n);
  return order;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw Error("log_sum_exp of an empty vector");
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - m);
  return m + std::log(sum);
}

GreedyTrace greedy_select(std::span<const double> query_log_probs,
                          const Matrix& guess_log_probs, std::size_t k,
                          bool record_maxes) {
  const std::span<const double> q = query_log_probs;
  const Matrix& d = guess_log_probs;
  CheckKernelShapes(q, d);
  const std::size_t n = q.size();
  GreedyTrace trace;
  if (n == 0 || k == 0) return trace;
  k = std::min(k, n);

  std::vector<char> taken(n, 0);
  std::vector<double> maxes(n);
  std::vector<double> buffer(n);

  auto add = [&](std::size_t m, bool seed) {
    taken[m] = 1;
    trace.selected.push_back(m);
    const auto row = d.row(m);
    for (std::size_t t = 0; t < n; ++t) {
      maxes[t] = seed ? row[t] : std::max(maxes[t], row[t]);
      buffer[t] = maxes[t] + q[t];
    }
    trace.objective.push_back(log_sum_exp(buffer));
    if (record_maxes) trace.maxes.push_back(maxes);
#ifndef NDEBUG
    for (std::size_t t = 0; t < n; ++t) {
      double direct = kNegInf;
      for (std::size_t g : trace.selected) direct = std::max(direct, d(g, t));
      assert(direct == maxes[t]);
    }
#endif
  };

  add(static_cast<std::size_t>(
          std::max_element(q.begin(), q.end()) - q.begin()),
      /*seed=*/true);

  // Candidates are ranked by the log of the exact objective increment,
  //   log sum_t e^{Q_t} (e^{newmax_t} - e^{maxes_t}),
  // which orders them the same as LogSumExp(newmax + Q) but keeps full
  // precision when the increment is far below the running total.
  while (trace.selected.size() < k) {
    std::size_t best = n;
    double best_gain = kNegInf;
    std::size_t first_free = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      if (first_free == n) first_free = i;
      const auto row = d.row(i);
      std::size_t terms = 0;
      for (std::size_t t = 0; t < n; ++t) {
        if (row[t] > maxes[t]) {
          buffer[terms++] =
              q[t] + row[t] + std::log(-std::expm1(maxes[t] - row[t]));
        }
      }
      if (terms == 0) continue;
      const double gain = log_sum_exp(std::span<const double>(buffer.data(), terms));
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    // Only zero-gain candidates (duplicates of selected rows) remain.
    if (best == n) best = first_free;
    add(best, /*seed=*/false);
  }
  return trace;
}

double dartboard_set_score(std::span<const std::size_t> selected,
                           std::span<const double> query_log_probs,
                           const Matrix& guess_log_probs) {
  CheckKernelShapes(query_log_probs, guess_log_probs);
  CheckSelectedInRange(selected, query_log_probs.size());
  const std::size_t n = query_log_probs.size();
  std::vector<double> terms(n);
  for (std::size_t t = 0; t < n; ++t) {
    double best = kNegInf;
    for (std::size_t g : selected) best = std::max(best, guess_log_probs(g, t));
    terms[t] = best + query_log_probs[t];
  }
  return log_sum_exp(terms);
}

double dartboard_set_score(std::span<const PassageId> guesses,
                           const QueryRef& q, const EmbeddingMatrix& corpus,
                           std::span<const std::size_t> pool,
                           const KernelConfig& config) {
  if (guesses.empty()) throw Error("dartboard set score needs a nonempty guess set");
  std::unordered_map<PassageId, std::size_t> position;
  for (std::size_t i = 0; i < pool.size(); ++i) position.emplace(corpus.id(pool[i]), i);
  std::vector<std::size_t> selected;
  selected.reserve(guesses.size());
  for (const auto& id : guesses) {
    auto it = position.find(id);
    if (it == position.end()) {
      throw Error(fmt::format("guess '{}' is not in the candidate pool", id));
    }
    selected.push_back(it->second);
  }
  const auto qlp = query_log_probs(q, corpus, pool, config);
  const Matrix dlp = guess_log_prob_matrix(corpus, pool, config);
  return dartboard_set_score(selected, qlp, dlp);
}

ExactSolution dartboard_exact_select(std::span<const double> query_log_probs,
                                     const Matrix& guess_log_probs,
                                     std::size_t k,
                                     std::span<const PassageId> pool_ids) {
  CheckKernelShapes(query_log_probs, guess_log_probs);
  const std::size_t n = query_log_probs.size();
  if (pool_ids.size() != n) throw Error("pool id count does not match kernel size");
  if (k == 0 || k > n) {
    throw Error(fmt::format("exact search needs 1 <= k <= {}, got {}", n, k));
  }
  const double subsets = BinomialOrInfinity(n, k);
  if (subsets > kExactSubsetLimit) {
    throw Error(fmt::format(
        "exact search over C({}, {}) subsets exceeds the limit of {}; use "
        "dartboard_greedy",
        n, k, kExactSubsetLimit));
  }

  auto sorted_ids = [&](std::span<const std::size_t> subset) {
    std::vector<PassageId> ids;
    for (std::size_t i : subset) ids.push_back(pool_ids[i]);
    std::sort(ids.begin(), ids.end());
    return ids;
  };

  ExactSolution best;
  best.score = kNegInf;
  std::vector<PassageId> best_ids;
  std::vector<std::size_t> subset(k);
  std::iota(subset.begin(), subset.end(), 0);
  while (true) {
    const double score =
        dartboard_set_score(subset, query_log_probs, guess_log_probs);
    if (best.selected.empty() || score > best.score) {
      best.selected = subset;
      best.score = score;
      best_ids = sorted_ids(subset);
    } else if (score == best.score) {
      auto ids = sorted_ids(subset);
      if (ids < best_ids) {
        best.selected = subset;
        best_ids = std::move(ids);
      }
    }
    // Next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && subset[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++subset[i - 1];
    for (std::size_t j = i; j < k; ++j) subset[j] = subset[j - 1] + 1;
  }
  return best;
}

RetrievalResult dartboard_exact(const QueryRef& q,
                                const EmbeddingMatrix& corpus,
                                std::span<const std::size_t> pool,
                                std::size_t k, const KernelConfig& config) {
  const auto qlp = query_log_probs(q, corpus, pool, config);
  const Matrix dlp = guess_log_prob_matrix(corpus, pool, config);
  std::vector<PassageId> ids;
  for (std::size_t r : pool) ids.push_back(corpus.id(r));
  const ExactSolution sol = dartboard_exact_select(qlp, dlp, k, ids);

  RetrievalResult r;
  std::vector<std::size_t> prefix;
  for (std::size_t s : sol.selected) {
    prefix.push_back(s);
    r.rows.push_back(pool[s]);
    r.ids.push_back(corpus.id(pool[s]));
    r.objective.push_back(dartboard_set_score(prefix, qlp, dlp));
  }
  r.method = "dartboard-exact";
  r.kernel = KernelName(config);
  r.sigma = config.sigma;
  r.k = k;
  r.triage_k = pool.size();
  return r;
}

MmrTrace mmr_select(std::span<const double> relevance,
                    const Matrix& pair_similarity, std::size_t k,
                    double diversity) {
  if (!(diversity >= 0.0 && diversity <= 1.0)) {
    throw Error(fmt::format("MMR diversity must be in [0, 1], got {}", diversity));
  }
  const std::size_t n = relevance.size();
  if (pair_similarity.rows() != n || pair_similarity.cols() != n) {
    throw Error("MMR pair similarity shape does not match relevance");
  }
  MmrTrace trace;
  k = std::min(k, n);
  std::vector<char> taken(n, 0);
  double relevance_sum = 0.0;
  double pair_sum = 0.0;
  while (trace.selected.size() < k) {
    const double size = static_cast<double>(trace.selected.size() + 1);
    const double pairs = size * (size - 1.0) / 2.0;
    std::size_t best = n;
    double best_score = kNegInf;
    double best_pair_sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (taken[c]) continue;
      double candidate_pairs = pair_sum;
      for (std::size_t g : trace.selected) candidate_pairs += pair_similarity(c, g);
      const double mean_rel = (relevance_sum + relevance[c]) / size;
      const double mean_pair = pairs > 0.0 ? candidate_pairs / pairs : 0.0;
      const double score = (1.0 - diversity) * mean_rel - diversity * mean_pair;
      if (best == n || score > best_score) {
        best = c;
        best_score = score;
        best_pair_sum = candidate_pairs;
      }
    }
    taken[best] = 1;
    trace.selected.push_back(best);
    trace.objective.push_back(best_score);
    relevance_sum += relevance[best];
    pair_sum = best_pair_sum;
  }
  return trace;
}

RetrievalResult knn(const EmbeddingMatrix& corpus,
                    const RetrievalRequest& request) {
  const Sizes sizes = ResolveSizes(request, corpus.rows());
  if (request.kernel.uses_scores() && !request.kernel.scores) {
    throw Error("crosscoder KNN needs a score matrix");
  }
  std::vector<std::size_t> pool = triage(request.query.vector, corpus, sizes.triage_k);
  std::vector<double> rel = RelevanceOrderedPool(corpus, request, pool);
  std::vector<std::size_t> selected(sizes.k);
  std::iota(selected.begin(), selected.end(), 0);
  rel.resize(sizes.k);
  return MakeResult(corpus, request, sizes, pool, selected, std::move(rel));
}

RetrievalResult mmr(const EmbeddingMatrix& corpus,
                    const RetrievalRequest& request) {
  const Sizes sizes = ResolveSizes(request, corpus.rows());
  if (!request.mmr_diversity) throw Error("MMR needs a diversity parameter");
  if (request.kernel.uses_scores() && !request.kernel.scores) {
    throw Error("crosscoder MMR needs a score matrix");
  }
  std::vector<std::size_t> pool = triage(request.query.vector, corpus, sizes.triage_k);
  const std::vector<double> rel = RelevanceOrderedPool(corpus, request, pool);
  const Matrix pair = candidate_similarities(corpus, pool, request.kernel.guess_source,
                                             request.kernel.scores.get());
  MmrTrace trace = mmr_select(rel, pair, sizes.k, *request.mmr_diversity);
  return MakeResult(corpus, request, sizes, pool, trace.selected,
                    std::move(trace.objective));
}

RetrievalResult dartboard_greedy(const EmbeddingMatrix& corpus,
                                 const RetrievalRequest& request) {
  request.kernel.Validate();
  const Sizes sizes = ResolveSizes(request, corpus.rows());
  const std::vector<std::size_t> pool =
      triage(request.query.vector, corpus, sizes.triage_k);
  const auto qlp = query_log_probs(request.query, corpus, pool, request.kernel);
  const Matrix dlp = guess_log_prob_matrix(corpus, pool, request.kernel);
  GreedyTrace trace = greedy_select(qlp, dlp, sizes.k);
  return MakeResult(corpus, request, sizes, pool, trace.selected,
                    std::move(trace.objective));
}

RetrievalResult retrieve(const EmbeddingMatrix& corpus,
                         const RetrievalRequest& request) {
  switch (request.method) {
    case Method::kKnn:
      return knn(corpus, request);
    case Method::kMmr:
      return mmr(corpus, request);
    case Method::kDartboard:
      return dartboard_greedy(corpus, request);
  }
  throw Error("unknown method");
}

}  // namespace dartboard
