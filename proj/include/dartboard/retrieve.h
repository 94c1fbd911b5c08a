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

// Passage selection: KNN, MMR and Dartboard.
//
// Every method first triages the corpus to the K nearest rows by cosine
// similarity (descending similarity, ties by ascending passage id). Dartboard
// then greedily maximizes
//
//   score(G) = LogSumExp_t ( max_{g in G} logN(t, g, sigma) + logN(q, t, sigma) )
//
// over the triaged pool t. The score is the log of the probability-weighted
// best-guess kernel, so an exact duplicate of a selected passage adds nothing
// and is only picked once every other candidate is exhausted.

#ifndef DARTBOARD_RETRIEVE_H_
#define DARTBOARD_RETRIEVE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dartboard/kernel.h"
#include "dartboard/vector_core.h"

namespace dartboard {

enum class Method { kKnn, kMmr, kDartboard };

std::string_view MethodName(Method method);
Method ParseMethod(std::string_view name);

// "cossim", "crosscoder", "hybrid", or "custom" for other source pairs.
std::string KernelName(const KernelConfig& config);

struct RetrievalRequest {
  QueryRef query;
  std::size_t k = 5;
  std::size_t triage_k = 100;
  Method method = Method::kDartboard;
  KernelConfig kernel;
  // MMR only: weight of the redundancy term, in [0, 1].
  std::optional<double> mmr_diversity;
};

struct RetrievalResult {
  std::vector<PassageId> ids;
  std::vector<std::size_t> rows;  // corpus rows, parallel to ids
  std::vector<double> objective;  // value after each selection step

  // Provenance.
  std::string method;
  std::string kernel;
  std::optional<double> sigma;
  std::optional<double> mmr_diversity;
  std::size_t k = 0;
  std::size_t triage_k = 0;
};

// Top-K corpus rows by cosine similarity, ties by ascending passage id.
std::vector<std::size_t> triage(const QueryVector& q,
                                const EmbeddingMatrix& corpus,
                                std::size_t triage_k);

RetrievalResult knn(const EmbeddingMatrix& corpus,
                    const RetrievalRequest& request);
RetrievalResult mmr(const EmbeddingMatrix& corpus,
                    const RetrievalRequest& request);
RetrievalResult dartboard_greedy(const EmbeddingMatrix& corpus,
                                 const RetrievalRequest& request);

// Dispatches on request.method.
RetrievalResult retrieve(const EmbeddingMatrix& corpus,
                         const RetrievalRequest& request);

// max(v) + ln(sum exp(v_i - max(v))). Throws on empty input.
double log_sum_exp(std::span<const double> values);

// Greedy Dartboard over precomputed log kernels.
struct GreedyTrace {
  std::vector<std::size_t> selected;  // pool indices in selection order
  std::vector<double> objective;      // LogSumExp(maxes + Q) after each step
  // maxes after each step; filled only when requested.
  std::vector<std::vector<double>> maxes;
};

// query_log_probs[t] is logN(q, t); guess_log_probs(g, t) is logN(t, g).
// Seeds with argmax(Q), then repeatedly adds the unselected candidate with the
// largest objective gain (ties to the lowest pool index).
GreedyTrace greedy_select(std::span<const double> query_log_probs,
                          const Matrix& guess_log_probs, std::size_t k,
                          bool record_maxes = false);

// LogSumExp_t (max_{g in selected} D(g, t) + Q[t]).
double dartboard_set_score(std::span<const std::size_t> selected,
                           std::span<const double> query_log_probs,
                           const Matrix& guess_log_probs);

// Same objective addressed by passage ids; `pool` lists the corpus rows the
// kernels are evaluated over and must contain every id in `guesses`.
double dartboard_set_score(std::span<const PassageId> guesses,
                           const QueryRef& q, const EmbeddingMatrix& corpus,
                           std::span<const std::size_t> pool,
                           const KernelConfig& config);

// Largest pool / subset count dartboard_exact will enumerate.
inline constexpr double kExactSubsetLimit = 1e6;

struct ExactSolution {
  std::vector<std::size_t> selected;  // ascending pool indices
  double score = 0.0;
};

// Exhaustive search over every k-subset. Test oracle; not for production
// use. Ties go to the lexicographically smallest sorted id list.
ExactSolution dartboard_exact_select(std::span<const double> query_log_probs,
                                     const Matrix& guess_log_probs,
                                     std::size_t k,
                                     std::span<const PassageId> pool_ids);

RetrievalResult dartboard_exact(const QueryRef& q,
                                const EmbeddingMatrix& corpus,
                                std::span<const std::size_t> pool,
                                std::size_t k, const KernelConfig& config);

// Greedy MMR over a bag score:
//   (1 - lambda) * mean_{g in S} rel(g) - lambda * mean_{pairs in S} sim(g, h).
// Selected candidates leave the pool; exact-duplicate vectors under different
// ids remain eligible. Ties go to the lowest pool index.
struct MmrTrace {
  std::vector<std::size_t> selected;
  std::vector<double> objective;
};
MmrTrace mmr_select(std::span<const double> relevance,
                    const Matrix& pair_similarity, std::size_t k,
                    double diversity);

}  // namespace dartboard

#endif  // DARTBOARD_RETRIEVE_H_
