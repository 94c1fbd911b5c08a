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

// Retrieval quality metrics and label-driven baselines.

#ifndef DARTBOARD_EVAL_H_
#define DARTBOARD_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dartboard/retrieve.h"
#include "dartboard/vector_core.h"

namespace dartboard {

// One labeled query.
//
// Simple QA cases list their positives in `positives`. Information
// integration cases leave `positives` empty and list one positive group per
// question component in `components`.
struct QueryCase {
  std::string id;
  std::string query;
  std::vector<PassageId> positives;
  std::vector<std::vector<PassageId>> components;
  std::vector<PassageId> negatives;
  std::vector<std::string> answers;  // carried through, unused

  bool is_integration() const { return !components.empty(); }
};

// Throws unless the case has a positive (one per component for integration
// cases) and every label id exists in the corpus.
void validate_case(const QueryCase& c, const EmbeddingMatrix& corpus);

struct NdcgOptions {
  // Simple cases: credit only the first retrieved positive (ideal DCG 1).
  bool first_hit_only = false;
};

// NDCG over the first k retrieved ids, in [0, 1].
//
// Simple cases give gain 1 to each retrieved positive and normalize by the
// ideal DCG of min(k, #positives) hits. Integration cases give gain 1 to a
// retrieved id only when it is the first hit for some component and
// normalize by min(k, #components) hits at the top ranks.
double ndcg_at_k(std::span<const PassageId> retrieved, const QueryCase& c,
                 std::size_t k, const NdcgOptions& options = {});

// 1 - mean cosine similarity over all unordered pairs of rows. Needs >= 2
// rows; range [0, 2].
double diversity(std::span<const std::size_t> rows, const EmbeddingMatrix& m);
double diversity(std::span<const PassageId> ids, const EmbeddingMatrix& m);

// Positives first, padded with negatives to k. Simple cases take positives in
// ascending id order; integration cases take one positive per component in
// round-robin order. Shorter than k (with a warning) only when the labels run
// out.
RetrievalResult oracle_baseline(const QueryCase& c, std::size_t k);

// k ids sampled uniformly without replacement, reproducible per seed.
RetrievalResult random_baseline(std::span<const PassageId> corpus_ids,
                                std::size_t k, std::uint64_t seed);

}  // namespace dartboard

#endif  // DARTBOARD_EVAL_H_
