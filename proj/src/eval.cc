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

#include "dartboard/eval.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "dartboard/logging.h"
#include "spdlog/fmt/fmt.h"

namespace dartboard {
namespace {

double Discount(std::size_t rank) {  // rank is 0-based
  return 1.0 / std::log2(static_cast<double>(rank) + 2.0);
}

double IdealDcg(std::size_t hits) {
  double idcg = 0.0;
  for (std::size_t i = 0; i < hits; ++i) idcg += Discount(i);
  return idcg;
}

void RequireKnown(const PassageId& id, const EmbeddingMatrix& corpus,
                  const QueryCase& c) {
  if (!corpus.index_of(id)) {
    throw Error(fmt::format("query '{}' references passage '{}' missing from the corpus",
                            c.id, id));
  }
}

}  // namespace

void validate_case(const QueryCase& c, const EmbeddingMatrix& corpus) {
  if (c.is_integration()) {
    if (!c.positives.empty()) {
      throw Error(fmt::format("query '{}' mixes flat and per-component positives", c.id));
    }
    for (std::size_t i = 0; i < c.components.size(); ++i) {
      if (c.components[i].empty()) {
        throw Error(fmt::format("query '{}' component {} has no positive passage",
                                c.id, i));
      }
      for (const auto& id : c.components[i]) RequireKnown(id, corpus, c);
    }
  } else {
    if (c.positives.empty()) {
      throw Error(fmt::format("query '{}' has no positive passage", c.id));
    }
    for (const auto& id : c.positives) RequireKnown(id, corpus, c);
  }
  for (const auto& id : c.negatives) RequireKnown(id, corpus, c);
}

double ndcg_at_k(std::span<const PassageId> retrieved, const QueryCase& c,
                 std::size_t k, const NdcgOptions& options) {
  if (k == 0) throw Error("NDCG needs k >= 1");
  const std::size_t depth = std::min(k, retrieved.size());
  double dcg = 0.0;
  double idcg = 0.0;

  if (c.is_integration()) {
    std::unordered_map<PassageId, std::vector<std::size_t>> owners;
    for (std::size_t comp = 0; comp < c.components.size(); ++comp) {
      for (const auto& id : c.components[comp]) owners[id].push_back(comp);
    }
    std::vector<char> covered(c.components.size(), 0);
    for (std::size_t rank = 0; rank < depth; ++rank) {
      auto it = owners.find(retrieved[rank]);
      if (it == owners.end()) continue;
      bool first_hit = false;
      for (std::size_t comp : it->second) {
        if (!covered[comp]) {
          covered[comp] = 1;
          first_hit = true;
        }
      }
      if (first_hit) dcg += Discount(rank);
    }
    idcg = IdealDcg(std::min(k, c.components.size()));
  } else {
    const std::unordered_set<PassageId> positives(c.positives.begin(),
                                                  c.positives.end());
    std::unordered_set<PassageId> credited;
    for (std::size_t rank = 0; rank < depth; ++rank) {
      if (!positives.contains(retrieved[rank])) continue;
      if (!credited.insert(retrieved[rank]).second) continue;
      dcg += Discount(rank);
      if (options.first_hit_only) break;
    }
    idcg = options.first_hit_only ? IdealDcg(positives.empty() ? 0 : 1)
                                  : IdealDcg(std::min(k, positives.size()));
  }
  if (idcg == 0.0) return 0.0;
  return std::clamp(dcg / idcg, 0.0, 1.0);
}

double diversity(std::span<const std::size_t> rows, const EmbeddingMatrix& m) {
  if (rows.size() < 2) throw Error("diversity needs at least 2 results");
  const Matrix s = pairwise_similarity(m, rows);
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      sum += s(i, j);
      ++pairs;
    }
  }
  return 1.0 - sum / static_cast<double>(pairs);
}

double diversity(std::span<const PassageId> ids, const EmbeddingMatrix& m) {
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (const auto& id : ids) rows.push_back(m.require_index(id));
  return diversity(rows, m);
}

RetrievalResult oracle_baseline(const QueryCase& c, std::size_t k) {
  RetrievalResult r;
  r.method = "oracle";
  r.k = k;
  std::unordered_set<PassageId> used;
  auto push = [&](const PassageId& id) {
    if (r.ids.size() < k && used.insert(id).second) r.ids.push_back(id);
  };

  if (c.is_integration()) {
    std::size_t longest = 0;
    for (const auto& comp : c.components) longest = std::max(longest, comp.size());
    for (std::size_t round = 0; round < longest; ++round) {
      for (const auto& comp : c.components) {
        if (round < comp.size()) push(comp[round]);
      }
    }
  } else {
    std::vector<PassageId> positives = c.positives;
    std::sort(positives.begin(), positives.end());
    for (const auto& id : positives) push(id);
  }
  std::vector<PassageId> negatives = c.negatives;
  std::sort(negatives.begin(), negatives.end());
  for (const auto& id : negatives) push(id);

  if (r.ids.size() < k) {
    Log().warn("query '{}': oracle found only {} labeled passages for k = {}",
               c.id, r.ids.size(), k);
  }
  r.objective.assign(r.ids.size(), 0.0);
  return r;
}

RetrievalResult random_baseline(std::span<const PassageId> corpus_ids,
                                std::size_t k, std::uint64_t seed) {
  if (k > corpus_ids.size()) {
    Log().warn("random baseline: k = {} exceeds corpus size {}", k,
               corpus_ids.size());
    k = corpus_ids.size();
  }
  std::vector<std::size_t> order(corpus_ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first k slots are a uniform sample.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  RetrievalResult r;
  r.method = "random";
  r.k = k;
  for (std::size_t i = 0; i < k; ++i) {
    r.rows.push_back(order[i]);
    r.ids.push_back(corpus_ids[order[i]]);
  }
  r.objective.assign(k, 0.0);
  return r;
}

}  // namespace dartboard
