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

// Parameter sweeps: mean NDCG and diversity per (method, parameter) point.

#ifndef DARTBOARD_SWEEP_H_
#define DARTBOARD_SWEEP_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dartboard/eval.h"
#include "dartboard/kernel.h"
#include "dartboard/vector_core.h"

namespace dartboard {

// A method to evaluate and its parameter grid.
//
// Names are "<knn|mmr|dartboard>-<cossim|crosscoder|hybrid>" (knn and mmr
// take cossim or crosscoder) or one of the baselines "oracle", "random",
// "empty". Dartboard sweeps sigma, MMR sweeps lambda; the other methods have
// no parameter and ignore the grid.
struct MethodSpec {
  enum class Kind { kKnn, kMmr, kDartboard, kOracle, kRandom, kEmpty };

  std::string name;
  Kind kind = Kind::kKnn;
  std::string kernel;  // empty for baselines
  std::vector<double> grid;

  static MethodSpec Parse(std::string_view name, std::vector<double> grid = {});

  // "sigma", "lambda" or "" for parameter-free methods.
  std::string_view param_name() const;
  bool needs_scores() const;
};

struct SweepData {
  const EmbeddingMatrix& corpus;
  // One row per query, keyed by query id.
  const EmbeddingMatrix& query_embeddings;
  std::span<const QueryCase> cases;
  std::shared_ptr<const ScoreMatrix> scores;
};

struct SweepOptions {
  std::size_t k = 5;
  std::size_t triage_k = 100;
  std::uint64_t seed = 0;
  DistanceTransform cosine_transform = DistanceTransform::OneMinus();
  DistanceTransform score_transform = DistanceTransform::Sigmoid();
  NdcgOptions ndcg;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

struct SweepRow {
  std::string method;
  std::string param_name;
  std::optional<double> param_value;
  double ndcg = 0.0;
  double diversity = 0.0;  // NaN when no query returned >= 2 results
  std::size_t n_queries = 0;
  std::size_t k = 0;
  std::size_t triage_k = 0;
  std::uint64_t seed = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;

  // Highest-NDCG row per method (first grid point on ties), in first-seen
  // method order.
  std::vector<SweepRow> best_rows() const;
};

// Columns: method,param_name,param_value,ndcg,diversity,n_queries,k,K,seed.
std::string sweep_csv(std::span<const SweepRow> rows);
std::string sweep_json(std::span<const SweepRow> rows);

// Evaluates every grid point of every method over all cases. Grid points and
// queries run concurrently; the report does not depend on scheduling. The
// first failing query (in case order) aborts the sweep.
SweepReport run_sweep(const SweepData& data, std::span<const MethodSpec> methods,
                      const SweepOptions& options);

// Builds the request run_sweep issues for one case at one grid point.
RetrievalRequest make_request(const MethodSpec& method,
                              std::optional<double> param, QueryRef query,
                              const SweepData& data,
                              const SweepOptions& options);

// "a,b,c", "linspace:<lo>:<hi>:<n>" or "logspace:<lo>:<hi>:<n>" (bounds are
// values, not exponents).
std::vector<double> parse_grid(std::string_view text);

}  // namespace dartboard

#endif  // DARTBOARD_SWEEP_H_
