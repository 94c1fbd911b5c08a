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

// Gaussian log-kernels over similarities.
//
// A retrieval call sees two kernels: the query kernel logN(q, t, sigma) over
// every candidate t, and the guess kernel logN(t, g, sigma) over candidate
// pairs. Each kernel reads similarities either from cosine over embeddings or
// from an externally produced cross-encoder ScoreMatrix, maps them to a
// distance with a DistanceTransform, and evaluates log_norm on that distance.

#ifndef DARTBOARD_KERNEL_H_
#define DARTBOARD_KERNEL_H_

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dartboard/vector_core.h"

namespace dartboard {

// Log-space values never go below this; keeps LogSumExp finite.
inline constexpr double kLogFloor = -1e300;

enum class KernelSource { kCosine, kExternalScores };

// Similarity -> distance rule fed to log_norm.
struct DistanceTransform {
  enum class Kind {
    kOneMinus,  // 1 - s, for cosine similarities in [-1, 1]
    kNegate,    // -s
    kAffine,    // scale * s + offset
    kSigmoid,   // 1 - 1 / (1 + exp(-s)), for raw logits
  };

  Kind kind = Kind::kOneMinus;
  double scale = 1.0;
  double offset = 0.0;

  static DistanceTransform OneMinus() { return {Kind::kOneMinus}; }
  static DistanceTransform Negate() { return {Kind::kNegate}; }
  static DistanceTransform Sigmoid() { return {Kind::kSigmoid}; }
  static DistanceTransform Affine(double scale, double offset) {
    return {Kind::kAffine, scale, offset};
  }

  // Accepts "one_minus", "negate", "sigmoid", "affine:<scale>,<offset>".
  static DistanceTransform Parse(std::string_view text);
  std::string ToString() const;
};

double similarity_to_distance(double s, const DistanceTransform& transform);

// Natural log of the Gaussian pdf at distance mu:
//   -ln(sigma) - ln(2 pi) / 2 - mu^2 / (2 sigma^2),
// floored at kLogFloor.
double log_norm(double mu, double sigma);

// Cross-encoder scores ingested from file.
//
// values(q, p) is C(q, p) for query q and passage p. The optional pair block
// holds C(p_i, p_j) as given; it may be asymmetric and is only symmetrized by
// symmetrize_pair_scores.
class ScoreMatrix {
 public:
  ScoreMatrix(std::vector<std::string> query_ids,
              std::vector<PassageId> passage_ids, Matrix values,
              std::optional<Matrix> pair = std::nullopt);

  const std::vector<std::string>& query_ids() const { return query_ids_; }
  const std::vector<PassageId>& passage_ids() const { return passage_ids_; }
  const Matrix& values() const { return values_; }
  bool has_pair() const { return pair_.has_value(); }
  const Matrix& pair() const;

  std::optional<std::size_t> query_index(const std::string& id) const;
  std::optional<std::size_t> passage_index(const PassageId& id) const;

 private:
  std::vector<std::string> query_ids_;
  std::vector<PassageId> passage_ids_;
  Matrix values_;
  std::optional<Matrix> pair_;
  std::unordered_map<std::string, std::size_t> query_index_;
  std::unordered_map<PassageId, std::size_t> passage_index_;
};

// out(i, j) = (raw(i, j) + raw(j, i)) / 2.
Matrix symmetrize_pair_scores(const Matrix& raw);

// SCM1 binary format: "SCM1", u32 n_queries, u32 n_passages,
// u8 has_pair_block, float32 query x passage block, optional float32
// passage x passage block, then JSON arrays of query ids and passage ids.
ScoreMatrix read_scm1(const std::filesystem::path& path);
ScoreMatrix parse_scm1(std::span<const unsigned char> bytes);
std::vector<unsigned char> serialize_scm1(const ScoreMatrix& m);
void write_scm1(const std::filesystem::path& path, const ScoreMatrix& m);

struct KernelConfig {
  double sigma = 0.096;
  KernelSource query_source = KernelSource::kCosine;
  KernelSource guess_source = KernelSource::kCosine;
  DistanceTransform cosine_transform = DistanceTransform::OneMinus();
  DistanceTransform score_transform = DistanceTransform::Sigmoid();
  std::shared_ptr<const ScoreMatrix> scores;

  // Cosine for both kernels (D-CS).
  static KernelConfig Cossim(double sigma);
  // Cross-encoder scores for both kernels (D-CC).
  static KernelConfig Crosscoder(double sigma,
                                 std::shared_ptr<const ScoreMatrix> scores);
  // Cross-encoder query kernel, cosine guess kernel (D-H).
  static KernelConfig Hybrid(double sigma,
                             std::shared_ptr<const ScoreMatrix> scores);

  bool uses_scores() const {
    return query_source == KernelSource::kExternalScores ||
           guess_source == KernelSource::kExternalScores;
  }
  const DistanceTransform& transform_for(KernelSource source) const {
    return source == KernelSource::kCosine ? cosine_transform : score_transform;
  }

  // Throws on sigma <= 0 or a missing ScoreMatrix.
  void Validate() const;
};

// The query a kernel is evaluated for. The vector drives cosine similarity;
// the id selects the ScoreMatrix row when a kernel reads external scores.
struct QueryRef {
  QueryVector vector;
  std::optional<std::string> id;
};

// Raw similarity of q to each candidate row under `source`: cosine, or C(q, t).
std::vector<double> query_similarities(const QueryRef& q,
                                       const EmbeddingMatrix& corpus,
                                       std::span<const std::size_t> candidates,
                                       KernelSource source,
                                       const ScoreMatrix* scores);

// Candidate x candidate similarity under `source`: cosine, or symmetrized
// pair scores.
Matrix candidate_similarities(const EmbeddingMatrix& corpus,
                              std::span<const std::size_t> candidates,
                              KernelSource source, const ScoreMatrix* scores);

// logN(q, t, sigma) for each candidate row.
std::vector<double> query_log_probs(const QueryRef& q,
                                    const EmbeddingMatrix& corpus,
                                    std::span<const std::size_t> candidates,
                                    const KernelConfig& config);

// logN(t, g, sigma) over candidate pairs.
Matrix guess_log_prob_matrix(const EmbeddingMatrix& corpus,
                             std::span<const std::size_t> candidates,
                             const KernelConfig& config);

}  // namespace dartboard

#endif  // DARTBOARD_KERNEL_H_
