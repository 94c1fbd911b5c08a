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

#include "dartboard/kernel.h"

#include <charconv>
#include <cmath>
#include <numbers>
#include <utility>

#include "spdlog/fmt/fmt.h"

namespace dartboard {
namespace {

double ParseDouble(std::string_view text, std::string_view context) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw Error(fmt::format("bad number '{}' in {}", text, context));
  }
  return v;
}

const ScoreMatrix& RequireScores(const ScoreMatrix* scores) {
  if (scores == nullptr) {
    throw Error("kernel reads external scores but no score matrix is attached");
  }
  return *scores;
}

std::vector<std::size_t> ScorePassageIndices(
    const ScoreMatrix& scores, const EmbeddingMatrix& corpus,
    std::span<const std::size_t> candidates) {
  std::vector<std::size_t> out;
  out.reserve(candidates.size());
  for (std::size_t row : candidates) {
    auto idx = scores.passage_index(corpus.id(row));
    if (!idx) {
      throw Error(fmt::format("score matrix has no column for passage '{}'",
                              corpus.id(row)));
    }
    out.push_back(*idx);
  }
  return out;
}

}  // namespace

DistanceTransform DistanceTransform::Parse(std::string_view text) {
  if (text == "one_minus") return OneMinus();
  if (text == "negate") return Negate();
  if (text == "sigmoid") return Sigmoid();
  constexpr std::string_view kAffine = "affine:";
  if (text.starts_with(kAffine)) {
    const std::string_view args = text.substr(kAffine.size());
    const auto comma = args.find(',');
    if (comma == std::string_view::npos) {
      throw Error(fmt::format("affine transform needs 'affine:<scale>,<offset>', got '{}'", text));
    }
    return Affine(ParseDouble(args.substr(0, comma), "affine scale"),
                  ParseDouble(args.substr(comma + 1), "affine offset"));
  }
  throw Error(fmt::format("unknown distance transform '{}'", text));
}

std::string DistanceTransform::ToString() const {
  switch (kind) {
    case Kind::kOneMinus:
      return "one_minus";
    case Kind::kNegate:
      return "negate";
    case Kind::kSigmoid:
      return "sigmoid";
    case Kind::kAffine:
      return fmt::format("affine:{},{}", scale, offset);
  }
  return "unknown";
}

double similarity_to_distance(double s, const DistanceTransform& transform) {
  switch (transform.kind) {
    case DistanceTransform::Kind::kOneMinus:
      if (!(s >= -1.0 && s <= 1.0)) {
        throw Error(fmt::format("one_minus expects a similarity in [-1, 1], got {}", s));
      }
      return 1.0 - s;
    case DistanceTransform::Kind::kNegate:
      return -s;
    case DistanceTransform::Kind::kAffine:
      return transform.scale * s + transform.offset;
    case DistanceTransform::Kind::kSigmoid:
      // 1 - sigmoid(s) == sigmoid(-s), evaluated without overflow.
      if (s >= 0) {
        const double e = std::exp(-s);
        return e / (1.0 + e);
      }
      return 1.0 / (1.0 + std::exp(s));
  }
  throw Error("unknown distance transform");
}

double log_norm(double mu, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(fmt::format("sigma must be positive and finite, got {}", sigma));
  }
  if (!std::isfinite(mu)) throw Error("log_norm distance must be finite");
  const double v = -std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi) -
                   (mu * mu) / (2.0 * sigma * sigma);
  return v >= kLogFloor ? v : kLogFloor;
}

ScoreMatrix::ScoreMatrix(std::vector<std::string> query_ids,
                         std::vector<PassageId> passage_ids, Matrix values,
                         std::optional<Matrix> pair)
    : query_ids_(std::move(query_ids)),
      passage_ids_(std::move(passage_ids)),
      values_(std::move(values)),
      pair_(std::move(pair)) {
  if (values_.rows() != query_ids_.size() ||
      values_.cols() != passage_ids_.size()) {
    throw Error(fmt::format(
        "score block is {}x{} but there are {} query ids and {} passage ids",
        values_.rows(), values_.cols(), query_ids_.size(), passage_ids_.size()));
  }
  if (pair_ && (pair_->rows() != passage_ids_.size() ||
                pair_->cols() != passage_ids_.size())) {
    throw Error(fmt::format("pair block is {}x{}, expected {}x{}", pair_->rows(),
                            pair_->cols(), passage_ids_.size(),
                            passage_ids_.size()));
  }
  for (double v : values_.data()) {
    if (!std::isfinite(v)) throw Error("score block has a non-finite value");
  }
  if (pair_) {
    for (double v : pair_->data()) {
      if (!std::isfinite(v)) throw Error("pair block has a non-finite value");
    }
  }
  for (std::size_t i = 0; i < query_ids_.size(); ++i) {
    if (!query_index_.emplace(query_ids_[i], i).second) {
      throw Error(fmt::format("duplicate query id '{}' in score matrix", query_ids_[i]));
    }
  }
  for (std::size_t i = 0; i < passage_ids_.size(); ++i) {
    if (!passage_index_.emplace(passage_ids_[i], i).second) {
      throw Error(fmt::format("duplicate passage id '{}' in score matrix",
                              passage_ids_[i]));
    }
  }
}

const Matrix& ScoreMatrix::pair() const {
  if (!pair_) throw Error("score matrix has no passage pair block");
  return *pair_;
}

std::optional<std::size_t> ScoreMatrix::query_index(const std::string& id) const {
  auto it = query_index_.find(id);
  if (it == query_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ScoreMatrix::passage_index(const PassageId& id) const {
  auto it = passage_index_.find(id);
  if (it == passage_index_.end()) return std::nullopt;
  return it->second;
}

Matrix symmetrize_pair_scores(const Matrix& raw) {
  if (raw.rows() != raw.cols()) {
    throw Error(fmt::format("pair scores must be square, got {}x{}", raw.rows(),
                            raw.cols()));
  }
  const std::size_t n = raw.rows();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    out(i, i) = raw(i, i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = (raw(i, j) + raw(j, i)) / 2.0;
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

KernelConfig KernelConfig::Cossim(double sigma) {
  KernelConfig c;
  c.sigma = sigma;
  return c;
}

KernelConfig KernelConfig::Crosscoder(double sigma,
                                      std::shared_ptr<const ScoreMatrix> scores) {
  KernelConfig c;
  c.sigma = sigma;
  c.query_source = KernelSource::kExternalScores;
  c.guess_source = KernelSource::kExternalScores;
  c.scores = std::move(scores);
  return c;
}

KernelConfig KernelConfig::Hybrid(double sigma,
                                  std::shared_ptr<const ScoreMatrix> scores) {
  KernelConfig c;
  c.sigma = sigma;
  c.query_source = KernelSource::kExternalScores;
  c.guess_source = KernelSource::kCosine;
  c.scores = std::move(scores);
  return c;
}

void KernelConfig::Validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(fmt::format("sigma must be positive and finite, got {}", sigma));
  }
  if (uses_scores() && !scores) {
    throw Error("kernel reads external scores but no score matrix is attached");
  }
  if (guess_source == KernelSource::kExternalScores && scores &&
      !scores->has_pair()) {
    throw Error("cross-encoder guess kernel needs a passage pair block in the score matrix");
  }
}

std::vector<double> query_similarities(const QueryRef& q,
                                       const EmbeddingMatrix& corpus,
                                       std::span<const std::size_t> candidates,
                                       KernelSource source,
                                       const ScoreMatrix* scores) {
  if (source == KernelSource::kCosine) {
    return similarity_row(q.vector, corpus, candidates);
  }
  const ScoreMatrix& s = RequireScores(scores);
  if (!q.id) throw Error("external query scores need a query id");
  auto qi = s.query_index(*q.id);
  if (!qi) {
    throw Error(fmt::format("score matrix has no row for query '{}'", *q.id));
  }
  const auto cols = ScorePassageIndices(s, corpus, candidates);
  std::vector<double> out;
  out.reserve(cols.size());
  for (std::size_t c : cols) out.push_back(s.values()(*qi, c));
  return out;
}

Matrix candidate_similarities(const EmbeddingMatrix& corpus,
                              std::span<const std::size_t> candidates,
                              KernelSource source, const ScoreMatrix* scores) {
  if (source == KernelSource::kCosine) {
    return pairwise_similarity(corpus, candidates);
  }
  const ScoreMatrix& s = RequireScores(scores);
  if (!s.has_pair()) {
    throw Error("cross-encoder guess kernel needs a passage pair block in the score matrix");
  }
  const auto cols = ScorePassageIndices(s, corpus, candidates);
  const std::size_t n = cols.size();
  Matrix raw(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) raw(a, b) = s.pair()(cols[a], cols[b]);
  }
  return symmetrize_pair_scores(raw);
}

std::vector<double> query_log_probs(const QueryRef& q,
                                    const EmbeddingMatrix& corpus,
                                    std::span<const std::size_t> candidates,
                                    const KernelConfig& config) {
  config.Validate();
  std::vector<double> out = query_similarities(
      q, corpus, candidates, config.query_source, config.scores.get());
  const DistanceTransform& t = config.transform_for(config.query_source);
  for (double& v : out) v = log_norm(similarity_to_distance(v, t), config.sigma);
  return out;
}

Matrix guess_log_prob_matrix(const EmbeddingMatrix& corpus,
                             std::span<const std::size_t> candidates,
                             const KernelConfig& config) {
  config.Validate();
  Matrix out = candidate_similarities(corpus, candidates, config.guess_source,
                                      config.scores.get());
  const DistanceTransform& t = config.transform_for(config.guess_source);
  const std::size_t n = out.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out(i, j) = log_norm(similarity_to_distance(out(i, j), t), config.sigma);
    }
  }
  return out;
}

}  // namespace dartboard
