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

#include "dartboard/vector_core.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "spdlog/fmt/fmt.h"

namespace dartboard {
namespace {

double Dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

// Shared by every entry point so cached-norm paths match cosine_similarity
// bit for bit. Taking one sqrt of the product makes cos(a, a) exactly 1.
double CosineWithSquaredNorms(std::span<const double> a,
                              std::span<const double> b, double sq_a,
                              double sq_b) {
  return std::clamp(Dot(a, b) / std::sqrt(sq_a * sq_b), -1.0, 1.0);
}

void RequireSameDims(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(fmt::format("dimension mismatch: {} vs {}", a, b));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error(fmt::format("matrix data has {} values, expected {}x{}",
                            data_.size(), rows, cols));
  }
}

QueryVector::QueryVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) throw Error("query vector is empty");
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error("query vector has a non-finite value");
  }
  squared_norm_ = Dot(values_, values_);
  if (squared_norm_ == 0.0) throw Error("query vector has zero norm");
}

EmbeddingMatrix::EmbeddingMatrix(std::vector<PassageId> ids, std::size_t dims,
                                 std::vector<double> data)
    : ids_(std::move(ids)), dims_(dims), data_(std::move(data)) {
  if (dims_ == 0) throw Error("embedding dims must be >= 1");
  if (data_.size() != ids_.size() * dims_) {
    throw Error(fmt::format("embedding data has {} values, expected {} rows x {}",
                            data_.size(), ids_.size(), dims_));
  }
  index_.reserve(ids_.size());
  squared_norms_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw Error(fmt::format("duplicate passage id '{}'", ids_[i]));
    }
    for (double v : row(i)) {
      if (!std::isfinite(v)) {
        throw Error(fmt::format("passage '{}' has a non-finite value", ids_[i]));
      }
    }
    const double n = Dot(row(i), row(i));
    if (n == 0.0) {
      throw Error(fmt::format("passage '{}' has a zero-norm embedding", ids_[i]));
    }
    squared_norms_.push_back(n);
  }
}

EmbeddingMatrix EmbeddingMatrix::FromRows(
    std::vector<PassageId> ids, const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error("FromRows needs at least one row");
  const std::size_t dims = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * dims);
  for (const auto& r : rows) {
    RequireSameDims(r.size(), dims);
    data.insert(data.end(), r.begin(), r.end());
  }
  return EmbeddingMatrix(std::move(ids), dims, std::move(data));
}

std::optional<std::size_t> EmbeddingMatrix::index_of(const PassageId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingMatrix::require_index(const PassageId& id) const {
  auto idx = index_of(id);
  if (!idx) throw Error(fmt::format("unknown passage id '{}'", id));
  return *idx;
}

QueryVector EmbeddingMatrix::query(std::size_t i) const {
  auto r = row(i);
  return QueryVector(std::vector<double>(r.begin(), r.end()));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  RequireSameDims(a.size(), b.size());
  const double na = Dot(a, a);
  const double nb = Dot(b, b);
  if (na == 0.0 || nb == 0.0) {
    throw Error("cosine similarity of a zero-norm vector is undefined");
  }
  return CosineWithSquaredNorms(a, b, na, nb);
}

std::vector<double> similarity_row(const QueryVector& q,
                                   const EmbeddingMatrix& m) {
  std::vector<double> out(m.rows());
  if (m.rows() == 0) return out;
  RequireSameDims(q.dims(), m.dims());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out[i] = CosineWithSquaredNorms(q.values(), m.row(i), q.squared_norm(), m.squared_norm(i));
  }
  return out;
}

std::vector<double> similarity_row(const QueryVector& q,
                                   const EmbeddingMatrix& m,
                                   std::span<const std::size_t> rows) {
  std::vector<double> out(rows.size());
  if (rows.empty()) return out;
  RequireSameDims(q.dims(), m.dims());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    const std::size_t i = rows[a];
    out[a] = CosineWithSquaredNorms(q.values(), m.row(i), q.squared_norm(), m.squared_norm(i));
  }
  return out;
}

Matrix pairwise_similarity(const EmbeddingMatrix& m,
                           std::span<const std::size_t> rows) {
  const std::size_t n = rows.size();
  Matrix s(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t i = rows[a];
    s(a, a) = CosineWithSquaredNorms(m.row(i), m.row(i), m.squared_norm(i), m.squared_norm(i));
    for (std::size_t b = a + 1; b < n; ++b) {
      const std::size_t j = rows[b];
      const double v = CosineWithSquaredNorms(m.row(i), m.row(j), m.squared_norm(i), m.squared_norm(j));
      s(a, b) = v;
      s(b, a) = v;
    }
  }
  return s;
}

Matrix pairwise_similarity(const EmbeddingMatrix& m) {
  if (m.rows() == 0) throw Error("pairwise similarity of an empty matrix");
  std::vector<std::size_t> all(m.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return pairwise_similarity(m, all);
}

}  // namespace dartboard
