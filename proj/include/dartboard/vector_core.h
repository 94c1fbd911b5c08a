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

// Dense passage embeddings and cosine similarity.

#ifndef DARTBOARD_VECTOR_CORE_H_
#define DARTBOARD_VECTOR_CORE_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace dartboard {

// All library failures (bad input, malformed files, invalid requests).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using PassageId = std::string;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// A query embedding. Values are finite and the norm is nonzero.
class QueryVector {
 public:
  explicit QueryVector(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t dims() const { return values_.size(); }
  double squared_norm() const { return squared_norm_; }

 private:
  std::vector<double> values_;
  double squared_norm_ = 0.0;
};

// Passage embeddings with one unique id per row.
//
// Construction validates everything the loaders promise: dims >= 1, finite
// values, unique ids, nonzero row norms. Rows are stored exactly as given
// (no renormalization); squared norms are cached.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::vector<PassageId> ids, std::size_t dims,
                  std::vector<double> data);

  static EmbeddingMatrix FromRows(std::vector<PassageId> ids,
                                  const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return ids_.size(); }
  std::size_t dims() const { return dims_; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dims_, dims_};
  }
  double squared_norm(std::size_t i) const { return squared_norms_[i]; }
  const PassageId& id(std::size_t i) const { return ids_[i]; }
  const std::vector<PassageId>& ids() const { return ids_; }
  const std::vector<double>& data() const { return data_; }

  std::optional<std::size_t> index_of(const PassageId& id) const;
  // Throws naming the id when absent.
  std::size_t require_index(const PassageId& id) const;

  // Query vector built from row i.
  QueryVector query(std::size_t i) const;

 private:
  std::vector<PassageId> ids_;
  std::size_t dims_ = 0;
  std::vector<double> data_;
  std::vector<double> squared_norms_;
  std::unordered_map<PassageId, std::size_t> index_;
};

// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Throws on length mismatch or a
// zero-norm input.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Cosine similarity of q against every row of m, in row order.
std::vector<double> similarity_row(const QueryVector& q,
                                   const EmbeddingMatrix& m);

// Same, restricted to the listed rows (output follows `rows` order).
std::vector<double> similarity_row(const QueryVector& q,
                                   const EmbeddingMatrix& m,
                                   std::span<const std::size_t> rows);

// Symmetric rows x rows cosine matrix.
Matrix pairwise_similarity(const EmbeddingMatrix& m);

// Pairwise cosine over a subset of rows; entry (a, b) is rows[a] vs rows[b].
Matrix pairwise_similarity(const EmbeddingMatrix& m,
                           std::span<const std::size_t> rows);

// EMB1 binary format: "EMB1", u32 rows, u32 dims (little endian), float32
// row-major values, then a UTF-8 JSON array of row ids.
EmbeddingMatrix read_emb1(const std::filesystem::path& path);
EmbeddingMatrix parse_emb1(std::span<const unsigned char> bytes);
std::vector<unsigned char> serialize_emb1(const EmbeddingMatrix& m);
void write_emb1(const std::filesystem::path& path, const EmbeddingMatrix& m);

}  // namespace dartboard

#endif  // DARTBOARD_VECTOR_CORE_H_
