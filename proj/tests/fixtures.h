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

// Seeded synthetic corpora shared by the unit and acceptance tests.

#ifndef DARTBOARD_TESTS_FIXTURES_H_
#define DARTBOARD_TESTS_FIXTURES_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dartboard/vector_core.h"
#include "spdlog/fmt/fmt.h"

namespace fixtures {

inline std::string Id(std::size_t i) { return fmt::format("p{:04d}", i); }

inline std::vector<std::string> Ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(Id(i));
  return ids;
}

inline std::vector<double> GaussianVector(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(d);
  for (auto& x : v) x = normal(rng);
  return v;
}

inline dartboard::EmbeddingMatrix RandomCorpus(std::mt19937_64& rng, std::size_t n,
                                               std::size_t d) {
  std::vector<double> data;
  data.reserve(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    auto v = GaussianVector(rng, d);
    data.insert(data.end(), v.begin(), v.end());
  }
  return dartboard::EmbeddingMatrix(Ids(n), d, std::move(data));
}

inline std::vector<std::vector<double>> Rows(const dartboard::EmbeddingMatrix& m) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    rows.emplace_back(m.row(i).begin(), m.row(i).end());
  }
  return rows;
}

// Points drawn around `clusters` random centers; row i belongs to cluster
// i % clusters.
struct Clustered {
  dartboard::EmbeddingMatrix corpus;
  std::vector<std::vector<double>> centers;
};

inline Clustered ClusteredCorpus(std::mt19937_64& rng, std::size_t clusters,
                                 std::size_t per_cluster, std::size_t d,
                                 double spread) {
  Clustered out;
  for (std::size_t c = 0; c < clusters; ++c) out.centers.push_back(GaussianVector(rng, d));
  std::normal_distribution<double> noise(0.0, spread);
  std::vector<double> data;
  const std::size_t n = clusters * per_cluster;
  for (std::size_t i = 0; i < n; ++i) {
    for (double x : out.centers[i % clusters]) data.push_back(x + noise(rng));
  }
  out.corpus = dartboard::EmbeddingMatrix(Ids(n), d, std::move(data));
  return out;
}

// Temporary directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            fmt::format("dartboard-test-{:x}", (std::uint64_t{rd()} << 32) | rd());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures

#endif  // DARTBOARD_TESTS_FIXTURES_H_
