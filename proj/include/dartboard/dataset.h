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

// On-disk datasets.
//
//   passages.jsonl  {"id": ..., "text": ...} per line
//   dataset.jsonl   {"id", "query", "answers"?, "positive", "negative"} per
//                   line; "positive" is a flat id list (simple QA) or a list
//                   of per-component id lists (information integration), and
//                   the shape must be the same on every line.
//
// Embeddings (EMB1) and cross-encoder scores (SCM1) are keyed by the same ids.

#ifndef DARTBOARD_DATASET_H_
#define DARTBOARD_DATASET_H_

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "dartboard/eval.h"
#include "dartboard/vector_core.h"

namespace dartboard {

struct Corpus {
  EmbeddingMatrix embeddings;
  std::unordered_map<PassageId, std::string> texts;
};

std::unordered_map<PassageId, std::string> read_passages(
    const std::filesystem::path& path);

// Loads passages and embeddings and checks the two id sets are equal.
Corpus load_corpus(const std::filesystem::path& passages,
                   const std::filesystem::path& embeddings);

std::vector<QueryCase> read_dataset(const std::filesystem::path& path);

void write_passages(const std::filesystem::path& path,
                    const std::vector<std::pair<PassageId, std::string>>& passages);
void write_dataset(const std::filesystem::path& path,
                   const std::vector<QueryCase>& cases);

struct ConvertStats {
  std::size_t cases = 0;
  std::size_t passages = 0;
  bool integration = false;
};

// Converts an RGB benchmark file (one JSON object per line with "id",
// "query", "answer", "positive", "negative" holding passage texts) into the
// passages/dataset pair. Passage texts from all queries are merged into one
// collection, deduplicated by exact text, and numbered in first-seen order.
ConvertStats convert_rgb(const std::filesystem::path& rgb,
                         const std::filesystem::path& passages_out,
                         const std::filesystem::path& dataset_out);

}  // namespace dartboard

#endif  // DARTBOARD_DATASET_H_
