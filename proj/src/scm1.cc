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

#include <limits>

#include "dartboard/binary_io.h"
#include "dartboard/kernel.h"
#include "spdlog/fmt/fmt.h"

namespace dartboard {

ScoreMatrix parse_scm1(std::span<const unsigned char> bytes) {
  binary::Reader in(bytes, "SCM1");
  in.ExpectMagic("SCM1");
  const std::uint32_t nq = in.U32("query count");
  const std::uint32_t np = in.U32("passage count");
  const std::uint8_t has_pair = in.U8("pair flag");
  if (has_pair > 1) in.Fail(fmt::format("pair flag must be 0 or 1, got {}", has_pair));
  Matrix values(nq, np, in.Floats(std::size_t{nq} * np, "query x passage block"));
  std::optional<Matrix> pair;
  if (has_pair) {
    pair.emplace(np, np, in.Floats(std::size_t{np} * np, "passage pair block"));
  }
  const std::size_t qid_offset = in.offset();
  std::vector<std::string> query_ids = in.IdArray("query id array");
  const std::size_t pid_offset = in.offset();
  std::vector<std::string> passage_ids = in.IdArray("passage id array");
  if (query_ids.size() != nq) {
    throw Error(fmt::format(
        "SCM1: query id array at byte offset {} has {} entries, header says {}",
        qid_offset, query_ids.size(), nq));
  }
  if (passage_ids.size() != np) {
    throw Error(fmt::format(
        "SCM1: passage id array at byte offset {} has {} entries, header says {}",
        pid_offset, passage_ids.size(), np));
  }
  in.ExpectEnd();
  return ScoreMatrix(std::move(query_ids), std::move(passage_ids),
                     std::move(values), std::move(pair));
}

ScoreMatrix read_scm1(const std::filesystem::path& path) {
  const auto bytes = binary::ReadFile(path);
  try {
    return parse_scm1(bytes);
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<unsigned char> serialize_scm1(const ScoreMatrix& m) {
  binary::Writer out;
  out.Raw("SCM1");
  out.U32(binary::CheckedU32(m.query_ids().size(), "n_queries"));
  out.U32(binary::CheckedU32(m.passage_ids().size(), "n_passages"));
  out.U8(m.has_pair() ? 1 : 0);
  for (double v : m.values().data()) out.Float(v);
  if (m.has_pair()) {
    for (double v : m.pair().data()) out.Float(v);
  }
  out.IdArray(m.query_ids());
  out.IdArray(m.passage_ids());
  return std::move(out.bytes());
}

void write_scm1(const std::filesystem::path& path, const ScoreMatrix& m) {
  binary::WriteFile(path, serialize_scm1(m));
}

}  // namespace dartboard
