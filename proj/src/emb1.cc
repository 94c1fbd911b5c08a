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

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "dartboard/binary_io.h"
#include "dartboard/vector_core.h"
#include "json.hpp"
#include "spdlog/fmt/fmt.h"

namespace dartboard {
namespace binary {

static_assert(std::numeric_limits<float>::is_iec559);

void Reader::Fail(std::string_view message) const {
  throw Error(fmt::format("{}: {} at byte offset {}", format_, message, offset_));
}

void Reader::Need(std::size_t n, std::string_view what) {
  if (remaining() < n) {
    Fail(fmt::format("truncated {} (need {} bytes, have {})", what, n,
                     remaining()));
  }
}

void Reader::ExpectMagic(std::string_view magic) {
  Need(magic.size(), "magic");
  if (std::memcmp(bytes_.data(), magic.data(), magic.size()) != 0) {
    Fail(fmt::format("bad magic, expected '{}'", magic));
  }
  offset_ += magic.size();
}

std::uint8_t Reader::U8(std::string_view what) {
  Need(1, what);
  return bytes_[offset_++];
}

std::uint32_t Reader::U32(std::string_view what) {
  Need(4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(bytes_[offset_ + i]) << (8 * i);
  }
  offset_ += 4;
  return v;
}

std::vector<double> Reader::Floats(std::size_t count, std::string_view what) {
  if (count > remaining() / 4) {
    Fail(fmt::format("truncated {} (need {} float32 values, have {} bytes)",
                     what, count, remaining()));
  }
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(bytes_[offset_ + b]) << (8 * b);
    }
    const float f = std::bit_cast<float>(bits);
    if (!std::isfinite(f)) Fail(fmt::format("non-finite value in {}", what));
    out.push_back(f);
    offset_ += 4;
  }
  return out;
}

std::vector<std::string> Reader::IdArray(std::string_view what) {
  const char* begin = reinterpret_cast<const char*>(bytes_.data() + offset_);
  const char* end = reinterpret_cast<const char*>(bytes_.data() + bytes_.size());
  // Find the matching close bracket so a second array can follow.
  std::size_t len = 0;
  {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    const char* p = begin;
    while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
    if (p == end || *p != '[') Fail(fmt::format("expected JSON array for {}", what));
    for (; p < end; ++p) {
      const char c = *p;
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '[') {
        ++depth;
      } else if (c == ']' && --depth == 0) {
        len = static_cast<std::size_t>(p - begin) + 1;
        break;
      }
    }
    if (len == 0) Fail(fmt::format("unterminated JSON array for {}", what));
  }
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(begin, begin + len);
  } catch (const nlohmann::json::exception& e) {
    Fail(fmt::format("invalid JSON in {}: {}", what, e.what()));
  }
  std::vector<std::string> ids;
  ids.reserve(parsed.size());
  for (const auto& v : parsed) {
    if (v.is_string()) {
      ids.push_back(v.get<std::string>());
    } else if (v.is_number_integer()) {
      ids.push_back(v.dump());
    } else {
      Fail(fmt::format("{} entries must be strings or integers", what));
    }
  }
  offset_ += len;
  return ids;
}

void Reader::ExpectEnd() {
  while (offset_ < bytes_.size() && std::isspace(bytes_[offset_])) ++offset_;
  if (offset_ != bytes_.size()) Fail("trailing bytes");
}

void Writer::Raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

void Writer::U8(std::uint8_t v) { bytes_.push_back(v); }

void Writer::U32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back((v >> (8 * i)) & 0xffu);
}

void Writer::Float(double v) {
  const float f = static_cast<float>(v);
  if (!std::isfinite(f)) {
    throw Error(fmt::format("value {} does not fit in float32", v));
  }
  U32(std::bit_cast<std::uint32_t>(f));
}

void Writer::IdArray(const std::vector<std::string>& ids) {
  Raw(nlohmann::json(ids).dump());
}

std::vector<unsigned char> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFile(const std::filesystem::path& path,
               std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(fmt::format("write failed for '{}'", path.string()));
}

std::uint32_t CheckedU32(std::size_t n, std::string_view what) {
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(fmt::format("{} = {} does not fit in u32", what, n));
  }
  return static_cast<std::uint32_t>(n);
}

}  // namespace binary

EmbeddingMatrix parse_emb1(std::span<const unsigned char> bytes) {
  binary::Reader in(bytes, "EMB1");
  in.ExpectMagic("EMB1");
  const std::uint32_t rows = in.U32("row count");
  const std::uint32_t dims = in.U32("dims");
  if (dims == 0) in.Fail("dims must be >= 1");
  if (rows > 0 && dims > std::numeric_limits<std::size_t>::max() / rows) {
    in.Fail("row x dims overflows");
  }
  std::vector<double> data = in.Floats(std::size_t{rows} * dims, "embedding values");
  const std::size_t id_offset = in.offset();
  std::vector<std::string> ids = in.IdArray("id array");
  if (ids.size() != rows) {
    throw Error(fmt::format(
        "EMB1: id array at byte offset {} has {} entries, header says {} rows",
        id_offset, ids.size(), rows));
  }
  in.ExpectEnd();
  return EmbeddingMatrix(std::move(ids), dims, std::move(data));
}

EmbeddingMatrix read_emb1(const std::filesystem::path& path) {
  const auto bytes = binary::ReadFile(path);
  try {
    return parse_emb1(bytes);
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<unsigned char> serialize_emb1(const EmbeddingMatrix& m) {
  binary::Writer out;
  out.Raw("EMB1");
  out.U32(binary::CheckedU32(m.rows(), "rows"));
  out.U32(binary::CheckedU32(m.dims(), "dims"));
  for (double v : m.data()) out.Float(v);
  out.IdArray(m.ids());
  return std::move(out.bytes());
}

void write_emb1(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  binary::WriteFile(path, serialize_emb1(m));
}

}  // namespace dartboard
