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

// Little-endian byte cursor shared by the EMB1 and SCM1 codecs.

#ifndef DARTBOARD_BINARY_IO_H_
#define DARTBOARD_BINARY_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dartboard/vector_core.h"

namespace dartboard::binary {

class Reader {
 public:
  Reader(std::span<const unsigned char> bytes, std::string format)
      : bytes_(bytes), format_(std::move(format)) {}

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return bytes_.size() - offset_; }

  void ExpectMagic(std::string_view magic);
  std::uint8_t U8(std::string_view what);
  std::uint32_t U32(std::string_view what);
  // Reads `count` float32 values, rejecting non-finite ones.
  std::vector<double> Floats(std::size_t count, std::string_view what);
  // Consumes the next JSON array value and returns its elements as strings
  // (integers are accepted and rendered in decimal).
  std::vector<std::string> IdArray(std::string_view what);
  void ExpectEnd();

  [[noreturn]] void Fail(std::string_view message) const;

 private:
  void Need(std::size_t n, std::string_view what);

  std::span<const unsigned char> bytes_;
  std::string format_;
  std::size_t offset_ = 0;
};

class Writer {
 public:
  void Raw(std::string_view s);
  void U8(std::uint8_t v);
  void U32(std::uint32_t v);
  void Float(double v);
  void IdArray(const std::vector<std::string>& ids);

  std::vector<unsigned char>& bytes() { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

std::vector<unsigned char> ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path,
               std::span<const unsigned char> bytes);

// Rejects counts that do not fit the u32 header fields.
std::uint32_t CheckedU32(std::size_t n, std::string_view what);

}  // namespace dartboard::binary

#endif  // DARTBOARD_BINARY_IO_H_
