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

#include "dartboard/dataset.h"

#include <algorithm>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "spdlog/fmt/fmt.h"

namespace dartboard {
namespace {

using nlohmann::json;

std::string IdString(const json& v, std::string_view what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.dump();
  throw Error(fmt::format("{} must be a string or integer", what));
}

std::vector<std::string> IdList(const json& v, std::string_view what) {
  if (!v.is_array()) throw Error(fmt::format("{} must be an array", what));
  std::vector<std::string> out;
  for (const auto& e : v) out.push_back(IdString(e, what));
  return out;
}

void FlattenStrings(const json& v, std::vector<std::string>& out) {
  if (v.is_array()) {
    for (const auto& e : v) FlattenStrings(e, out);
  } else if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (!v.is_null()) {
    out.push_back(v.dump());
  }
}

// Calls fn(line_number, object) for each nonblank JSON line. A file whose
// first nonblank character is '[' is read as one JSON array instead.
void ForEachRecord(const std::filesystem::path& path,
                   const std::function<void(std::size_t, const json&)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return;
  try {
    if (text[first] == '[') {
      const json all = json::parse(text);
      for (std::size_t i = 0; i < all.size(); ++i) fn(i + 1, all[i]);
      return;
    }
  } catch (const json::exception& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
  std::istringstream lines(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(lines, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(fmt::format("{}:{}: {}", path.string(), number, e.what()));
    }
    try {
      fn(number, record);
    } catch (const Error& e) {
      throw Error(fmt::format("{}:{}: {}", path.string(), number, e.what()));
    }
  }
}

void WriteLines(const std::filesystem::path& path,
                const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw Error(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace

std::unordered_map<PassageId, std::string> read_passages(
    const std::filesystem::path& path) {
  std::unordered_map<PassageId, std::string> texts;
  ForEachRecord(path, [&](std::size_t, const json& r) {
    if (!r.is_object() || !r.contains("id")) {
      throw Error("passage record needs an \"id\"");
    }
    PassageId id = IdString(r["id"], "passage id");
    std::string text = r.contains("text") && r["text"].is_string()
                           ? r["text"].get<std::string>()
                           : std::string();
    if (!texts.emplace(id, std::move(text)).second) {
      throw Error(fmt::format("duplicate passage id '{}'", id));
    }
  });
  return texts;
}

Corpus load_corpus(const std::filesystem::path& passages,
                   const std::filesystem::path& embeddings) {
  Corpus corpus{read_emb1(embeddings), read_passages(passages)};
  std::vector<std::string> missing_text;
  for (const auto& id : corpus.embeddings.ids()) {
    if (!corpus.texts.contains(id)) missing_text.push_back(id);
  }
  std::vector<std::string> missing_embedding;
  for (const auto& [id, text] : corpus.texts) {
    if (!corpus.embeddings.index_of(id)) missing_embedding.push_back(id);
  }
  if (!missing_text.empty() || !missing_embedding.empty()) {
    std::sort(missing_embedding.begin(), missing_embedding.end());
    auto head = [](const std::vector<std::string>& ids) {
      const std::size_t n = std::min<std::size_t>(ids.size(), 10);
      std::string out = "[";
      for (std::size_t i = 0; i < n; ++i) out += (i ? ", " : "") + ids[i];
      out += "]";
      if (ids.size() > n) out += fmt::format(" (+{} more)", ids.size() - n);
      return out;
    };
    throw Error(fmt::format(
        "passage ids differ between '{}' and '{}': {} without text {}, {} without "
        "embedding {}",
        passages.string(), embeddings.string(), missing_text.size(),
        head(missing_text), missing_embedding.size(), head(missing_embedding)));
  }
  return corpus;
}

std::vector<QueryCase> read_dataset(const std::filesystem::path& path) {
  std::vector<QueryCase> cases;
  std::optional<bool> nested;
  ForEachRecord(path, [&](std::size_t, const json& r) {
    if (!r.is_object()) throw Error("dataset record must be an object");
    for (const char* field : {"id", "positive"}) {
      if (!r.contains(field)) throw Error(fmt::format("missing \"{}\"", field));
    }
    QueryCase c;
    c.id = IdString(r["id"], "query id");
    if (r.contains("query") && r["query"].is_string()) {
      c.query = r["query"].get<std::string>();
    }
    const json& pos = r["positive"];
    if (!pos.is_array()) throw Error("\"positive\" must be an array");
    const bool is_nested = !pos.empty() && pos.front().is_array();
    if (nested && *nested != is_nested) {
      throw Error(fmt::format(
          "query '{}': \"positive\" shape differs from earlier lines (flat vs nested)",
          c.id));
    }
    if (!pos.empty()) nested = is_nested;
    if (is_nested) {
      for (const auto& comp : pos) c.components.push_back(IdList(comp, "positive id"));
    } else {
      c.positives = IdList(pos, "positive id");
    }
    if (r.contains("negative")) c.negatives = IdList(r["negative"], "negative id");
    if (r.contains("answers")) FlattenStrings(r["answers"], c.answers);
    cases.push_back(std::move(c));
  });
  return cases;
}

void write_passages(const std::filesystem::path& path,
                    const std::vector<std::pair<PassageId, std::string>>& passages) {
  std::vector<std::string> lines;
  lines.reserve(passages.size());
  for (const auto& [id, text] : passages) {
    nlohmann::ordered_json r;
    r["id"] = id;
    r["text"] = text;
    lines.push_back(r.dump());
  }
  WriteLines(path, lines);
}

void write_dataset(const std::filesystem::path& path,
                   const std::vector<QueryCase>& cases) {
  std::vector<std::string> lines;
  lines.reserve(cases.size());
  for (const auto& c : cases) {
    nlohmann::ordered_json r;
    r["id"] = c.id;
    r["query"] = c.query;
    r["answers"] = c.answers;
    if (c.is_integration()) {
      r["positive"] = c.components;
    } else {
      r["positive"] = c.positives;
    }
    r["negative"] = c.negatives;
    lines.push_back(r.dump());
  }
  WriteLines(path, lines);
}

ConvertStats convert_rgb(const std::filesystem::path& rgb,
                         const std::filesystem::path& passages_out,
                         const std::filesystem::path& dataset_out) {
  std::vector<std::pair<PassageId, std::string>> passages;
  std::unordered_map<std::string, PassageId> by_text;
  auto intern = [&](const json& text) {
    if (!text.is_string()) throw Error("RGB passages must be strings");
    const std::string& s = text.get_ref<const std::string&>();
    auto it = by_text.find(s);
    if (it != by_text.end()) return it->second;
    PassageId id = fmt::format("p{:06d}", passages.size());
    by_text.emplace(s, id);
    passages.emplace_back(id, s);
    return id;
  };
  auto intern_list = [&](const json& list) {
    if (!list.is_array()) throw Error("RGB passage lists must be arrays");
    std::vector<PassageId> ids;
    for (const auto& t : list) {
      PassageId id = intern(t);
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    return ids;
  };

  std::vector<QueryCase> cases;
  std::optional<bool> nested;
  ForEachRecord(rgb, [&](std::size_t line, const json& r) {
    if (!r.is_object() || !r.contains("positive")) {
      throw Error("RGB record needs a \"positive\" field");
    }
    QueryCase c;
    c.id = r.contains("id") ? IdString(r["id"], "query id") : std::to_string(line - 1);
    if (r.contains("query") && r["query"].is_string()) {
      c.query = r["query"].get<std::string>();
    }
    if (r.contains("answer")) FlattenStrings(r["answer"], c.answers);
    const json& pos = r["positive"];
    const bool is_nested = pos.is_array() && !pos.empty() && pos.front().is_array();
    if (nested && *nested != is_nested) {
      throw Error("RGB file mixes flat and per-component positives");
    }
    if (pos.is_array() && !pos.empty()) nested = is_nested;
    if (is_nested) {
      for (const auto& comp : pos) c.components.push_back(intern_list(comp));
    } else {
      c.positives = intern_list(pos);
    }
    if (r.contains("negative")) c.negatives = intern_list(r["negative"]);
    cases.push_back(std::move(c));
  });

  write_passages(passages_out, passages);
  write_dataset(dataset_out, cases);
  return {cases.size(), passages.size(), nested.value_or(false)};
}

}  // namespace dartboard
