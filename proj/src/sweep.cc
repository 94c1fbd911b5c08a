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

#include "dartboard/sweep.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "json.hpp"
#include "spdlog/fmt/fmt.h"

namespace dartboard {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double ParseNumber(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw Error(fmt::format("bad grid value '{}'", text));
  }
  return v;
}

std::vector<std::string_view> Split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string FormatMetric(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.6f}", v);
}

struct Point {
  std::size_t method;
  std::optional<double> param;
};

struct Outcome {
  double ndcg = 0.0;
  double diversity = kNaN;
};

}  // namespace

MethodSpec MethodSpec::Parse(std::string_view name, std::vector<double> grid) {
  MethodSpec spec;
  spec.name = std::string(name);
  spec.grid = std::move(grid);
  if (name == "oracle") {
    spec.kind = Kind::kOracle;
  } else if (name == "random") {
    spec.kind = Kind::kRandom;
  } else if (name == "empty") {
    spec.kind = Kind::kEmpty;
  } else {
    const auto dash = name.find('-');
    if (dash == std::string_view::npos) {
      throw Error(fmt::format("method '{}' must be <method>-<kernel> or a baseline", name));
    }
    const std::string_view method = name.substr(0, dash);
    spec.kernel = std::string(name.substr(dash + 1));
    if (spec.kernel != "cossim" && spec.kernel != "crosscoder" &&
        spec.kernel != "hybrid") {
      throw Error(fmt::format("unknown kernel '{}' in method '{}'", spec.kernel, name));
    }
    if (method == "knn") {
      spec.kind = Kind::kKnn;
    } else if (method == "mmr") {
      spec.kind = Kind::kMmr;
    } else if (method == "dartboard") {
      spec.kind = Kind::kDartboard;
    } else {
      throw Error(fmt::format("unknown method '{}'", name));
    }
    if (spec.kind != Kind::kDartboard && spec.kernel == "hybrid") {
      throw Error(fmt::format("'{}': the hybrid kernel applies to dartboard only", name));
    }
  }
  if (!spec.param_name().empty() && spec.grid.empty()) {
    throw Error(fmt::format("method '{}' needs a nonempty {} grid", name,
                            spec.param_name()));
  }
  return spec;
}

std::string_view MethodSpec::param_name() const {
  switch (kind) {
    case Kind::kDartboard:
      return "sigma";
    case Kind::kMmr:
      return "lambda";
    default:
      return "";
  }
}

bool MethodSpec::needs_scores() const {
  return kernel == "crosscoder" || kernel == "hybrid";
}

std::vector<SweepRow> SweepReport::best_rows() const {
  std::vector<SweepRow> best;
  for (const auto& row : rows) {
    auto it = std::find_if(best.begin(), best.end(), [&](const SweepRow& b) {
      return b.method == row.method;
    });
    if (it == best.end()) {
      best.push_back(row);
    } else if (row.ndcg > it->ndcg) {
      *it = row;
    }
  }
  return best;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string out = "method,param_name,param_value,ndcg,diversity,n_queries,k,K,seed\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.method, r.param_name,
                       r.param_value ? fmt::format("{}", *r.param_value) : "",
                       FormatMetric(r.ndcg), FormatMetric(r.diversity),
                       r.n_queries, r.k, r.triage_k, r.seed);
  }
  return out;
}

std::string sweep_json(std::span<const SweepRow> rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["method"] = r.method;
    row["param_name"] = r.param_name;
    row["param_value"] = r.param_value ? nlohmann::ordered_json(*r.param_value)
                                       : nlohmann::ordered_json(nullptr);
    row["ndcg"] = r.ndcg;
    row["diversity"] = std::isnan(r.diversity) ? nlohmann::ordered_json(nullptr)
                                               : nlohmann::ordered_json(r.diversity);
    row["n_queries"] = r.n_queries;
    row["k"] = r.k;
    row["K"] = r.triage_k;
    row["seed"] = r.seed;
    out.push_back(std::move(row));
  }
  return out.dump(2) + "\n";
}

RetrievalRequest make_request(const MethodSpec& method,
                              std::optional<double> param, QueryRef query,
                              const SweepData& data,
                              const SweepOptions& options) {
  RetrievalRequest req{std::move(query)};
  req.k = options.k;
  req.triage_k = options.triage_k;
  const double sigma = method.kind == MethodSpec::Kind::kDartboard && param
                           ? *param
                           : KernelConfig{}.sigma;
  if (method.kernel == "cossim") {
    req.kernel = KernelConfig::Cossim(sigma);
  } else if (method.kernel == "crosscoder") {
    req.kernel = KernelConfig::Crosscoder(sigma, data.scores);
  } else if (method.kernel == "hybrid") {
    req.kernel = KernelConfig::Hybrid(sigma, data.scores);
  }
  req.kernel.cosine_transform = options.cosine_transform;
  req.kernel.score_transform = options.score_transform;
  switch (method.kind) {
    case MethodSpec::Kind::kKnn:
      req.method = Method::kKnn;
      break;
    case MethodSpec::Kind::kMmr:
      req.method = Method::kMmr;
      req.mmr_diversity = param;
      break;
    case MethodSpec::Kind::kDartboard:
      req.method = Method::kDartboard;
      break;
    default:
      throw Error(fmt::format("'{}' is not a retrieval method", method.name));
  }
  return req;
}

SweepReport run_sweep(const SweepData& data, std::span<const MethodSpec> methods,
                      const SweepOptions& options) {
  if (methods.empty()) throw Error("sweep needs at least one method");
  if (options.k == 0) throw Error("k must be >= 1");
  for (const auto& m : methods) {
    if (m.needs_scores() && !data.scores) {
      throw Error(fmt::format("method '{}' needs a score matrix", m.name));
    }
  }
  for (const auto& c : data.cases) {
    validate_case(c, data.corpus);
    if (!data.query_embeddings.index_of(c.id)) {
      throw Error(fmt::format("no query embedding for query '{}'", c.id));
    }
  }

  std::vector<Point> points;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    if (methods[m].param_name().empty()) {
      points.push_back({m, std::nullopt});
    } else {
      for (double v : methods[m].grid) points.push_back({m, v});
    }
  }

  const std::size_t n_cases = data.cases.size();
  const std::size_t n_tasks = points.size() * n_cases;
  std::vector<Outcome> outcomes(n_tasks);
  std::vector<std::exception_ptr> errors(n_tasks);

  auto run_task = [&](std::size_t task) {
    const Point& p = points[task / n_cases];
    const std::size_t case_index = task % n_cases;
    const MethodSpec& method = methods[p.method];
    const QueryCase& c = data.cases[case_index];
    try {
      RetrievalResult result;
      switch (method.kind) {
        case MethodSpec::Kind::kEmpty:
          return;  // NDCG 0, diversity undefined
        case MethodSpec::Kind::kOracle:
          result = oracle_baseline(c, options.k);
          break;
        case MethodSpec::Kind::kRandom:
          result = random_baseline(data.corpus.ids(), options.k,
                                   SplitMix64(options.seed ^ SplitMix64(case_index)));
          break;
        default: {
          const std::size_t qrow = *data.query_embeddings.index_of(c.id);
          QueryRef q{data.query_embeddings.query(qrow), c.id};
          result = retrieve(data.corpus,
                            make_request(method, p.param, std::move(q), data, options));
        }
      }
      Outcome& o = outcomes[task];
      o.ndcg = ndcg_at_k(result.ids, c, options.k, options.ndcg);
      if (result.ids.size() >= 2) o.diversity = diversity(result.ids, data.corpus);
    } catch (const std::exception& e) {
      errors[task] = std::make_exception_ptr(
          Error(fmt::format("query '{}' ({}): {}", c.id, method.name, e.what())));
    }
  };

  std::size_t threads = options.threads != 0
                            ? options.threads
                            : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, n_tasks));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < n_tasks; t = next++) run_task(t);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  // Report the failure of the first case in case order.
  for (std::size_t c = 0; c < n_cases; ++c) {
    for (std::size_t p = 0; p < points.size(); ++p) {
      if (errors[p * n_cases + c]) std::rethrow_exception(errors[p * n_cases + c]);
    }
  }

  SweepReport report;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const MethodSpec& method = methods[points[p].method];
    SweepRow row;
    row.method = method.name;
    row.param_name = std::string(method.param_name());
    row.param_value = points[p].param;
    double ndcg_sum = 0.0;
    double div_sum = 0.0;
    std::size_t div_count = 0;
    for (std::size_t c = 0; c < n_cases; ++c) {
      const Outcome& o = outcomes[p * n_cases + c];
      ndcg_sum += o.ndcg;
      if (!std::isnan(o.diversity)) {
        div_sum += o.diversity;
        ++div_count;
      }
    }
    row.ndcg = n_cases ? ndcg_sum / static_cast<double>(n_cases) : 0.0;
    row.diversity = div_count ? div_sum / static_cast<double>(div_count) : kNaN;
    row.n_queries = n_cases;
    row.k = options.k;
    row.triage_k = options.triage_k;
    row.seed = options.seed;
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<double> parse_grid(std::string_view text) {
  if (text.empty()) throw Error("empty grid");
  for (std::string_view kind : {"linspace:", "logspace:"}) {
    if (!text.starts_with(kind)) continue;
    const auto parts = Split(text.substr(kind.size()), ':');
    if (parts.size() != 3) {
      throw Error(fmt::format("grid '{}' must be {}<lo>:<hi>:<n>", text, kind));
    }
    const double lo = ParseNumber(parts[0]);
    const double hi = ParseNumber(parts[1]);
    const double count = ParseNumber(parts[2]);
    if (count < 1 || count != std::floor(count)) {
      throw Error(fmt::format("grid '{}' needs a positive integer count", text));
    }
    const auto n = static_cast<std::size_t>(count);
    const bool log_spaced = kind == "logspace:";
    if (log_spaced && !(lo > 0 && hi > 0)) {
      throw Error(fmt::format("logspace grid '{}' needs positive bounds", text));
    }
    std::vector<double> grid;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
      grid.push_back(log_spaced
                         ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)))
                         : lo + f * (hi - lo));
    }
    if (n > 1) grid.back() = hi;
    return grid;
  }
  std::vector<double> grid;
  for (auto part : Split(text, ',')) grid.push_back(ParseNumber(part));
  return grid;
}

}  // namespace dartboard
