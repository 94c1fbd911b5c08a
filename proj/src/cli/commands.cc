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

#include "dartboard/cli.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "dartboard/dataset.h"
#include "dartboard/kernel.h"
#include "dartboard/logging.h"
#include "dartboard/retrieve.h"
#include "dartboard/sweep.h"
#include "json.hpp"
#include "spdlog/fmt/fmt.h"

namespace dartboard {
namespace {

// Defaults are the operating point of the original evaluation.
constexpr std::size_t kDefaultK = 5;
constexpr std::size_t kDefaultTriage = 100;
constexpr double kDefaultSigma = 0.096;
constexpr double kDefaultLambda = 0.5;

struct Options {
  std::string passages;
  std::string embeddings;
  std::string query_embeddings;
  std::string scores;
  std::string dataset;
  std::size_t k = kDefaultK;
  std::size_t triage = kDefaultTriage;
  double sigma = kDefaultSigma;
  double lambda = kDefaultLambda;
  std::string transform = "one_minus";
  std::string score_transform = "sigmoid";
  std::string out;
  std::string format;
  std::uint64_t seed = 0;
  std::size_t threads = 0;

  // retrieve
  std::string method = "dartboard";
  std::string kernel = "cossim";
  std::string query_id;
  std::string query_vector;

  // evaluate / sweep
  std::vector<std::string> methods;
  std::vector<std::string> kernels;
  bool first_hit_only = false;
  std::string sigma_grid = "logspace:0.01:1:8";
  std::string lambda_grid = "linspace:0:1:11";
  bool best_only = false;

  // convert
  std::string rgb;
};

const std::vector<std::string> kMethods = {"knn", "mmr", "dartboard"};
const std::vector<std::string> kKernels = {"cossim", "crosscoder", "hybrid"};
const std::vector<std::string> kAllMethods = {"knn",    "mmr",    "dartboard",
                                              "oracle", "random", "empty"};

void AddKernelOptions(CLI::App* cmd, Options& o) {
  cmd->add_option("--k", o.k, "Passages to return")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--triage", o.triage, "Candidates kept by the cosine KNN triage")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--transform", o.transform,
                  "Cosine similarity -> distance: one_minus|negate|sigmoid|affine:a,b")
      ->capture_default_str();
  cmd->add_option("--score-transform", o.score_transform,
                  "Cross-encoder score -> distance: one_minus|negate|sigmoid|affine:a,b")
      ->capture_default_str();
  cmd->add_option("--scores", o.scores, "Cross-encoder scores (SCM1)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--embeddings", o.embeddings, "Passage embeddings (EMB1)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--passages", o.passages, "Passage texts (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output file (default stdout)");
}

void Emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(o.out, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(fmt::format("cannot write '{}'", o.out));
  file << text;
  if (!file) throw Error(fmt::format("write failed for '{}'", o.out));
}

std::shared_ptr<const ScoreMatrix> LoadScores(const Options& o) {
  if (o.scores.empty()) return nullptr;
  return std::make_shared<const ScoreMatrix>(read_scm1(o.scores));
}

std::vector<double> ParseVector(const std::string& text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    double v = 0.0;
    const char* first = text.data() + start;
    const char* last = text.data() + end;
    while (first < last && *first == ' ') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      throw Error(fmt::format("bad --query-vector component '{}'",
                              text.substr(start, end - start)));
    }
    values.push_back(v);
    start = end + 1;
  }
  return values;
}

KernelConfig MakeKernel(const std::string& kernel, double sigma,
                        std::shared_ptr<const ScoreMatrix> scores) {
  if (kernel == "cossim") return KernelConfig::Cossim(sigma);
  if (kernel == "crosscoder") return KernelConfig::Crosscoder(sigma, std::move(scores));
  return KernelConfig::Hybrid(sigma, std::move(scores));
}

int CmdRetrieve(const Options& o, std::ostream& out) {
  const Method method = ParseMethod(o.method);
  if (method != Method::kDartboard && o.kernel == "hybrid") {
    throw Error("the hybrid kernel applies to --method dartboard only");
  }
  if (o.kernel != "cossim" && o.scores.empty()) {
    throw Error(fmt::format("--kernel {} needs --scores", o.kernel));
  }
  const DistanceTransform cosine_transform = DistanceTransform::Parse(o.transform);
  const DistanceTransform score_transform = DistanceTransform::Parse(o.score_transform);
  if (!(o.sigma > 0.0)) throw Error("--sigma must be positive");
  if (method == Method::kMmr && !(o.lambda >= 0.0 && o.lambda <= 1.0)) {
    throw Error("--lambda must be in [0, 1]");
  }

  const Corpus corpus = load_corpus(o.passages, o.embeddings);
  std::optional<std::string> query_id;
  if (!o.query_id.empty()) query_id = o.query_id;
  std::optional<QueryVector> vector;
  if (!o.query_vector.empty()) {
    vector.emplace(ParseVector(o.query_vector));
  } else {
    if (!query_id || o.query_embeddings.empty()) {
      throw Error("give --query-vector, or --query-id with --query-embeddings");
    }
    const EmbeddingMatrix queries = read_emb1(o.query_embeddings);
    vector.emplace(queries.query(queries.require_index(*query_id)));
  }

  RetrievalRequest req{QueryRef{*std::move(vector), query_id}};
  req.k = o.k;
  req.triage_k = o.triage;
  req.method = method;
  req.kernel = MakeKernel(o.kernel, o.sigma, LoadScores(o));
  req.kernel.cosine_transform = cosine_transform;
  req.kernel.score_transform = score_transform;
  if (method == Method::kMmr) req.mmr_diversity = o.lambda;

  const RetrievalResult result = retrieve(corpus.embeddings, req);
  std::string text;
  if (o.format == "csv") {
    text = "rank,id,objective,text\n";
    for (std::size_t i = 0; i < result.ids.size(); ++i) {
      std::string passage = corpus.texts.at(result.ids[i]);
      std::string quoted = "\"";
      for (char c : passage) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      quoted += '"';
      text += fmt::format("{},{},{},{}\n", i + 1, result.ids[i],
                          nlohmann::json(result.objective[i]).dump(), quoted);
    }
  } else {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < result.ids.size(); ++i) {
      nlohmann::ordered_json row;
      row["rank"] = i + 1;
      row["id"] = result.ids[i];
      row["text"] = corpus.texts.at(result.ids[i]);
      row["objective"] = result.objective[i];
      rows.push_back(std::move(row));
    }
    text = rows.dump(2) + "\n";
  }
  Emit(o, text, out);
  return 0;
}

std::vector<MethodSpec> ExpandMethods(const Options& o, bool have_scores,
                                      const std::vector<double>& sigma_grid,
                                      const std::vector<double>& lambda_grid) {
  const std::vector<std::string> methods = o.methods.empty() ? kAllMethods : o.methods;
  std::vector<std::string> kernels = o.kernels;
  if (kernels.empty()) {
    kernels = {"cossim"};
    if (have_scores) {
      kernels.push_back("crosscoder");
      kernels.push_back("hybrid");
    }
  }
  std::vector<MethodSpec> specs;
  for (const auto& m : methods) {
    if (m == "oracle" || m == "random" || m == "empty") {
      specs.push_back(MethodSpec::Parse(m));
      continue;
    }
    for (const auto& k : kernels) {
      if (m != "dartboard" && k == "hybrid") continue;
      if (k != "cossim" && !have_scores) {
        throw Error(fmt::format("kernel '{}' needs --scores", k));
      }
      const std::string name = m + "-" + k;
      if (m == "dartboard") {
        specs.push_back(MethodSpec::Parse(name, sigma_grid));
      } else if (m == "mmr") {
        specs.push_back(MethodSpec::Parse(name, lambda_grid));
      } else {
        specs.push_back(MethodSpec::Parse(name));
      }
    }
  }
  return specs;
}

int CmdEvaluate(const Options& o, bool sweep, std::ostream& out) {
  SweepOptions options;
  options.k = o.k;
  options.triage_k = o.triage;
  options.seed = o.seed;
  options.threads = o.threads;
  options.cosine_transform = DistanceTransform::Parse(o.transform);
  options.score_transform = DistanceTransform::Parse(o.score_transform);
  options.ndcg.first_hit_only = o.first_hit_only;
  const std::vector<double> sigma_grid =
      sweep ? parse_grid(o.sigma_grid) : std::vector<double>{o.sigma};
  const std::vector<double> lambda_grid =
      sweep ? parse_grid(o.lambda_grid) : std::vector<double>{o.lambda};
  for (double s : sigma_grid) {
    if (!(s > 0.0)) throw Error(fmt::format("sigma must be positive, got {}", s));
  }
  for (double l : lambda_grid) {
    if (!(l >= 0.0 && l <= 1.0)) {
      throw Error(fmt::format("lambda must be in [0, 1], got {}", l));
    }
  }
  const std::vector<MethodSpec> specs =
      ExpandMethods(o, !o.scores.empty(), sigma_grid, lambda_grid);

  const Corpus corpus = load_corpus(o.passages, o.embeddings);
  const EmbeddingMatrix queries = read_emb1(o.query_embeddings);
  const std::vector<QueryCase> cases = read_dataset(o.dataset);
  Log().info("evaluating {} queries over {} passages", cases.size(),
             corpus.embeddings.rows());
  const SweepData data{corpus.embeddings, queries, cases, LoadScores(o)};
  const SweepReport report = run_sweep(data, specs, options);

  const std::vector<SweepRow> rows =
      sweep && o.best_only ? report.best_rows() : report.rows;
  Emit(o, o.format == "json" ? sweep_json(rows) : sweep_csv(rows), out);
  return 0;
}

int CmdConvert(const Options& o, std::ostream& out) {
  const ConvertStats stats = convert_rgb(o.rgb, o.passages, o.dataset);
  out << fmt::format("converted {} {} cases, {} unique passages\n", stats.cases,
                     stats.integration ? "information-integration" : "simple",
                     stats.passages);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Diversity-aware passage retrieval (Dartboard, MMR, KNN)", "dartboard"};
  app.require_subcommand(1);
  Options o;

  auto* retrieve_cmd = app.add_subcommand("retrieve", "Retrieve k passages for one query");
  AddKernelOptions(retrieve_cmd, o);
  retrieve_cmd->add_option("--method", o.method)
      ->check(CLI::IsMember(kMethods))
      ->capture_default_str();
  retrieve_cmd->add_option("--kernel", o.kernel)
      ->check(CLI::IsMember(kKernels))
      ->capture_default_str();
  retrieve_cmd->add_option("--sigma", o.sigma, "Gaussian spread")->capture_default_str();
  retrieve_cmd->add_option("--lambda", o.lambda, "MMR diversity weight")
      ->capture_default_str();
  retrieve_cmd->add_option("--query-id", o.query_id,
                           "Query id (selects query embedding and score row)");
  retrieve_cmd->add_option("--query-embeddings", o.query_embeddings,
                           "Query embeddings (EMB1, keyed by query id)")
      ->check(CLI::ExistingFile);
  retrieve_cmd->add_option("--query-vector", o.query_vector,
                           "Query embedding as comma-separated values");
  retrieve_cmd->add_option("--format", o.format, "json (default) or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  auto add_eval_options = [&](CLI::App* cmd) {
    AddKernelOptions(cmd, o);
    cmd->add_option("--dataset", o.dataset, "Labeled queries (JSONL)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--query-embeddings", o.query_embeddings,
                    "Query embeddings (EMB1, keyed by query id)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--method", o.methods,
                    "Methods: knn, mmr, dartboard, oracle, random, empty")
        ->delimiter(',')
        ->check(CLI::IsMember(kAllMethods));
    cmd->add_option("--kernel", o.kernels, "Kernels: cossim, crosscoder, hybrid")
        ->delimiter(',')
        ->check(CLI::IsMember(kKernels));
    cmd->add_option("--seed", o.seed, "Random baseline seed")->capture_default_str();
    cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    cmd->add_flag("--first-hit-only", o.first_hit_only,
                  "Simple-case NDCG credits only the first retrieved positive");
    cmd->add_option("--format", o.format, "csv (default) or json")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Mean NDCG and diversity per method");
  add_eval_options(evaluate_cmd);
  evaluate_cmd->add_option("--sigma", o.sigma, "Gaussian spread")->capture_default_str();
  evaluate_cmd->add_option("--lambda", o.lambda, "MMR diversity weight")
      ->capture_default_str();

  auto* sweep_cmd = app.add_subcommand("sweep", "Grid search over sigma and lambda");
  add_eval_options(sweep_cmd);
  sweep_cmd->add_option("--sigma-grid", o.sigma_grid,
                        "Sigma values: a,b,c | linspace:lo:hi:n | logspace:lo:hi:n")
      ->capture_default_str();
  sweep_cmd->add_option("--lambda-grid", o.lambda_grid, "MMR lambda values")
      ->capture_default_str();
  sweep_cmd->add_flag("--best", o.best_only, "Emit only the best row per method");

  auto* convert_cmd = app.add_subcommand(
      "convert", "Convert an RGB benchmark file into passages + dataset JSONL");
  convert_cmd->add_option("--rgb", o.rgb, "RGB JSON lines file")
      ->required()
      ->check(CLI::ExistingFile);
  convert_cmd->add_option("--passages", o.passages, "Output passages JSONL")->required();
  convert_cmd->add_option("--dataset", o.dataset, "Output dataset JSONL")->required();

  std::vector<std::string> argv_storage = {"dartboard"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (retrieve_cmd->parsed()) return CmdRetrieve(o, out);
    if (evaluate_cmd->parsed()) return CmdEvaluate(o, /*sweep=*/false, out);
    if (sweep_cmd->parsed()) return CmdEvaluate(o, /*sweep=*/true, out);
    if (convert_cmd->parsed()) return CmdConvert(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace dartboard
