// Copyright 2026 The CLP Authors
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

#ifndef CLP_EXPERIMENT_HPP_
#define CLP_EXPERIMENT_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "clp/graph.hpp"
#include "clp/metrics.hpp"
#include "clp/mlp.hpp"
#include "clp/propagation.hpp"
#include "clp/synth.hpp"
#include "clp/util.hpp"
#include "json.hpp"

namespace clp {

enum class Method { kMlp, kLp, kClp, kClpStar };

// Accepts mlp / mlp_only, lp, clp, clp-star / clp_star.
Method ParseMethod(const std::string& name);
const char* ToString(Method method);

// Candidate axes: "auto" puts both settings into the validation search.
enum class Choice { kAuto, kOn, kOff };
enum class TeleportChoice { kAuto, kBase, kPrior };
enum class AdjacencyChoice { kAuto, kRaw, kSymmetric };

Choice ParseChoice(const std::string& name);
TeleportChoice ParseTeleportChoice(const std::string& name);
AdjacencyChoice ParseAdjacencyChoice(const std::string& name);

struct ExperimentConfig {
  // Either a dataset directory or a generated graph.
  std::string dataset;
  std::optional<SyntheticSpec> synthetic;
  bool directed = false;
  bool partial_labels = false;

  SplitScheme scheme = SplitScheme::Medium();
  std::vector<std::uint64_t> seeds = {0};
  std::vector<Method> methods = {Method::kClp};
  std::vector<double> alpha_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

  TrainConfig mlp;
  // Depths tried per seed; the best validation accuracy wins.
  std::vector<int> hidden_layer_grid = {1, 2, 3};
  bool standardize_features = true;

  // alpha and message_normalization are overwritten per candidate.
  PropagationConfig propagation;
  Choice normalize_messages = Choice::kAuto;
  TeleportChoice teleport = TeleportChoice::kAuto;
  AdjacencyChoice adjacency = AdjacencyChoice::kAuto;

  std::string output_dir;
  bool write_beliefs = true;

  // Seeds nonempty, alpha values in (0, 1), nested configs valid.
  void Validate() const;

  // Unknown keys are rejected (Error kInvalidArgument).
  static ExperimentConfig FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
};

// Loads or generates the graph described by the config.
Graph LoadExperimentGraph(const ExperimentConfig& config);

struct Candidate {
  std::uint64_t seed = 0;
  Method method = Method::kMlp;
  double alpha = 0.0;
  bool normalize_messages = false;
  TeleportSource teleport = TeleportSource::kBasePrediction;
  AdjacencyWeighting adjacency = AdjacencyWeighting::kRaw;
  // Skipped candidates were ruled divergent before or during propagation.
  bool skipped = false;
  std::string verdict;  // worst per-class verdict, or "n/a"
  std::string status;   // propagation status, or "skipped"
  int iterations = 0;
  double val_acc = 0.0;
  double test_acc = 0.0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  Method method = Method::kMlp;
  double test_acc = 0.0;
  double val_acc = 0.0;
  std::optional<double> roc_auc;  // two-class graphs only
  std::optional<Candidate> chosen;
  std::optional<double> compat_distance;
  int mlp_hidden_layers = 0;
  std::string checkpoint_sha256;
  bool fallback = false;
  std::vector<std::string> convergence;  // per-class verdicts at chosen alpha
  std::vector<std::string> warnings;
};

struct MethodSummary {
  Method method = Method::kMlp;
  MeanStd test_acc;
  std::optional<MeanStd> compat_distance;
  std::size_t n_seeds = 0;
};

struct RunReport {
  std::vector<SeedResult> per_seed;
  std::vector<Candidate> candidates;
  std::vector<MethodSummary> aggregate;
  std::vector<std::string> warnings;

  // Columns (seed, method, test_acc, val_acc, roc_auc, alpha,
  // normalize_messages, teleport, adjacency, compat_distance, mlp_layers,
  // checkpoint_sha256, fallback).
  std::string PerSeedCsv() const;
  // Columns (seed, method, alpha, normalize_messages, teleport, adjacency,
  // verdict, status, iterations, val_acc, test_acc, skipped).
  std::string CandidatesCsv() const;
  nlohmann::json ToJson() const;
};

// Means and sample deviations per method from the per-seed rows.
std::vector<MethodSummary> Summarize(const std::vector<SeedResult>& per_seed);

// Split, train the base predictor, then evaluate every configured method
// on each seed. Writes the report files when output_dir is set.
RunReport RunPipeline(const ExperimentConfig& config);
RunReport RunPipeline(const ExperimentConfig& config, const Graph& graph);

// Writes report.json (with `timestamp` in its header when nonempty),
// per_seed.csv and candidates.csv.
void WriteReport(const RunReport& report, const ExperimentConfig& config,
                 const std::filesystem::path& dir, const std::string& timestamp = "");

struct SweepRow {
  double h = 0.0;
  Method method = Method::kMlp;
  MeanStd test_acc;
  std::size_t n_seeds = 0;
};

// One generated graph per grid value (p_in / delta, with 0 and 1 pulled in
// to the sampling endpoints), every method on each. Requires config.synthetic.
std::vector<SweepRow> SweepHomophily(const ExperimentConfig& config,
                                     const std::vector<double>& h_grid);
// Columns (h, method, mean, std, n_seeds).
std::string SweepCsv(const std::vector<SweepRow>& rows);

struct CompatQualityRow {
  SplitScheme scheme;
  double label_rate = 0.0;
  MeanStd distance;
  double mean_acc = 0.0;
};

// CLP on the same graph under each scheme. Needs a fully labeled graph.
std::vector<CompatQualityRow> CompatQuality(const ExperimentConfig& config,
                                            const std::vector<SplitScheme>& schemes);
// Columns (scheme, label_rate, mean_dist, std_dist, mean_acc).
std::string CompatQualityCsv(const std::vector<CompatQualityRow>& rows);

struct TrainedModel {
  MlpParams params;
  TrainResult result;  // from the selected depth
  SplitMask split;
  Beliefs base;
  std::string checkpoint_sha256;
};

// Split for `seed`, depth selection and training on the (optionally
// standardized) features.
TrainedModel TrainBasePredictor(const ExperimentConfig& config, const Graph& graph,
                                std::uint64_t seed);

// Writes mlp.ckpt, train_log.csv and base_beliefs.tsv.
void WriteTrainedModel(const TrainedModel& model, const std::filesystem::path& dir);

struct InspectReport {
  HomophilyReport homophily;
  CompatibilityMatrix true_h;
  std::size_t min_degree = 0;
  std::size_t max_degree = 0;
  double mean_degree = 0.0;
  double median_degree = 0.0;
  std::size_t isolated = 0;
  // Nodes per h_v bucket, then nodes with undefined h_v.
  std::array<std::size_t, kBucketCount> h_histogram{};
  std::size_t h_undefined = 0;
  std::optional<BucketTable> buckets;
  std::string bucket_mask;  // which nodes the bucket table covers
};

// With a checkpoint, predicts on the graph and tabulates accuracy by h_v
// over the test split of config.seeds[0].
InspectReport Inspect(const ExperimentConfig& config, const Graph& graph,
                      const std::optional<std::filesystem::path>& checkpoint);
nlohmann::json InspectJson(const InspectReport& report);
// Columns (bucket, count) with the trailing "undefined" row.
std::string HistogramCsv(const InspectReport& report);

// Row per node: node id, one probability column per class, argmax.
std::string BeliefsTsv(const Matrix& beliefs);

}  // namespace clp

#endif  // CLP_EXPERIMENT_HPP_
