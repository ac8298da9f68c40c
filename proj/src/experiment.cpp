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

#include "clp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "clp/compatibility.hpp"
#include "clp/error.hpp"
#include "clp/graph_io.hpp"
#include "clp/util.hpp"

namespace clp {

using nlohmann::json;

Method ParseMethod(const std::string& name) {
  if (name == "mlp" || name == "mlp_only") return Method::kMlp;
  if (name == "lp") return Method::kLp;
  if (name == "clp") return Method::kClp;
  if (name == "clp-star" || name == "clp_star") return Method::kClpStar;
  Fail(ErrorCode::kInvalidArgument,
       "unknown method '" + name + "' (expected mlp, lp, clp or clp-star)");
}

const char* ToString(Method method) {
  switch (method) {
    case Method::kMlp: return "mlp";
    case Method::kLp: return "lp";
    case Method::kClp: return "clp";
    case Method::kClpStar: return "clp-star";
  }
  return "unknown";
}

Choice ParseChoice(const std::string& name) {
  if (name == "auto") return Choice::kAuto;
  if (name == "on") return Choice::kOn;
  if (name == "off") return Choice::kOff;
  Fail(ErrorCode::kInvalidArgument, "expected on, off or auto, got '" + name + "'");
}

TeleportChoice ParseTeleportChoice(const std::string& name) {
  if (name == "auto") return TeleportChoice::kAuto;
  if (name == "base") return TeleportChoice::kBase;
  if (name == "prior") return TeleportChoice::kPrior;
  Fail(ErrorCode::kInvalidArgument, "expected base, prior or auto, got '" + name + "'");
}

AdjacencyChoice ParseAdjacencyChoice(const std::string& name) {
  if (name == "auto") return AdjacencyChoice::kAuto;
  if (name == "raw") return AdjacencyChoice::kRaw;
  if (name == "symmetric") return AdjacencyChoice::kSymmetric;
  Fail(ErrorCode::kInvalidArgument, "expected raw, symmetric or auto, got '" + name + "'");
}

namespace {

const char* ChoiceName(Choice c) {
  return c == Choice::kAuto ? "auto" : c == Choice::kOn ? "on" : "off";
}
const char* ChoiceName(TeleportChoice c) {
  return c == TeleportChoice::kAuto ? "auto" : c == TeleportChoice::kBase ? "base" : "prior";
}
const char* ChoiceName(AdjacencyChoice c) {
  return c == AdjacencyChoice::kAuto ? "auto" : c == AdjacencyChoice::kRaw ? "raw" : "symmetric";
}

void CheckKeys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  Require(j.is_object(), where + " must be a JSON object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    Require(known, "unknown key '" + item.key() + "' in " + where);
  }
}

SyntheticSpec SyntheticFromJson(const json& j) {
  CheckKeys(j, {"preset", "scale", "num_nodes", "num_classes", "target_avg_degree", "p_in_fraction",
                "seed"},
            "synthetic");
  SyntheticSpec s;
  if (j.contains("preset")) {
    const SyntheticPreset p = ParsePreset(j.at("preset").get<std::string>());
    s.target_avg_degree = PresetAvgDegree(p);
    s.num_nodes = PresetNodeCount(j.value("scale", 1.0));
  }
  s.num_nodes = j.value("num_nodes", s.num_nodes);
  s.num_classes = j.value("num_classes", s.num_classes);
  s.target_avg_degree = j.value("target_avg_degree", s.target_avg_degree);
  s.p_in_fraction = j.value("p_in_fraction", s.p_in_fraction);
  s.seed = j.value("seed", s.seed);
  return s;
}

json SyntheticToJson(const SyntheticSpec& s) {
  return {{"num_nodes", s.num_nodes},
          {"num_classes", s.num_classes},
          {"target_avg_degree", s.target_avg_degree},
          {"p_in_fraction", s.p_in_fraction},
          {"seed", s.seed}};
}

Choice ChoiceFromJson(const json& j) {
  if (j.is_boolean()) return j.get<bool>() ? Choice::kOn : Choice::kOff;
  return ParseChoice(j.get<std::string>());
}

}  // namespace

void ExperimentConfig::Validate() const {
  Require(!dataset.empty() || synthetic.has_value(), "config: dataset or synthetic is required");
  Require(dataset.empty() || !synthetic.has_value(),
          "config: dataset and synthetic are mutually exclusive");
  if (synthetic) synthetic->Validate();
  Require(!seeds.empty(), "config: seeds must not be empty");
  Require(!methods.empty(), "config: at least one method is required");
  Require(!alpha_grid.empty(), "config: alpha_grid must not be empty");
  for (double a : alpha_grid) {
    Require(a > 0.0 && a < 1.0, "config: alpha values must lie in (0, 1), got " + FormatDouble(a));
  }
  Require(!hidden_layer_grid.empty(), "config: mlp.num_hidden_layers must not be empty");
  for (int layers : hidden_layer_grid) {
    TrainConfig t = mlp;
    t.num_hidden_layers = layers;
    t.Validate();
  }
  PropagationConfig p = propagation;
  p.alpha = alpha_grid.front();
  p.Validate();
}

ExperimentConfig ExperimentConfig::FromJson(const json& j) {
  try {
    CheckKeys(j, {"dataset", "synthetic", "directed", "partial_labels", "scheme", "seeds", "method",
                  "methods", "alpha_grid", "mlp", "propagation", "standardize_features",
                  "output_dir", "write_beliefs"},
              "config");
    ExperimentConfig c;
    c.dataset = j.value("dataset", std::string());
    if (j.contains("synthetic")) c.synthetic = SyntheticFromJson(j.at("synthetic"));
    c.directed = j.value("directed", c.directed);
    c.partial_labels = j.value("partial_labels", c.partial_labels);
    if (j.contains("scheme")) {
      const json& s = j.at("scheme");
      if (s.is_string()) {
        c.scheme = SplitScheme::Parse(s.get<std::string>());
      } else {
        CheckKeys(s, {"train", "validation"}, "scheme");
        c.scheme = SplitScheme::Custom(s.at("train").get<double>(), s.at("validation").get<double>());
      }
    }
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    Require(!(j.contains("method") && j.contains("methods")),
            "config: give either method or methods, not both");
    if (j.contains("method")) c.methods = {ParseMethod(j.at("method").get<std::string>())};
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(ParseMethod(m.get<std::string>()));
    }
    if (j.contains("alpha_grid")) c.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
    if (j.contains("mlp")) {
      const json& m = j.at("mlp");
      CheckKeys(m, {"learning_rate", "epochs", "early_stop_patience", "weight_decay", "dropout",
                    "hidden_dim", "num_hidden_layers", "optimizer"},
                "mlp");
      c.mlp.learning_rate = m.value("learning_rate", c.mlp.learning_rate);
      c.mlp.epochs = m.value("epochs", c.mlp.epochs);
      c.mlp.early_stop_patience = m.value("early_stop_patience", c.mlp.early_stop_patience);
      c.mlp.weight_decay = m.value("weight_decay", c.mlp.weight_decay);
      c.mlp.dropout = m.value("dropout", c.mlp.dropout);
      c.mlp.hidden_dim = m.value("hidden_dim", c.mlp.hidden_dim);
      if (m.contains("optimizer")) c.mlp.optimizer = ParseOptimizer(m.at("optimizer").get<std::string>());
      if (m.contains("num_hidden_layers")) {
        const json& l = m.at("num_hidden_layers");
        c.hidden_layer_grid = l.is_array() ? l.get<std::vector<int>>() : std::vector<int>{l.get<int>()};
      }
    }
    if (j.contains("propagation")) {
      const json& p = j.at("propagation");
      CheckKeys(p, {"max_iters", "tol", "divergence_window", "normalize_messages", "teleport",
                    "adjacency"},
                "propagation");
      c.propagation.max_iters = p.value("max_iters", c.propagation.max_iters);
      c.propagation.tol = p.value("tol", c.propagation.tol);
      c.propagation.divergence_window = p.value("divergence_window", c.propagation.divergence_window);
      if (p.contains("normalize_messages")) c.normalize_messages = ChoiceFromJson(p.at("normalize_messages"));
      if (p.contains("teleport")) c.teleport = ParseTeleportChoice(p.at("teleport").get<std::string>());
      if (p.contains("adjacency")) c.adjacency = ParseAdjacencyChoice(p.at("adjacency").get<std::string>());
    }
    c.standardize_features = j.value("standardize_features", c.standardize_features);
    c.output_dir = j.value("output_dir", std::string());
    c.write_beliefs = j.value("write_beliefs", c.write_beliefs);
    return c;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
}

json ExperimentConfig::ToJson() const {
  json j;
  if (synthetic) {
    j["synthetic"] = SyntheticToJson(*synthetic);
  } else {
    j["dataset"] = dataset;
  }
  j["directed"] = directed;
  j["partial_labels"] = partial_labels;
  if (scheme.kind == SplitScheme::Kind::kCustom) {
    j["scheme"] = {{"train", scheme.train_ratio}, {"validation", scheme.validation_ratio}};
  } else {
    j["scheme"] = scheme.name();
  }
  j["seeds"] = seeds;
  j["methods"] = json::array();
  for (Method m : methods) j["methods"].push_back(ToString(m));
  j["alpha_grid"] = alpha_grid;
  j["mlp"] = {{"learning_rate", mlp.learning_rate},
              {"epochs", mlp.epochs},
              {"early_stop_patience", mlp.early_stop_patience},
              {"weight_decay", mlp.weight_decay},
              {"dropout", mlp.dropout},
              {"hidden_dim", mlp.hidden_dim},
              {"num_hidden_layers", hidden_layer_grid},
              {"optimizer", ToString(mlp.optimizer)}};
  j["propagation"] = {{"max_iters", propagation.max_iters},
                      {"tol", propagation.tol},
                      {"divergence_window", propagation.divergence_window},
                      {"normalize_messages", ChoiceName(normalize_messages)},
                      {"teleport", ChoiceName(teleport)},
                      {"adjacency", ChoiceName(adjacency)}};
  j["standardize_features"] = standardize_features;
  j["output_dir"] = output_dir;
  j["write_beliefs"] = write_beliefs;
  return j;
}

Graph LoadExperimentGraph(const ExperimentConfig& config) {
  if (config.synthetic) return Generate(*config.synthetic);
  return LoadDataset(config.dataset, config.directed, config.partial_labels);
}

std::string BeliefsTsv(const Matrix& beliefs) {
  std::string out = "node";
  for (Eigen::Index k = 0; k < beliefs.cols(); ++k) out += "\tclass_" + std::to_string(k);
  out += "\tpredicted\n";
  const std::vector<ClassId> pred = ArgmaxRows(beliefs);
  for (Eigen::Index v = 0; v < beliefs.rows(); ++v) {
    out += std::to_string(v);
    for (Eigen::Index k = 0; k < beliefs.cols(); ++k) out += "\t" + FormatDouble(beliefs(v, k));
    out += "\t" + std::to_string(pred[static_cast<std::size_t>(v)]) + "\n";
  }
  return out;
}

namespace {

Graph Prepare(const ExperimentConfig& config, const Graph& graph) {
  if (!config.standardize_features || graph.feature_dim() == 0) return graph;
  return graph.WithFeatures(StandardizeColumns(graph.features()));
}

// `graph` is already prepared.
TrainedModel TrainOnPrepared(const ExperimentConfig& config, const Graph& graph,
                             std::uint64_t seed) {
  if (!graph.has_labels() || !graph.fully_labeled()) {
    Fail(ErrorCode::kData, "training needs a label for every node");
  }
  if (graph.feature_dim() == 0) Fail(ErrorCode::kData, "training needs node features");
  TrainedModel model;
  model.split = MakeSplits(graph, config.scheme, seed, 1).front();
  bool have = false;
  for (int layers : config.hidden_layer_grid) {
    TrainConfig tc = config.mlp;
    tc.num_hidden_layers = layers;
    tc.seed = seed;
    MlpParams init = InitMlp(static_cast<int>(graph.feature_dim()), tc.hidden_dim, layers,
                             graph.num_classes(), seed, tc.dropout);
    TrainResult r = Train(std::move(init), graph, model.split, tc);
    if (!have || r.best_val_acc > model.result.best_val_acc) {
      model.result = std::move(r);
      have = true;
    }
  }
  model.params = model.result.params;
  model.base = Predict(model.params, graph.features());
  model.checkpoint_sha256 = Sha256Hex(SerializeCheckpoint(model.params));
  return model;
}

std::optional<double> BinaryAuc(const Matrix& beliefs, const Graph& graph,
                                std::span<const NodeId> mask) {
  if (graph.num_classes() != 2) return std::nullopt;
  std::vector<double> scores(static_cast<std::size_t>(beliefs.rows()));
  std::vector<int> positive(scores.size());
  for (Eigen::Index v = 0; v < beliefs.rows(); ++v) {
    const double sum = beliefs.row(v).sum();
    scores[static_cast<std::size_t>(v)] = sum > 0.0 ? beliefs(v, 1) / sum : 0.5;
    positive[static_cast<std::size_t>(v)] = graph.label(static_cast<NodeId>(v)) == 1;
  }
  bool pos = false, neg = false;
  for (NodeId v : mask) (positive[static_cast<std::size_t>(v)] ? pos : neg) = true;
  if (!pos || !neg) return std::nullopt;
  return RocAuc(scores, positive, mask);
}

int Severity(ConvergenceVerdict v) {
  switch (v) {
    case ConvergenceVerdict::kCertified: return 0;
    case ConvergenceVerdict::kConvergent: return 1;
    case ConvergenceVerdict::kInconclusive: return 2;
    case ConvergenceVerdict::kDivergent: return 3;
  }
  return 3;
}

ConvergenceVerdict Worst(const std::vector<ClassConvergence>& checks) {
  ConvergenceVerdict worst = ConvergenceVerdict::kCertified;
  for (const ClassConvergence& c : checks) {
    if (Severity(c.verdict) > Severity(worst)) worst = c.verdict;
  }
  return worst;
}

std::vector<bool> NormalizationOptions(Choice c) {
  if (c == Choice::kOn) return {true};
  if (c == Choice::kOff) return {false};
  return {false, true};
}

std::vector<TeleportSource> TeleportOptions(TeleportChoice c) {
  if (c == TeleportChoice::kBase) return {TeleportSource::kBasePrediction};
  if (c == TeleportChoice::kPrior) return {TeleportSource::kPrior};
  return {TeleportSource::kBasePrediction, TeleportSource::kPrior};
}

std::vector<AdjacencyWeighting> AdjacencyOptions(AdjacencyChoice c) {
  if (c == AdjacencyChoice::kRaw) return {AdjacencyWeighting::kRaw};
  if (c == AdjacencyChoice::kSymmetric) return {AdjacencyWeighting::kSymmetric};
  return {AdjacencyWeighting::kRaw, AdjacencyWeighting::kSymmetric};
}

struct Evaluated {
  Candidate candidate;
  PropagationResult result;
  std::vector<std::string> verdicts;
};

struct SeedContext {
  const ExperimentConfig& config;
  const Graph& graph;
  const TrainedModel& model;
  const Beliefs& prior;
  const Matrix& y;
};

void Score(const SeedContext& ctx, const Matrix& beliefs, Candidate& c) {
  c.val_acc = Accuracy(beliefs, ctx.graph.labels(), ctx.model.split.validation);
  c.test_acc = Accuracy(beliefs, ctx.graph.labels(), ctx.model.split.test);
}

Candidate MakeCandidate(std::uint64_t seed, Method method, double alpha, bool normalize,
                        TeleportSource teleport, AdjacencyWeighting adjacency) {
  Candidate c;
  c.seed = seed;
  c.method = method;
  c.alpha = alpha;
  c.normalize_messages = normalize;
  c.teleport = teleport;
  c.adjacency = adjacency;
  return c;
}

PropagationConfig CandidateConfig(const ExperimentConfig& config, double alpha, bool normalize,
                                  TeleportSource teleport, AdjacencyWeighting adjacency) {
  PropagationConfig p = config.propagation;
  p.alpha = alpha;
  p.message_normalization = normalize;
  p.teleport = teleport;
  p.adjacency = adjacency;
  return p;
}

std::vector<std::string> VerdictNames(const std::vector<ClassConvergence>& checks) {
  std::vector<std::string> out;
  for (const ClassConvergence& c : checks) out.push_back(ToString(c.verdict));
  return out;
}

std::vector<Evaluated> EvaluateLp(const SeedContext& ctx, std::uint64_t seed) {
  std::vector<Evaluated> out;
  for (double alpha : ctx.config.alpha_grid) {
    Evaluated e;
    e.candidate = MakeCandidate(seed, Method::kLp, alpha, false, TeleportSource::kPrior,
                   AdjacencyWeighting::kSymmetric);
    e.result = PropagateLp(ctx.graph, ctx.y, ctx.model.split.train,
                           CandidateConfig(ctx.config, alpha, false, TeleportSource::kPrior,
                                           AdjacencyWeighting::kSymmetric));
    e.candidate.verdict = "certified_convergent";
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Evaluated> EvaluateClp(const SeedContext& ctx, std::uint64_t seed,
                                   const Matrix& h_hat) {
  const EdgeWeightTensor weights = EdgeWeights(ctx.graph, ctx.prior, h_hat);
  const auto checks = ConvergenceCheckGrid(weights, ctx.config.alpha_grid);
  std::vector<Evaluated> out;
  for (std::size_t a = 0; a < ctx.config.alpha_grid.size(); ++a) {
    const double alpha = ctx.config.alpha_grid[a];
    for (bool normalize : NormalizationOptions(ctx.config.normalize_messages)) {
      for (TeleportSource tele : TeleportOptions(ctx.config.teleport)) {
        Evaluated e;
        e.candidate = MakeCandidate(seed, Method::kClp, alpha, normalize, tele, AdjacencyWeighting::kRaw);
        e.verdicts = VerdictNames(checks[a]);
        // Normalized messages are scale-free in B, so the iterate stays
        // bounded whatever the spectrum of A^F.
        const ConvergenceVerdict worst = Worst(checks[a]);
        e.candidate.verdict = normalize ? "bounded" : ToString(worst);
        if (!normalize && worst == ConvergenceVerdict::kDivergent) {
          e.candidate.skipped = true;
          out.push_back(std::move(e));
          continue;
        }
        const Beliefs& teleport =
            tele == TeleportSource::kPrior ? ctx.prior : ctx.model.base;
        e.result = PropagateClp(weights, teleport,
                                CandidateConfig(ctx.config, alpha, normalize, tele,
                                                AdjacencyWeighting::kRaw));
        out.push_back(std::move(e));
      }
    }
  }
  return out;
}

std::vector<Evaluated> EvaluateClpStar(const SeedContext& ctx, std::uint64_t seed,
                                       const Matrix& h_hat) {
  std::vector<Evaluated> out;
  for (AdjacencyWeighting adj : AdjacencyOptions(ctx.config.adjacency)) {
    // The map B -> A B H has spectral radius rho(A) rho(H), and rho(H) = 1
    // for a doubly stochastic H.
    const SparseMatrix op = PropagationOperator(ctx.graph, adj);
    const auto checks = CheckOperatorGrid(op, ctx.config.alpha_grid);
    for (std::size_t a = 0; a < ctx.config.alpha_grid.size(); ++a) {
      const double alpha = ctx.config.alpha_grid[a];
      for (TeleportSource tele : TeleportOptions(ctx.config.teleport)) {
        Evaluated e;
        e.candidate = MakeCandidate(seed, Method::kClpStar, alpha, false, tele, adj);
        e.candidate.verdict = ToString(checks[a].verdict);
        e.verdicts = {e.candidate.verdict};
        if (checks[a].verdict == ConvergenceVerdict::kDivergent) {
          e.candidate.skipped = true;
          out.push_back(std::move(e));
          continue;
        }
        const Beliefs& teleport =
            tele == TeleportSource::kPrior ? ctx.prior : ctx.model.base;
        e.result = PropagateClpStar(ctx.graph, teleport, h_hat,
                                    CandidateConfig(ctx.config, alpha, false, tele, adj));
        out.push_back(std::move(e));
      }
    }
  }
  return out;
}

void WriteSeedArtifacts(const ExperimentConfig& config, const std::filesystem::path& dir,
                        Method method, const Matrix& beliefs, const PropagationResult* log) {
  if (config.write_beliefs) {
    WriteFileAtomic(dir / (std::string("beliefs_") + ToString(method) + ".tsv"),
                    BeliefsTsv(beliefs));
  }
  if (log != nullptr) {
    WriteFileAtomic(dir / (std::string("iterations_") + ToString(method) + ".csv"), log->LogCsv());
  }
}

}  // namespace

TrainedModel TrainBasePredictor(const ExperimentConfig& config, const Graph& graph,
                                std::uint64_t seed) {
  config.Validate();
  return TrainOnPrepared(config, Prepare(config, graph), seed);
}

void WriteTrainedModel(const TrainedModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  SaveCheckpoint(model.params, dir / "mlp.ckpt");
  WriteFileAtomic(dir / "train_log.csv", model.result.LogCsv());
  WriteFileAtomic(dir / "base_beliefs.tsv", BeliefsTsv(model.base.values));
}

RunReport RunPipeline(const ExperimentConfig& config) {
  config.Validate();
  return RunPipeline(config, LoadExperimentGraph(config));
}

RunReport RunPipeline(const ExperimentConfig& config, const Graph& input) {
  config.Validate();
  const Graph graph = Prepare(config, input);
  if (!graph.has_labels() || !graph.fully_labeled()) {
    Fail(ErrorCode::kData, "the pipeline needs a label for every node");
  }
  const Matrix y = OneHot(graph.labels(), graph.num_classes());
  std::optional<Matrix> true_h;
  if (graph.arc_count() > 0) true_h = TrueCompatibility(graph).values;

  const bool needs_compat =
      std::any_of(config.methods.begin(), config.methods.end(),
                  [](Method m) { return m == Method::kClp || m == Method::kClpStar; });
  const std::filesystem::path out_dir = config.output_dir;

  RunReport report;
  for (std::uint64_t seed : config.seeds) {
    const TrainedModel model = TrainOnPrepared(config, graph, seed);
    const Beliefs prior = PriorBeliefs(model.base, y, model.split.train);
    const SeedContext ctx{config, graph, model, prior, y};

    std::filesystem::path seed_dir;
    if (!out_dir.empty()) {
      seed_dir = out_dir / ("seed_" + std::to_string(seed));
      WriteTrainedModel(model, seed_dir);
    }

    CompatibilityMatrix h_hat;
    if (needs_compat) {
      h_hat = EstimateCompatibility(graph, prior, model.split.train);
      for (const std::string& w : h_hat.warnings) {
        report.warnings.push_back("seed " + std::to_string(seed) + ": " + w);
      }
      if (!seed_dir.empty()) SaveCompatibility(h_hat, seed_dir / "compat_hat");
    }

    for (Method method : config.methods) {
      SeedResult r;
      r.seed = seed;
      r.method = method;
      r.mlp_hidden_layers = static_cast<int>(model.params.layers.size()) - 1;
      r.checkpoint_sha256 = model.checkpoint_sha256;

      if (method == Method::kMlp) {
        r.val_acc = Accuracy(model.base.values, graph.labels(), model.split.validation);
        r.test_acc = Accuracy(model.base.values, graph.labels(), model.split.test);
        r.roc_auc = BinaryAuc(model.base.values, graph, model.split.test);
        if (!seed_dir.empty()) WriteSeedArtifacts(config, seed_dir, method, model.base.values, nullptr);
        report.per_seed.push_back(std::move(r));
        continue;
      }

      std::vector<Evaluated> evaluated;
      if (method == Method::kLp) evaluated = EvaluateLp(ctx, seed);
      if (method == Method::kClp) evaluated = EvaluateClp(ctx, seed, h_hat.values);
      if (method == Method::kClpStar) evaluated = EvaluateClpStar(ctx, seed, h_hat.values);
      if (method != Method::kLp && true_h) r.compat_distance = CompatDistance(*true_h, h_hat.values);

      const Evaluated* best = nullptr;
      for (Evaluated& e : evaluated) {
        if (!e.candidate.skipped && e.result.status == PropagationStatus::kDiverged) {
          e.candidate.skipped = true;
        }
        if (e.candidate.skipped) {
          e.candidate.status = e.result.log.empty() ? "skipped" : ToString(e.result.status);
        } else {
          e.candidate.status = ToString(e.result.status);
          e.candidate.iterations = e.result.iterations();
          Score(ctx, e.result.beliefs.values, e.candidate);
          if (best == nullptr || e.candidate.val_acc > best->candidate.val_acc) best = &e;
        }
        report.candidates.push_back(e.candidate);
      }

      if (best == nullptr) {
        r.fallback = true;
        r.val_acc = Accuracy(model.base.values, graph.labels(), model.split.validation);
        r.test_acc = Accuracy(model.base.values, graph.labels(), model.split.test);
        r.roc_auc = BinaryAuc(model.base.values, graph, model.split.test);
        r.warnings.push_back(std::string(ToString(method)) + " seed " + std::to_string(seed) +
                             ": every candidate diverged; reporting the base predictor");
        if (!seed_dir.empty()) WriteSeedArtifacts(config, seed_dir, method, model.base.values, nullptr);
      } else {
        r.chosen = best->candidate;
        r.val_acc = best->candidate.val_acc;
        r.test_acc = best->candidate.test_acc;
        r.roc_auc = BinaryAuc(best->result.beliefs.values, graph, model.split.test);
        r.convergence = best->verdicts;
        for (const std::string& w : best->result.warnings) r.warnings.push_back(w);
        if (!seed_dir.empty()) {
          WriteSeedArtifacts(config, seed_dir, method, best->result.beliefs.values, &best->result);
        }
      }
      report.warnings.insert(report.warnings.end(), r.warnings.begin(), r.warnings.end());
      report.per_seed.push_back(std::move(r));
    }
  }
  report.aggregate = Summarize(report.per_seed);
  if (!out_dir.empty()) WriteReport(report, config, out_dir);
  return report;
}

std::vector<MethodSummary> Summarize(const std::vector<SeedResult>& per_seed) {
  std::vector<MethodSummary> out;
  for (Method m : {Method::kMlp, Method::kLp, Method::kClp, Method::kClpStar}) {
    std::vector<double> acc, dist;
    for (const SeedResult& r : per_seed) {
      if (r.method != m) continue;
      acc.push_back(r.test_acc);
      if (r.compat_distance) dist.push_back(*r.compat_distance);
    }
    if (acc.empty()) continue;
    MethodSummary s;
    s.method = m;
    s.test_acc = ComputeMeanStd(acc);
    s.n_seeds = acc.size();
    if (!dist.empty()) s.compat_distance = ComputeMeanStd(dist);
    out.push_back(s);
  }
  return out;
}

namespace {

std::string Opt(const std::optional<double>& v) { return v ? FormatDouble(*v) : ""; }

}  // namespace

std::string RunReport::PerSeedCsv() const {
  std::string out =
      "seed,method,test_acc,val_acc,roc_auc,alpha,normalize_messages,teleport,adjacency,"
      "compat_distance,mlp_layers,checkpoint_sha256,fallback\n";
  for (const SeedResult& r : per_seed) {
    out += std::to_string(r.seed) + "," + ToString(r.method) + "," + FormatDouble(r.test_acc) + "," +
           FormatDouble(r.val_acc) + "," + Opt(r.roc_auc) + ",";
    if (r.chosen) {
      out += FormatDouble(r.chosen->alpha) + "," + (r.chosen->normalize_messages ? "on" : "off") +
             "," + ToString(r.chosen->teleport) + "," + ToString(r.chosen->adjacency) + ",";
    } else {
      out += ",,,,";
    }
    out += Opt(r.compat_distance) + "," + std::to_string(r.mlp_hidden_layers) + "," +
           r.checkpoint_sha256 + "," + (r.fallback ? "true" : "false") + "\n";
  }
  return out;
}

std::string RunReport::CandidatesCsv() const {
  std::string out =
      "seed,method,alpha,normalize_messages,teleport,adjacency,verdict,status,iterations,val_acc,"
      "test_acc,skipped\n";
  for (const Candidate& c : candidates) {
    out += std::to_string(c.seed) + "," + ToString(c.method) + "," + FormatDouble(c.alpha) + "," +
           (c.normalize_messages ? "on" : "off") + "," + ToString(c.teleport) + "," +
           ToString(c.adjacency) + "," + c.verdict + "," + c.status + "," +
           std::to_string(c.iterations) + "," + (c.skipped ? "" : FormatDouble(c.val_acc)) + "," +
           (c.skipped ? "" : FormatDouble(c.test_acc)) + "," + (c.skipped ? "true" : "false") + "\n";
  }
  return out;
}

json RunReport::ToJson() const {
  json j;
  j["aggregate"] = json::array();
  for (const MethodSummary& s : aggregate) {
    json a = {{"method", ToString(s.method)},
              {"mean_test_acc", s.test_acc.mean},
              {"std_test_acc", s.test_acc.std},
              {"n_seeds", s.n_seeds}};
    if (s.compat_distance) {
      a["mean_compat_distance"] = s.compat_distance->mean;
      a["std_compat_distance"] = s.compat_distance->std;
    }
    j["aggregate"].push_back(a);
  }
  j["per_seed"] = json::array();
  for (const SeedResult& r : per_seed) {
    json p = {{"seed", r.seed},
              {"method", ToString(r.method)},
              {"test_acc", r.test_acc},
              {"val_acc", r.val_acc},
              {"mlp_hidden_layers", r.mlp_hidden_layers},
              {"checkpoint_sha256", r.checkpoint_sha256},
              {"fallback", r.fallback},
              {"convergence", r.convergence},
              {"warnings", r.warnings}};
    if (r.roc_auc) p["roc_auc"] = *r.roc_auc;
    if (r.compat_distance) p["compat_distance"] = *r.compat_distance;
    if (r.chosen) {
      p["chosen"] = {{"alpha", r.chosen->alpha},
                     {"normalize_messages", r.chosen->normalize_messages},
                     {"teleport", ToString(r.chosen->teleport)},
                     {"adjacency", ToString(r.chosen->adjacency)},
                     {"iterations", r.chosen->iterations},
                     {"status", r.chosen->status}};
    }
    j["per_seed"].push_back(p);
  }
  j["warnings"] = warnings;
  return j;
}

void WriteReport(const RunReport& report, const ExperimentConfig& config,
                 const std::filesystem::path& dir, const std::string& timestamp) {
  std::filesystem::create_directories(dir);
  json j;
  j["header"] = {{"tool", "clp"}, {"format_version", 1}};
  if (!timestamp.empty()) j["header"]["timestamp"] = timestamp;
  j["config"] = config.ToJson();
  j.update(report.ToJson());
  WriteFileAtomic(dir / "report.json", j.dump(2) + "\n");
  WriteFileAtomic(dir / "per_seed.csv", report.PerSeedCsv());
  WriteFileAtomic(dir / "candidates.csv", report.CandidatesCsv());
}

std::vector<SweepRow> SweepHomophily(const ExperimentConfig& config,
                                     const std::vector<double>& h_grid) {
  Require(config.synthetic.has_value(), "sweep: needs a synthetic dataset");
  Require(!h_grid.empty(), "sweep: empty homophily grid");
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    const double h = h_grid[i];
    Require(h >= 0.0 && h <= 1.0, "sweep: homophily values must lie in [0, 1]");
    ExperimentConfig c = config;
    c.synthetic->p_in_fraction = std::clamp(h, kPInGrid.front(), kPInGrid.back());
    if (!config.output_dir.empty()) {
      c.output_dir = (std::filesystem::path(config.output_dir) / GridDirName(i)).string();
    }
    const RunReport report = RunPipeline(c);
    for (const MethodSummary& s : report.aggregate) rows.push_back({h, s.method, s.test_acc, s.n_seeds});
  }
  return rows;
}

std::string SweepCsv(const std::vector<SweepRow>& rows) {
  std::string out = "h,method,mean,std,n_seeds\n";
  for (const SweepRow& r : rows) {
    out += FormatDouble(r.h) + "," + ToString(r.method) + "," + FormatDouble(r.test_acc.mean) + "," +
           FormatDouble(r.test_acc.std) + "," + std::to_string(r.n_seeds) + "\n";
  }
  return out;
}

std::vector<CompatQualityRow> CompatQuality(const ExperimentConfig& config,
                                            const std::vector<SplitScheme>& schemes) {
  Require(!schemes.empty(), "compat-quality: no schemes");
  config.Validate();
  const Graph graph = LoadExperimentGraph(config);
  std::vector<CompatQualityRow> rows;
  for (const SplitScheme& scheme : schemes) {
    ExperimentConfig c = config;
    c.scheme = scheme;
    c.methods = {Method::kClp};
    if (!config.output_dir.empty()) {
      c.output_dir = (std::filesystem::path(config.output_dir) / scheme.name()).string();
    }
    const RunReport report = RunPipeline(c, graph);
    std::vector<double> dist;
    for (const SeedResult& r : report.per_seed) {
      if (r.compat_distance) dist.push_back(*r.compat_distance);
    }
    CompatQualityRow row;
    row.scheme = scheme;
    row.label_rate = scheme.train_fraction();
    row.distance = ComputeMeanStd(dist);
    row.mean_acc = report.aggregate.front().test_acc.mean;
    rows.push_back(row);
  }
  return rows;
}

std::string CompatQualityCsv(const std::vector<CompatQualityRow>& rows) {
  std::string out = "scheme,label_rate,mean_dist,std_dist,mean_acc\n";
  for (const CompatQualityRow& r : rows) {
    out += r.scheme.name() + "," + FormatDouble(r.label_rate) + "," + FormatDouble(r.distance.mean) +
           "," + FormatDouble(r.distance.std) + "," + FormatDouble(r.mean_acc) + "\n";
  }
  return out;
}

InspectReport Inspect(const ExperimentConfig& config, const Graph& input,
                      const std::optional<std::filesystem::path>& checkpoint) {
  if (!input.has_labels() || !input.fully_labeled()) {
    Fail(ErrorCode::kData, "inspect needs a label for every node");
  }
  InspectReport r;
  r.homophily = MeasureHomophily(input);
  r.true_h = TrueCompatibility(input);

  std::vector<std::size_t> degrees;
  for (NodeId v = 0; v < input.node_count(); ++v) degrees.push_back(input.out_degree(v));
  if (!degrees.empty()) {
    std::vector<std::size_t> sorted = degrees;
    std::sort(sorted.begin(), sorted.end());
    r.min_degree = sorted.front();
    r.max_degree = sorted.back();
    const std::size_t mid = sorted.size() / 2;
    r.median_degree = sorted.size() % 2 == 1
                          ? static_cast<double>(sorted[mid])
                          : 0.5 * static_cast<double>(sorted[mid - 1] + sorted[mid]);
    r.mean_degree = static_cast<double>(input.arc_count()) / static_cast<double>(degrees.size());
    r.isolated = static_cast<std::size_t>(std::count(degrees.begin(), degrees.end(), 0u));
  }
  for (NodeId v = 0; v < input.node_count(); ++v) {
    const LocalHomophilyCounts c = LocalHomophilyArcs(input, v);
    if (c.total == 0) {
      ++r.h_undefined;
    } else {
      ++r.h_histogram[static_cast<std::size_t>(HomophilyBucket(c))];
    }
  }
  if (checkpoint) {
    const Graph graph = Prepare(config, input);
    const MlpParams params = LoadCheckpoint(*checkpoint);
    if (params.input_dim() != graph.feature_dim() || params.num_classes() != graph.num_classes()) {
      Fail(ErrorCode::kData, "checkpoint shape does not match the dataset (" +
                                 std::to_string(params.input_dim()) + " -> " +
                                 std::to_string(params.num_classes()) + " vs " +
                                 std::to_string(graph.feature_dim()) + " -> " +
                                 std::to_string(graph.num_classes()) + ")");
    }
    const SplitMask split = MakeSplits(graph, config.scheme, config.seeds.front(), 1).front();
    r.buckets = BucketAccuracy(Predict(params, graph.features()).values, graph, split.test);
    r.bucket_mask = "test split, scheme " + config.scheme.name() + ", seed " +
                    std::to_string(config.seeds.front());
  }
  return r;
}

json InspectJson(const InspectReport& r) {
  json j;
  j["edge_homophily"] = r.homophily.edge_homophily;
  j["node_homophily"] = r.homophily.node_homophily;
  json h = json::array();
  for (Eigen::Index i = 0; i < r.true_h.values.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(r.true_h.values.cols()));
    for (Eigen::Index k = 0; k < r.true_h.values.cols(); ++k) row[static_cast<std::size_t>(k)] = r.true_h.values(i, k);
    h.push_back(row);
  }
  j["true_compatibility"] = h;
  j["compatibility_warnings"] = r.true_h.warnings;
  j["degree"] = {{"min", r.min_degree},
                 {"max", r.max_degree},
                 {"mean", r.mean_degree},
                 {"median", r.median_degree},
                 {"isolated", r.isolated}};
  j["h_histogram"] = r.h_histogram;
  j["h_undefined"] = r.h_undefined;
  if (r.buckets) j["bucket_mask"] = r.bucket_mask;
  return j;
}

std::string HistogramCsv(const InspectReport& r) {
  std::string out = "bucket,count\n";
  for (std::size_t b = 0; b < r.h_histogram.size(); ++b) {
    out += FormatDouble(static_cast<double>(b) / 10.0) + "," + std::to_string(r.h_histogram[b]) + "\n";
  }
  out += "undefined," + std::to_string(r.h_undefined) + "\n";
  return out;
}

}  // namespace clp
