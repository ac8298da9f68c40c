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

#include "clp/clp.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include "clp/compatibility.hpp"
#include "clp/error.hpp"
#include "clp/experiment.hpp"
#include "clp/graph_io.hpp"
#include "clp/metrics.hpp"
#include "clp/propagation.hpp"
#include "clp/synth.hpp"
#include "clp/util.hpp"
#include "json.hpp"

struct clp_graph {
  clp::Graph graph;
};

struct clp_edge_weights {
  clp::EdgeWeightTensor tensor;
};

namespace {

using nlohmann::json;
using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

thread_local std::string g_last_error;

clp_status SetError(clp_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

clp_status FromCode(clp::ErrorCode code) {
  switch (code) {
    case clp::ErrorCode::kInvalidArgument: return CLP_ERROR_INVALID_ARGUMENT;
    case clp::ErrorCode::kData: return CLP_ERROR_DATA;
    case clp::ErrorCode::kNumerical: return CLP_ERROR_NUMERICAL;
    case clp::ErrorCode::kIo: return CLP_ERROR_IO;
  }
  return CLP_ERROR_INTERNAL;
}

template <typename Fn>
clp_status Guard(Fn&& fn) {
  try {
    fn();
    return CLP_OK;
  } catch (const clp::Error& e) {
    return SetError(FromCode(e.code()), e.what());
  } catch (const json::exception& e) {
    return SetError(CLP_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return SetError(CLP_ERROR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return SetError(CLP_ERROR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return SetError(CLP_ERROR_INTERNAL, e.what());
  }
}

#define CLP_CHECK_ARG(cond, msg) \
  do {                           \
    if (!(cond)) return SetError(CLP_ERROR_INVALID_ARGUMENT, msg); \
  } while (0)

clp::Matrix Load(const double* data, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const RowMajor>(data, rows, cols);
}

void Store(const clp::Matrix& m, double* out) {
  Eigen::Map<RowMajor>(out, m.rows(), m.cols()) = m;
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json ParseJson(const char* text) {
  if (text == nullptr) clp::Fail(clp::ErrorCode::kInvalidArgument, "null JSON input");
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    clp::Fail(clp::ErrorCode::kInvalidArgument, std::string("malformed JSON: ") + e.what());
  }
}

clp::ExperimentConfig ConfigFrom(const json& request) {
  clp::Require(request.contains("config"), "request needs a \"config\" object");
  return clp::ExperimentConfig::FromJson(request.at("config"));
}

}  // namespace

extern "C" {

const char* clp_version(void) { return "0.1.0"; }

const char* clp_status_string(clp_status status) {
  switch (status) {
    case CLP_OK: return "ok";
    case CLP_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case CLP_ERROR_DATA: return "data error";
    case CLP_ERROR_NUMERICAL: return "numerical failure";
    case CLP_ERROR_IO: return "i/o error";
    case CLP_ERROR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* clp_last_error(void) { return g_last_error.c_str(); }

clp_status clp_graph_load(const char* dir, int directed, int partial_labels, clp_graph** out) {
  CLP_CHECK_ARG(dir != nullptr && out != nullptr, "clp_graph_load: null argument");
  *out = nullptr;
  return Guard([&] {
    std::optional<bool> override;
    if (directed >= 0) override = directed != 0;
    *out = new clp_graph{clp::LoadDataset(dir, override, partial_labels != 0)};
  });
}

clp_status clp_graph_from_arrays(int64_t node_count, const int32_t* sources,
                                 const int32_t* targets, size_t arc_count, const double* features,
                                 int64_t feature_dim, const int32_t* labels, int num_classes,
                                 int directed, clp_graph** out) {
  CLP_CHECK_ARG(out != nullptr, "clp_graph_from_arrays: null output");
  CLP_CHECK_ARG(arc_count == 0 || (sources != nullptr && targets != nullptr),
                "clp_graph_from_arrays: null arc arrays");
  CLP_CHECK_ARG(node_count >= 0 && feature_dim >= 0, "clp_graph_from_arrays: negative size");
  CLP_CHECK_ARG(feature_dim == 0 || features != nullptr, "clp_graph_from_arrays: null features");
  *out = nullptr;
  return Guard([&] {
    std::vector<clp::Arc> arcs(arc_count);
    for (size_t i = 0; i < arc_count; ++i) arcs[i] = {sources[i], targets[i]};
    clp::Matrix x = feature_dim == 0 ? clp::Matrix(node_count, 0)
                                     : Load(features, node_count, feature_dim);
    std::optional<std::vector<clp::ClassId>> y;
    if (labels != nullptr) y.emplace(labels, labels + node_count);
    *out = new clp_graph{clp::Graph::Build(node_count, std::move(arcs), std::move(x), std::move(y),
                                           num_classes, directed != 0)};
  });
}

clp_status clp_graph_save(const clp_graph* graph, const char* dir) {
  CLP_CHECK_ARG(graph != nullptr && dir != nullptr, "clp_graph_save: null argument");
  return Guard([&] { clp::SaveDataset(graph->graph, dir); });
}

void clp_graph_free(clp_graph* graph) { delete graph; }

int64_t clp_graph_node_count(const clp_graph* graph) {
  return graph == nullptr ? -1 : graph->graph.node_count();
}

int64_t clp_graph_arc_count(const clp_graph* graph) {
  return graph == nullptr ? -1 : static_cast<int64_t>(graph->graph.arc_count());
}

int clp_graph_num_classes(const clp_graph* graph) {
  return graph == nullptr ? -1 : graph->graph.num_classes();
}

clp_status clp_graph_homophily(const clp_graph* graph, double* edge_homophily,
                               double* node_homophily) {
  CLP_CHECK_ARG(graph != nullptr, "clp_graph_homophily: null graph");
  return Guard([&] {
    if (edge_homophily != nullptr) *edge_homophily = clp::EdgeHomophily(graph->graph);
    if (node_homophily != nullptr) *node_homophily = clp::NodeHomophily(graph->graph);
  });
}

clp_status clp_graph_true_compatibility(const clp_graph* graph, double* out, size_t out_len) {
  CLP_CHECK_ARG(graph != nullptr && out != nullptr, "clp_graph_true_compatibility: null argument");
  const auto k = static_cast<size_t>(graph->graph.num_classes());
  CLP_CHECK_ARG(out_len >= k * k, "clp_graph_true_compatibility: output buffer too small");
  return Guard([&] { Store(clp::TrueCompatibility(graph->graph).values, out); });
}

clp_status clp_synth_generate(int64_t num_nodes, int num_classes, double avg_degree,
                              double p_in_fraction, uint64_t seed, clp_graph** out) {
  CLP_CHECK_ARG(out != nullptr, "clp_synth_generate: null output");
  *out = nullptr;
  return Guard([&] {
    clp::SyntheticSpec spec;
    spec.num_nodes = num_nodes;
    spec.num_classes = num_classes;
    spec.target_avg_degree = avg_degree;
    spec.p_in_fraction = p_in_fraction;
    spec.seed = seed;
    *out = new clp_graph{clp::Generate(spec)};
  });
}

clp_status clp_sinkhorn(const double* matrix, size_t k, double tol, int max_iters, double* out,
                        double* deviation, int* iterations) {
  CLP_CHECK_ARG(matrix != nullptr && out != nullptr && k > 0, "clp_sinkhorn: bad argument");
  return Guard([&] {
    const auto n = static_cast<Eigen::Index>(k);
    const clp::SinkhornResult r = clp::SinkhornKnopp(Load(matrix, n, n), {tol, max_iters});
    Store(r.values, out);
    if (deviation != nullptr) *deviation = r.deviation;
    if (iterations != nullptr) *iterations = r.iterations;
  });
}

clp_status clp_estimate_compatibility(const clp_graph* graph, const double* base,
                                      const int32_t* train, size_t train_len, double* h_out) {
  CLP_CHECK_ARG(graph != nullptr && base != nullptr && h_out != nullptr,
                "clp_estimate_compatibility: null argument");
  CLP_CHECK_ARG(train_len == 0 || train != nullptr, "clp_estimate_compatibility: null train");
  return Guard([&] {
    const clp::Graph& g = graph->graph;
    const clp::Beliefs b{Load(base, g.node_count(), g.num_classes()),
                         clp::BeliefKind::kBasePrediction};
    const std::span<const clp::NodeId> nodes(train, train_len);
    const clp::Beliefs prior =
        clp::PriorBeliefs(b, clp::OneHot(g.labels(), g.num_classes()), nodes);
    Store(clp::EstimateCompatibility(g, prior, nodes).values, h_out);
  });
}

clp_status clp_edge_weights_create(const clp_graph* graph, const double* prior, const double* h,
                                   clp_edge_weights** out) {
  CLP_CHECK_ARG(graph != nullptr && prior != nullptr && h != nullptr && out != nullptr,
                "clp_edge_weights_create: null argument");
  *out = nullptr;
  return Guard([&] {
    const clp::Graph& g = graph->graph;
    const clp::Beliefs b{Load(prior, g.node_count(), g.num_classes()), clp::BeliefKind::kPrior};
    *out = new clp_edge_weights{
        clp::EdgeWeights(g, b, Load(h, g.num_classes(), g.num_classes()))};
  });
}

void clp_edge_weights_free(clp_edge_weights* weights) { delete weights; }

clp_status clp_edge_weight(const clp_edge_weights* weights, int32_t sender, int32_t receiver,
                           double* out, size_t out_len) {
  CLP_CHECK_ARG(weights != nullptr && out != nullptr, "clp_edge_weight: null argument");
  CLP_CHECK_ARG(out_len >= static_cast<size_t>(weights->tensor.num_classes()),
                "clp_edge_weight: output buffer too small");
  const auto w = weights->tensor.Weight(sender, receiver);
  if (!w) {
    return SetError(CLP_ERROR_INVALID_ARGUMENT, "clp_edge_weight: no arc " + std::to_string(sender) +
                                                    " -> " + std::to_string(receiver));
  }
  for (Eigen::Index k = 0; k < w->size(); ++k) out[k] = (*w)(k);
  return CLP_OK;
}

clp_status clp_propagate_clp(const clp_edge_weights* weights, const double* teleport, double alpha,
                             int max_iters, double tol, int normalize_messages,
                             double* beliefs_out, int* iterations, int* status) {
  CLP_CHECK_ARG(weights != nullptr && teleport != nullptr && beliefs_out != nullptr,
                "clp_propagate_clp: null argument");
  return Guard([&] {
    const clp::EdgeWeightTensor& t = weights->tensor;
    clp::PropagationConfig config;
    config.alpha = alpha;
    config.max_iters = max_iters;
    config.tol = tol;
    config.message_normalization = normalize_messages != 0;
    const clp::PropagationResult r = clp::PropagateClp(
        t, {Load(teleport, t.node_count(), t.num_classes()), clp::BeliefKind::kBasePrediction},
        config);
    Store(r.beliefs.values, beliefs_out);
    if (iterations != nullptr) *iterations = r.iterations();
    if (status != nullptr) *status = static_cast<int>(r.status);
  });
}

clp_status clp_closed_form_clp(const clp_edge_weights* weights, const double* teleport,
                               double alpha, double* beliefs_out) {
  CLP_CHECK_ARG(weights != nullptr && teleport != nullptr && beliefs_out != nullptr,
                "clp_closed_form_clp: null argument");
  return Guard([&] {
    const clp::EdgeWeightTensor& t = weights->tensor;
    Store(clp::ClosedFormClpAll(t, Load(teleport, t.node_count(), t.num_classes()), alpha),
          beliefs_out);
  });
}

clp_status clp_convergence_check(const clp_edge_weights* weights, double alpha, int* verdicts_out,
                                 size_t out_len) {
  CLP_CHECK_ARG(weights != nullptr && verdicts_out != nullptr,
                "clp_convergence_check: null argument");
  CLP_CHECK_ARG(out_len >= static_cast<size_t>(weights->tensor.num_classes()),
                "clp_convergence_check: output buffer too small");
  return Guard([&] {
    const auto checks = clp::ConvergenceCheck(weights->tensor, alpha);
    for (size_t k = 0; k < checks.size(); ++k) {
      switch (checks[k].verdict) {
        case clp::ConvergenceVerdict::kCertified: verdicts_out[k] = CLP_VERDICT_CERTIFIED; break;
        case clp::ConvergenceVerdict::kConvergent: verdicts_out[k] = CLP_VERDICT_CONVERGENT; break;
        case clp::ConvergenceVerdict::kDivergent: verdicts_out[k] = CLP_VERDICT_DIVERGENT; break;
        case clp::ConvergenceVerdict::kInconclusive: verdicts_out[k] = CLP_VERDICT_INCONCLUSIVE; break;
      }
    }
  });
}

clp_status clp_run(const char* config_json, char** report_json) {
  CLP_CHECK_ARG(report_json != nullptr, "clp_run: null output");
  *report_json = nullptr;
  return Guard([&] {
    const clp::ExperimentConfig config = clp::ExperimentConfig::FromJson(ParseJson(config_json));
    const clp::RunReport report = clp::RunPipeline(config);
    *report_json = CopyString(report.ToJson().dump());
  });
}

clp_status clp_sweep(const char* request_json, char** csv) {
  CLP_CHECK_ARG(csv != nullptr, "clp_sweep: null output");
  *csv = nullptr;
  return Guard([&] {
    const json request = ParseJson(request_json);
    const clp::ExperimentConfig config = ConfigFrom(request);
    std::vector<double> grid(clp::kPInGrid.begin(), clp::kPInGrid.end());
    if (request.contains("h_grid")) grid = request.at("h_grid").get<std::vector<double>>();
    const std::string table = clp::SweepCsv(clp::SweepHomophily(config, grid));
    if (!config.output_dir.empty()) {
      clp::WriteFileAtomic(std::filesystem::path(config.output_dir) / "sweep.csv", table);
    }
    *csv = CopyString(table);
  });
}

clp_status clp_compat_quality(const char* request_json, char** csv) {
  CLP_CHECK_ARG(csv != nullptr, "clp_compat_quality: null output");
  *csv = nullptr;
  return Guard([&] {
    const json request = ParseJson(request_json);
    const clp::ExperimentConfig config = ConfigFrom(request);
    std::vector<clp::SplitScheme> schemes = {clp::SplitScheme::Sparse(), clp::SplitScheme::Medium(),
                                             clp::SplitScheme::Dense()};
    if (request.contains("schemes")) {
      schemes.clear();
      for (const auto& s : request.at("schemes")) {
        schemes.push_back(clp::SplitScheme::Parse(s.get<std::string>()));
      }
    }
    const std::string table = clp::CompatQualityCsv(clp::CompatQuality(config, schemes));
    if (!config.output_dir.empty()) {
      clp::WriteFileAtomic(std::filesystem::path(config.output_dir) / "compat_quality.csv", table);
    }
    *csv = CopyString(table);
  });
}

clp_status clp_inspect(const char* request_json, char** report_json) {
  CLP_CHECK_ARG(report_json != nullptr, "clp_inspect: null output");
  *report_json = nullptr;
  return Guard([&] {
    const json request = ParseJson(request_json);
    const clp::ExperimentConfig config = ConfigFrom(request);
    std::optional<std::filesystem::path> checkpoint;
    if (request.contains("checkpoint")) checkpoint = request.at("checkpoint").get<std::string>();
    const clp::Graph graph = clp::LoadExperimentGraph(config);
    const clp::InspectReport r = clp::Inspect(config, graph, checkpoint);
    json j = clp::InspectJson(r);
    if (r.buckets) j["bucket_table_csv"] = r.buckets->ToCsv();
    if (!config.output_dir.empty()) {
      const std::filesystem::path dir = config.output_dir;
      std::filesystem::create_directories(dir);
      clp::WriteFileAtomic(dir / "inspect.json", clp::InspectJson(r).dump(2) + "\n");
      clp::WriteFileAtomic(dir / "true_h.csv", clp::CompatibilityCsv(r.true_h.values));
      clp::WriteFileAtomic(dir / "h_histogram.csv", clp::HistogramCsv(r));
      if (r.buckets) clp::WriteFileAtomic(dir / "bucket_accuracy.csv", r.buckets->ToCsv());
    }
    *report_json = CopyString(j.dump());
  });
}

clp_status clp_train(const char* config_json, char** summary_json) {
  CLP_CHECK_ARG(summary_json != nullptr, "clp_train: null output");
  *summary_json = nullptr;
  return Guard([&] {
    const clp::ExperimentConfig config = clp::ExperimentConfig::FromJson(ParseJson(config_json));
    config.Validate();
    const clp::Graph graph = clp::LoadExperimentGraph(config);
    json runs = json::array();
    for (std::uint64_t seed : config.seeds) {
      const clp::TrainedModel m = clp::TrainBasePredictor(config, graph, seed);
      json run = {{"seed", seed},
                  {"hidden_layers", static_cast<int>(m.params.layers.size()) - 1},
                  {"best_epoch", m.result.best_epoch},
                  {"epochs_run", m.result.log.size()},
                  {"best_val_acc", m.result.best_val_acc},
                  {"test_acc", clp::Accuracy(m.base.values, graph.labels(), m.split.test)},
                  {"checkpoint_sha256", m.checkpoint_sha256}};
      if (!config.output_dir.empty()) {
        const std::filesystem::path dir =
            std::filesystem::path(config.output_dir) / ("seed_" + std::to_string(seed));
        clp::WriteTrainedModel(m, dir);
        run["dir"] = dir.string();
      }
      runs.push_back(run);
    }
    *summary_json = CopyString(json{{"runs", runs}}.dump());
  });
}

clp_status clp_synth(const char* request_json, char** summary_json) {
  CLP_CHECK_ARG(summary_json != nullptr, "clp_synth: null output");
  *summary_json = nullptr;
  return Guard([&] {
    const json request = ParseJson(request_json);
    clp::Require(request.contains("out"), "clp_synth: \"out\" directory is required");
    const std::filesystem::path out = request.at("out").get<std::string>();
    json summary;
    if (request.contains("preset")) {
      const clp::SyntheticPreset preset =
          clp::ParsePreset(request.at("preset").get<std::string>());
      const double scale = request.value("scale", 1.0);
      const std::uint64_t seed = request.value("seed", std::uint64_t{0});
      summary["preset"] = clp::ToString(preset);
      summary["datasets"] = json::array();
      for (const std::string& name : clp::WritePreset(preset, scale, seed, out)) {
        json entry = clp::ReadManifest(out / name)["extra"];
        entry["dir"] = name;
        summary["datasets"].push_back(entry);
      }
    } else {
      clp::Require(request.contains("synthetic"), "clp_synth: need \"preset\" or \"synthetic\"");
      const clp::SyntheticSpec spec =
          *clp::ExperimentConfig::FromJson({{"synthetic", request.at("synthetic")}}).synthetic;
      const clp::Graph g = clp::Generate(spec);
      const json manifest = clp::SyntheticManifest(spec, g);
      clp::SaveDataset(g, out, manifest);
      summary["datasets"] = json::array({manifest});
    }
    *summary_json = CopyString(summary.dump());
  });
}

void clp_string_free(char* s) { std::free(s); }

}  // extern "C"
