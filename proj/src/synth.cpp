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

#include "clp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <unordered_set>

#include "clp/error.hpp"
#include "clp/graph_io.hpp"
#include "clp/metrics.hpp"
#include "clp/util.hpp"

namespace clp {

double SyntheticSpec::delta() const {
  return target_avg_degree * static_cast<double>(num_classes) / static_cast<double>(num_nodes);
}

double SyntheticSpec::p_in() const { return p_in_fraction * delta(); }

double SyntheticSpec::p_out() const {
  return (delta() - p_in()) / static_cast<double>(num_classes - 1);
}

void SyntheticSpec::Validate() const {
  Require(num_classes >= 2, "synth: need at least two classes");
  Require(num_nodes >= num_classes, "synth: fewer nodes than classes");
  Require(num_nodes % num_classes == 0,
          "synth: num_nodes (" + std::to_string(num_nodes) + ") must be divisible by num_classes (" +
              std::to_string(num_classes) + ")");
  Require(num_nodes <= std::numeric_limits<NodeId>::max(), "synth: too many nodes");
  Require(target_avg_degree > 0.0, "synth: target_avg_degree must be > 0");
  Require(p_in_fraction > 0.0 && p_in_fraction < 1.0, "synth: p_in_fraction must lie in (0, 1)");
  Require(p_out() > 0.0, "synth: parameters imply p_out <= 0");
  Require(p_in() <= 1.0 && p_out() <= 1.0,
          "synth: target degree too high for this node count (edge probability above 1)");
}

namespace {

// Pairs (base_a + i, base_b + j); diagonal blocks only take i < j.
void SampleBlockDense(NodeId base_a, NodeId base_b, NodeId m, bool diagonal, double p, Rng& rng,
                      std::vector<Arc>& arcs) {
  for (NodeId i = 0; i < m; ++i) {
    for (NodeId j = diagonal ? i + 1 : 0; j < m; ++j) {
      if (Uniform01(rng) < p) arcs.push_back({base_a + i, base_b + j});
    }
  }
}

void SampleBlockSparse(NodeId base_a, NodeId base_b, NodeId m, bool diagonal, double p, Rng& rng,
                       std::vector<Arc>& arcs) {
  const auto mm = static_cast<std::uint64_t>(m);
  const std::uint64_t pairs = diagonal ? mm * (mm - 1) / 2 : mm * mm;
  std::binomial_distribution<std::uint64_t> count_dist(pairs, p);
  const std::uint64_t count = count_dist(rng);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(count * 2);
  while (seen.size() < count) {
    NodeId i = static_cast<NodeId>(rng() % mm);
    NodeId j = static_cast<NodeId>(rng() % mm);
    if (diagonal) {
      if (i == j) continue;
      if (i > j) std::swap(i, j);
    }
    const std::uint64_t code = static_cast<std::uint64_t>(i) * mm + static_cast<std::uint64_t>(j);
    if (seen.insert(code).second) arcs.push_back({base_a + i, base_b + j});
  }
}

}  // namespace

Graph GenerateStructure(const SyntheticSpec& spec) {
  spec.Validate();
  const int c = spec.num_classes;
  const auto m = static_cast<NodeId>(spec.num_nodes / c);
  const bool pairwise = spec.num_nodes <= kPairwiseSamplingMaxNodes;
  std::vector<Arc> arcs;
  for (int a = 0; a < c; ++a) {
    for (int b = a; b < c; ++b) {
      Rng rng = MakeStream(spec.seed, static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(c) +
                                          static_cast<std::uint64_t>(b));
      const double p = a == b ? spec.p_in() : spec.p_out();
      if (pairwise) {
        SampleBlockDense(a * m, b * m, m, a == b, p, rng, arcs);
      } else {
        SampleBlockSparse(a * m, b * m, m, a == b, p, rng, arcs);
      }
    }
  }
  std::vector<ClassId> labels(static_cast<std::size_t>(spec.num_nodes));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<ClassId>(i / static_cast<std::size_t>(m));
  return Graph::Build(spec.num_nodes, std::move(arcs), Matrix(), std::move(labels), c,
                      /*directed=*/false);
}

Matrix GaussianFeatures(std::span<const ClassId> labels, int num_classes, std::uint64_t seed) {
  Require(num_classes >= 1, "gaussian_features: num_classes must be >= 1");
  constexpr double kRadius = 300.0;
  constexpr double kScale = 3500.0;
  struct ClassParams {
    double mx, my, l11, l21, l22;
  };
  std::vector<ClassParams> params;
  for (int c = 0; c < num_classes; ++c) {
    const double t = 2.0 * std::numbers::pi * c / num_classes;
    const double cs = std::cos(t);
    const double sn = std::sin(t);
    // R diag(7, 2) R^T scaled, then its Cholesky factor.
    const double s11 = kScale * (7.0 * cs * cs + 2.0 * sn * sn);
    const double s12 = kScale * (7.0 - 2.0) * cs * sn;
    const double s22 = kScale * (7.0 * sn * sn + 2.0 * cs * cs);
    const double l11 = std::sqrt(s11);
    const double l21 = s12 / l11;
    params.push_back({kRadius * cs, kRadius * sn, l11, l21, std::sqrt(s22 - l21 * l21)});
  }
  Matrix x(static_cast<Eigen::Index>(labels.size()), 2);
  Rng rng = MakeStream(seed, 0x6761757373);
  for (std::size_t v = 0; v < labels.size(); ++v) {
    const ClassId c = labels[v];
    Require(c >= 0 && c < num_classes, "gaussian_features: label out of range");
    const ClassParams& p = params[static_cast<std::size_t>(c)];
    const NormalPair z = BoxMuller(rng);
    const auto row = static_cast<Eigen::Index>(v);
    x(row, 0) = p.mx + p.l11 * z.first;
    x(row, 1) = p.my + p.l21 * z.first + p.l22 * z.second;
  }
  return x;
}

Graph Generate(const SyntheticSpec& spec) {
  Graph g = GenerateStructure(spec);
  Matrix features = GaussianFeatures(g.labels(), spec.num_classes, MixSeed(spec.seed, 0x66656174));
  return g.WithFeatures(std::move(features));
}

nlohmann::json SyntheticManifest(const SyntheticSpec& spec, const Graph& graph) {
  nlohmann::json j;
  j["generator"] = "class_block_gaussian";
  j["num_classes"] = spec.num_classes;
  j["target_avg_degree"] = spec.target_avg_degree;
  j["p_in_fraction"] = spec.p_in_fraction;
  j["p_in"] = spec.p_in();
  j["p_out"] = spec.p_out();
  j["delta"] = spec.delta();
  j["seed"] = spec.seed;
  j["target_edge_homophily"] = spec.p_in_fraction;
  j["realized_edge_homophily"] = graph.arc_count() > 0 ? EdgeHomophily(graph) : 0.0;
  j["realized_avg_degree"] =
      static_cast<double>(graph.arc_count()) / static_cast<double>(graph.node_count());
  j["edge_count"] = graph.arc_count() / 2;
  // Feature geometry is defined for ten classes; other counts reuse it with
  // an angle step of 2 pi / |Y|.
  j["generalized_class_count"] = spec.num_classes != 10;
  return j;
}

SyntheticPreset ParsePreset(const std::string& name) {
  if (name == "syn1") return SyntheticPreset::kSyn1;
  if (name == "syn2") return SyntheticPreset::kSyn2;
  if (name == "syn3") return SyntheticPreset::kSyn3;
  Fail(ErrorCode::kInvalidArgument, "unknown preset '" + name + "' (expected syn1, syn2 or syn3)");
}

const char* ToString(SyntheticPreset preset) {
  switch (preset) {
    case SyntheticPreset::kSyn1: return "syn1";
    case SyntheticPreset::kSyn2: return "syn2";
    case SyntheticPreset::kSyn3: return "syn3";
  }
  return "unknown";
}

double PresetAvgDegree(SyntheticPreset preset) {
  switch (preset) {
    case SyntheticPreset::kSyn1: return 5.0;
    case SyntheticPreset::kSyn2: return 10.0;
    case SyntheticPreset::kSyn3: return 15.0;
  }
  return 0.0;
}

std::int64_t PresetNodeCount(double scale) {
  Require(std::isfinite(scale) && scale > 0.0, "preset: scale must be > 0");
  const double tens = std::round(1000.0 * scale);
  Require(tens <= 1e8, "preset: scale too large");
  return std::max<std::int64_t>(10, static_cast<std::int64_t>(tens) * 10);
}

std::vector<SyntheticSpec> PresetSpecs(SyntheticPreset preset, double scale, std::uint64_t seed) {
  std::vector<SyntheticSpec> specs;
  for (double f : kPInGrid) {
    SyntheticSpec s;
    s.num_nodes = PresetNodeCount(scale);
    s.num_classes = 10;
    s.target_avg_degree = PresetAvgDegree(preset);
    s.p_in_fraction = f;
    s.seed = seed;
    specs.push_back(s);
  }
  return specs;
}

std::string GridDirName(std::size_t index) {
  return index < 10 ? "h0" + std::to_string(index) : "h" + std::to_string(index);
}

std::vector<std::string> WritePreset(SyntheticPreset preset, double scale, std::uint64_t seed,
                                     const std::filesystem::path& dir) {
  std::vector<std::string> names;
  const auto specs = PresetSpecs(preset, scale, seed);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const Graph g = Generate(specs[i]);
    nlohmann::json extra = SyntheticManifest(specs[i], g);
    extra["preset"] = ToString(preset);
    extra["scale"] = scale;
    names.push_back(GridDirName(i));
    SaveDataset(g, dir / names.back(), extra);
  }
  return names;
}

}  // namespace clp
