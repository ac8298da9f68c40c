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

#ifndef CLP_SYNTH_HPP_
#define CLP_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "clp/graph.hpp"
#include "clp/types.hpp"
#include "json.hpp"

namespace clp {

// Class-balanced random graph with a controlled intra-class edge rate.
// With m = n / |Y| nodes per class, delta = p_in + (|Y| - 1) p_out and the
// expected degree is m * delta. p_in is given as a fraction of delta.
struct SyntheticSpec {
  std::int64_t num_nodes = 2000;
  int num_classes = 10;
  double target_avg_degree = 5.0;
  double p_in_fraction = 0.5;
  std::uint64_t seed = 0;

  double delta() const;
  double p_in() const;
  double p_out() const;

  // Throws Error(kInvalidArgument) for a node count not divisible by the
  // class count, p_out <= 0, or any probability above 1.
  void Validate() const;
};

// p_in / delta for the eleven-point sweep, endpoints pulled in from 0 and 1.
inline constexpr std::array<double, 11> kPInGrid = {
    0.0001, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.9999};

// Largest node count sampled pair by pair; above it each class block draws
// a binomial edge count and then distinct uniform pairs.
inline constexpr std::int64_t kPairwiseSamplingMaxNodes = 5000;

// Undirected, labels i / m, no features.
Graph GenerateStructure(const SyntheticSpec& spec);

// n x 2 features. Class c is drawn from N(mu_c, R S R^T) with
// mu_c = 300 (cos t, sin t), t = 2 pi c / |Y|, S = 3500 diag(7, 2).
Matrix GaussianFeatures(std::span<const ClassId> labels, int num_classes, std::uint64_t seed);

Graph Generate(const SyntheticSpec& spec);

// Generator parameters and realized statistics for manifest.json.
nlohmann::json SyntheticManifest(const SyntheticSpec& spec, const Graph& graph);

enum class SyntheticPreset { kSyn1, kSyn2, kSyn3 };

SyntheticPreset ParsePreset(const std::string& name);
const char* ToString(SyntheticPreset preset);
double PresetAvgDegree(SyntheticPreset preset);
// 10000 * scale rounded to a positive multiple of 10.
std::int64_t PresetNodeCount(double scale);
// One spec per kPInGrid entry.
std::vector<SyntheticSpec> PresetSpecs(SyntheticPreset preset, double scale, std::uint64_t seed);

// Subdirectory name for grid index i: "h00" ... "h10".
std::string GridDirName(std::size_t index);

// Writes one dataset directory per grid point below `dir` and returns the
// subdirectory names.
std::vector<std::string> WritePreset(SyntheticPreset preset, double scale, std::uint64_t seed,
                                     const std::filesystem::path& dir);

}  // namespace clp

#endif  // CLP_SYNTH_HPP_
