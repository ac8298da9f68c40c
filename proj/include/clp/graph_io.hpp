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

#ifndef CLP_GRAPH_IO_HPP_
#define CLP_GRAPH_IO_HPP_

#include <filesystem>
#include <optional>

#include "clp/graph.hpp"
#include "json.hpp"

namespace clp {

// Dataset directory layout.
inline constexpr const char* kEdgesFile = "edges.tsv";
inline constexpr const char* kFeaturesFile = "features.tsv";
inline constexpr const char* kLabelsFile = "labels.tsv";
inline constexpr const char* kManifestFile = "manifest.json";

struct LoadOptions {
  bool directed = false;
  // Nodes missing from labels.tsv get kUnknownLabel instead of an error.
  bool partial_labels = false;
  // Defaults to the features.tsv line count.
  std::optional<std::int64_t> node_count;
  // Defaults to max label + 1.
  std::optional<int> num_classes;
};

// Reads the TSV trio. An empty `labels_path` loads an unlabeled graph.
// Errors (clp::Error, kData) name the file and 1-based line number.
Graph LoadGraph(const std::filesystem::path& edges_path,
                const std::filesystem::path& features_path,
                const std::filesystem::path& labels_path, const LoadOptions& options);

// Loads <dir>/{edges,features,labels}.tsv using manifest.json when present.
// Manifest checksums are verified. `directed_override` replaces the
// manifest's flag.
Graph LoadDataset(const std::filesystem::path& dir,
                  std::optional<bool> directed_override = std::nullopt,
                  bool partial_labels = false);

// Writes the TSV trio and manifest.json (node_count, num_classes, directed,
// feature_dim, sha256 per file). `extra` is merged into the manifest under
// the "extra" key when not null.
void SaveDataset(const Graph& graph, const std::filesystem::path& dir,
                 const nlohmann::json& extra = nullptr);

std::string EdgesTsv(const Graph& graph);
std::string FeaturesTsv(const Graph& graph);
std::string LabelsTsv(const Graph& graph);

nlohmann::json ReadManifest(const std::filesystem::path& dir);

}  // namespace clp

#endif  // CLP_GRAPH_IO_HPP_
