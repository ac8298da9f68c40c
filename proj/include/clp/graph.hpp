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

#ifndef CLP_GRAPH_HPP_
#define CLP_GRAPH_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clp/types.hpp"

namespace clp {

struct Arc {
  NodeId source;
  NodeId target;

  friend bool operator==(const Arc&, const Arc&) = default;
  friend auto operator<=>(const Arc&, const Arc&) = default;
};

// Immutable attributed graph: CSR adjacency over arcs in both directions,
// a dense feature matrix and optional labels (kUnknownLabel marks a node
// without one). Undirected graphs store every edge as two arcs.
class Graph {
 public:
  // Validates and normalizes the input: self-loops are dropped, duplicate
  // arcs merged, and the arc set closed under reversal unless `directed`.
  // `num_classes <= 0` infers the class count from the labels.
  // Throws Error(kData) on out-of-range ids or labels and on a feature row
  // count that differs from `node_count`.
  static Graph Build(std::int64_t node_count, std::vector<Arc> arcs,
                     Matrix features, std::optional<std::vector<ClassId>> labels,
                     int num_classes, bool directed);

  Graph() = default;

  NodeId node_count() const { return node_count_; }
  std::size_t arc_count() const { return out_targets_.size(); }
  bool directed() const { return directed_; }
  int num_classes() const { return num_classes_; }

  const Matrix& features() const { return features_; }
  Eigen::Index feature_dim() const { return features_.cols(); }

  bool has_labels() const { return !labels_.empty(); }
  // True when every node carries a label.
  bool fully_labeled() const;
  std::span<const ClassId> labels() const { return labels_; }
  ClassId label(NodeId v) const { return labels_[static_cast<std::size_t>(v)]; }

  std::span<const NodeId> out_neighbors(NodeId v) const;
  std::span<const NodeId> in_neighbors(NodeId v) const;
  std::size_t out_degree(NodeId v) const { return out_neighbors(v).size(); }
  std::size_t in_degree(NodeId v) const { return in_neighbors(v).size(); }

  std::span<const std::int64_t> out_offsets() const { return out_offsets_; }
  std::span<const NodeId> out_targets() const { return out_targets_; }
  std::span<const std::int64_t> in_offsets() const { return in_offsets_; }
  std::span<const NodeId> in_sources() const { return in_sources_; }

  // Arcs in (source, target) lexicographic order.
  std::vector<Arc> arcs() const;

  // Same structure and labels, different features.
  Graph WithFeatures(Matrix features) const;

 private:
  NodeId node_count_ = 0;
  bool directed_ = false;
  int num_classes_ = 0;
  std::vector<std::int64_t> out_offsets_{0};
  std::vector<NodeId> out_targets_;
  std::vector<std::int64_t> in_offsets_{0};
  std::vector<NodeId> in_sources_;
  Matrix features_;
  std::vector<ClassId> labels_;
};

// Y with Y[v, j] = 1 iff y_v = j. Unknown labels give all-zero rows.
Matrix OneHot(std::span<const ClassId> labels, int num_classes);

// Column-wise z-scores. Constant columns are only centered.
Matrix StandardizeColumns(const Matrix& x);

struct SplitScheme {
  enum class Kind { kSparse, kMedium, kDense, kCustom };
  Kind kind = Kind::kMedium;
  // Only read for kCustom.
  double train_ratio = 0.0;
  double validation_ratio = 0.0;

  static SplitScheme Sparse() { return {Kind::kSparse}; }
  static SplitScheme Medium() { return {Kind::kMedium}; }
  static SplitScheme Dense() { return {Kind::kDense}; }
  static SplitScheme Custom(double train, double validation) {
    return {Kind::kCustom, train, validation};
  }
  // "sparse" | "medium" | "dense"; throws Error(kInvalidArgument) otherwise.
  static SplitScheme Parse(const std::string& name);

  std::string name() const;
  double train_fraction() const;
  double validation_fraction() const;
};

// Disjoint train / validation / test node sets covering every node. Each
// set is sorted ascending.
struct SplitMask {
  std::vector<NodeId> train;
  std::vector<NodeId> validation;
  std::vector<NodeId> test;
  std::uint64_t seed = 0;
  std::uint32_t instance = 0;
  SplitScheme scheme;
};

// Returns `instances` random splits. Train and validation sizes are
// floor(ratio * n), the remainder is test. Classes are not balanced.
// Throws Error(kData) when the graph lacks labels or when any partition
// would be empty.
std::vector<SplitMask> MakeSplits(const Graph& graph, const SplitScheme& scheme,
                                  std::uint64_t seed, std::uint32_t instances);

// Dense 0/1 membership vector over the graph's nodes.
std::vector<std::uint8_t> MaskVector(std::span<const NodeId> nodes, NodeId node_count);

}  // namespace clp

#endif  // CLP_GRAPH_HPP_
