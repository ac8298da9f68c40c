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

#ifndef CLP_METRICS_HPP_
#define CLP_METRICS_HPP_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clp/graph.hpp"
#include "clp/types.hpp"

namespace clp {

// Fraction of arcs (u, v) with y_u == y_v. Requires full labels and at
// least one arc.
double EdgeHomophily(const Graph& graph);

// Mean over nodes with at least one out-neighbor of the same-label
// neighbor fraction. Isolated nodes are skipped.
double NodeHomophily(const Graph& graph);

// Arc counts in the subgraph induced by v and its neighbors.
struct LocalHomophilyCounts {
  std::size_t matching = 0;
  std::size_t total = 0;
};
LocalHomophilyCounts LocalHomophilyArcs(const Graph& graph, NodeId v);

// matching / total for the induced 1-hop subgraph, or nullopt when that
// subgraph has no arcs.
std::optional<double> LocalHomophily(const Graph& graph, NodeId v);

struct HomophilyReport {
  double edge_homophily = 0.0;
  double node_homophily = 0.0;
  // (node, h_v) for every node with a defined h_v.
  std::vector<std::pair<NodeId, double>> per_node;
};
HomophilyReport MeasureHomophily(const Graph& graph);

// Row-normalized class-to-class arc counts. Classes without outgoing arcs
// get a uniform row and a warning.
CompatibilityMatrix TrueCompatibility(const Graph& graph);

// Frobenius distance. Throws on a shape mismatch.
double CompatDistance(const Matrix& h, const Matrix& h_hat);

// Fraction of `mask` nodes whose row argmax equals the label.
double Accuracy(const Matrix& beliefs, std::span<const ClassId> labels,
                std::span<const NodeId> mask);

// Mann-Whitney AUC over `mask`; ties count 1/2. Needs both classes.
double RocAuc(std::span<const double> scores, std::span<const int> labels,
              std::span<const NodeId> mask);

inline constexpr int kBucketCount = 11;

// h_v rounded half-up to the nearest tenth, as an index in [0, 10],
// computed in exact integer arithmetic.
int HomophilyBucket(const LocalHomophilyCounts& counts);

struct BucketRow {
  int bucket = 0;  // level = bucket / 10
  std::size_t count = 0;
  std::size_t correct = 0;
  std::optional<double> accuracy;  // nullopt when count == 0
};

struct BucketTable {
  std::array<BucketRow, kBucketCount> rows{};
  // Mask nodes whose induced 1-hop subgraph has no arcs.
  std::size_t undefined_count = 0;
  std::size_t undefined_correct = 0;

  // Columns (bucket, count, accuracy); 11 level rows then an "undefined"
  // row. Empty buckets print "na".
  std::string ToCsv() const;
};

BucketTable BucketAccuracy(const Matrix& beliefs, const Graph& graph,
                           std::span<const NodeId> mask);

}  // namespace clp

#endif  // CLP_METRICS_HPP_
