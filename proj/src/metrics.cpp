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

#include "clp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clp/error.hpp"
#include "clp/util.hpp"

namespace clp {

namespace {

void RequireLabels(const Graph& graph, const char* what) {
  if (!graph.fully_labeled()) {
    Fail(ErrorCode::kData, std::string(what) + ": every node needs a label");
  }
}

}  // namespace

double EdgeHomophily(const Graph& graph) {
  RequireLabels(graph, "edge_homophily");
  if (graph.arc_count() == 0) Fail(ErrorCode::kData, "edge_homophily: graph has no arcs");
  std::size_t matching = 0;
  for (NodeId u = 0; u < graph.node_count(); ++u) {
    for (NodeId v : graph.out_neighbors(u)) {
      if (graph.label(u) == graph.label(v)) ++matching;
    }
  }
  return static_cast<double>(matching) / static_cast<double>(graph.arc_count());
}

double NodeHomophily(const Graph& graph) {
  RequireLabels(graph, "node_homophily");
  double sum = 0.0;
  std::size_t counted = 0;
  for (NodeId u = 0; u < graph.node_count(); ++u) {
    const auto nbrs = graph.out_neighbors(u);
    if (nbrs.empty()) continue;
    const auto same = std::count_if(nbrs.begin(), nbrs.end(),
                                    [&](NodeId v) { return graph.label(v) == graph.label(u); });
    sum += static_cast<double>(same) / static_cast<double>(nbrs.size());
    ++counted;
  }
  if (counted == 0) Fail(ErrorCode::kData, "node_homophily: every node is isolated");
  return sum / static_cast<double>(counted);
}

LocalHomophilyCounts LocalHomophilyArcs(const Graph& graph, NodeId v) {
  RequireLabels(graph, "local_homophily");
  Require(v >= 0 && v < graph.node_count(), "local_homophily: node id out of range");
  // Members of the induced subgraph: v and both its in- and out-neighbors.
  std::vector<NodeId> members;
  members.push_back(v);
  for (NodeId u : graph.out_neighbors(v)) members.push_back(u);
  for (NodeId u : graph.in_neighbors(v)) members.push_back(u);
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());

  LocalHomophilyCounts counts;
  for (NodeId u : members) {
    for (NodeId w : graph.out_neighbors(u)) {
      if (!std::binary_search(members.begin(), members.end(), w)) continue;
      ++counts.total;
      if (graph.label(u) == graph.label(w)) ++counts.matching;
    }
  }
  return counts;
}

std::optional<double> LocalHomophily(const Graph& graph, NodeId v) {
  const LocalHomophilyCounts c = LocalHomophilyArcs(graph, v);
  if (c.total == 0) return std::nullopt;
  return static_cast<double>(c.matching) / static_cast<double>(c.total);
}

HomophilyReport MeasureHomophily(const Graph& graph) {
  HomophilyReport report;
  report.edge_homophily = EdgeHomophily(graph);
  report.node_homophily = NodeHomophily(graph);
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    if (auto h = LocalHomophily(graph, v)) report.per_node.emplace_back(v, *h);
  }
  return report;
}

CompatibilityMatrix TrueCompatibility(const Graph& graph) {
  RequireLabels(graph, "true_compatibility");
  const int k = graph.num_classes();
  Require(k >= 1, "true_compatibility: graph has no classes");
  Matrix counts = Matrix::Zero(k, k);
  for (NodeId u = 0; u < graph.node_count(); ++u) {
    for (NodeId v : graph.out_neighbors(u)) counts(graph.label(u), graph.label(v)) += 1.0;
  }
  CompatibilityMatrix h;
  h.normalization = Normalization::kRowStochastic;
  h.values = counts;
  for (int i = 0; i < k; ++i) {
    const double total = counts.row(i).sum();
    if (total == 0.0) {
      h.values.row(i).setConstant(1.0 / k);
      h.warnings.push_back("class " + std::to_string(i) +
                           " has no outgoing arcs; its row is undefined and set uniform");
    } else {
      h.values.row(i) /= total;
    }
  }
  return h;
}

double CompatDistance(const Matrix& h, const Matrix& h_hat) {
  if (h.rows() != h_hat.rows() || h.cols() != h_hat.cols()) {
    Fail(ErrorCode::kInvalidArgument, "compat_distance: dimension mismatch");
  }
  return (h - h_hat).norm();
}

double Accuracy(const Matrix& beliefs, std::span<const ClassId> labels,
                std::span<const NodeId> mask) {
  if (mask.empty()) Fail(ErrorCode::kInvalidArgument, "accuracy: empty mask");
  Require(static_cast<std::size_t>(beliefs.rows()) == labels.size(),
          "accuracy: beliefs and labels disagree on node count");
  std::size_t correct = 0;
  for (NodeId v : mask) {
    Require(v >= 0 && static_cast<std::size_t>(v) < labels.size(), "accuracy: node out of range");
    const ClassId y = labels[static_cast<std::size_t>(v)];
    if (y == kUnknownLabel) Fail(ErrorCode::kData, "accuracy: unlabeled node in mask");
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < beliefs.cols(); ++j) {
      if (beliefs(v, j) > beliefs(v, best)) best = j;
    }
    if (best == y) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(mask.size());
}

double RocAuc(std::span<const double> scores, std::span<const int> labels,
              std::span<const NodeId> mask) {
  Require(scores.size() == labels.size(), "roc_auc: scores and labels differ in length");
  if (mask.empty()) Fail(ErrorCode::kInvalidArgument, "roc_auc: empty mask");
  std::vector<std::pair<double, int>> items;
  items.reserve(mask.size());
  for (NodeId v : mask) {
    Require(v >= 0 && static_cast<std::size_t>(v) < scores.size(), "roc_auc: node out of range");
    items.emplace_back(scores[static_cast<std::size_t>(v)], labels[static_cast<std::size_t>(v)] != 0);
  }
  std::sort(items.begin(), items.end());
  // Rank-sum form with midranks for ties.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    while (j < items.size() && items[j].first == items[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (items[t].second) {
        positive_rank_sum += midrank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = items.size() - positives;
  if (positives == 0 || negatives == 0) {
    Fail(ErrorCode::kData, "roc_auc: mask contains a single class");
  }
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

int HomophilyBucket(const LocalHomophilyCounts& counts) {
  Require(counts.total > 0, "homophily bucket of an empty subgraph");
  // floor(10 m / t + 1/2) == floor((20 m + t) / (2 t))
  return static_cast<int>((20 * counts.matching + counts.total) / (2 * counts.total));
}

BucketTable BucketAccuracy(const Matrix& beliefs, const Graph& graph,
                           std::span<const NodeId> mask) {
  BucketTable table;
  for (int b = 0; b < kBucketCount; ++b) table.rows[static_cast<std::size_t>(b)].bucket = b;
  const std::vector<ClassId> predicted = ArgmaxRows(beliefs);
  for (NodeId v : mask) {
    const bool correct = predicted[static_cast<std::size_t>(v)] == graph.label(v);
    const LocalHomophilyCounts c = LocalHomophilyArcs(graph, v);
    if (c.total == 0) {
      ++table.undefined_count;
      table.undefined_correct += correct;
      continue;
    }
    BucketRow& row = table.rows[static_cast<std::size_t>(HomophilyBucket(c))];
    ++row.count;
    row.correct += correct;
  }
  for (BucketRow& row : table.rows) {
    if (row.count > 0) {
      row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.count);
    }
  }
  return table;
}

std::string BucketTable::ToCsv() const {
  std::string out = "bucket,count,accuracy\n";
  auto acc = [](std::size_t correct, std::size_t count) {
    return count == 0 ? std::string("na")
                      : FormatDouble(static_cast<double>(correct) / static_cast<double>(count));
  };
  for (const BucketRow& row : rows) {
    out += FormatDouble(row.bucket / 10.0) + "," + std::to_string(row.count) + "," +
           acc(row.correct, row.count) + "\n";
  }
  out += "undefined," + std::to_string(undefined_count) + "," +
         acc(undefined_correct, undefined_count) + "\n";
  return out;
}

}  // namespace clp
