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

#include "clp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "clp/error.hpp"
#include "clp/util.hpp"

namespace clp {

std::vector<ClassId> ArgmaxRows(const Matrix& m) {
  std::vector<ClassId> out(static_cast<std::size_t>(m.rows()), 0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < m.cols(); ++j) {
      if (m(i, j) > m(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = static_cast<ClassId>(best);
  }
  return out;
}

Matrix RowNormalized(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double sum = out.row(i).sum();
    if (sum != 0.0) out.row(i) /= sum;
  }
  return out;
}

const char* ToString(BeliefKind kind) {
  switch (kind) {
    case BeliefKind::kBasePrediction: return "base_prediction";
    case BeliefKind::kPrior: return "prior";
    case BeliefKind::kPropagated: return "propagated";
  }
  return "unknown";
}

const char* ToString(Normalization normalization) {
  switch (normalization) {
    case Normalization::kRowStochastic: return "row_stochastic";
    case Normalization::kDoublyStochastic: return "doubly_stochastic";
  }
  return "unknown";
}

namespace {

void BuildCsr(NodeId n, const std::vector<Arc>& sorted_arcs, bool by_source,
              std::vector<std::int64_t>& offsets, std::vector<NodeId>& columns) {
  offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const Arc& a : sorted_arcs) {
    ++offsets[static_cast<std::size_t>(by_source ? a.source : a.target) + 1];
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  columns.resize(sorted_arcs.size());
  std::vector<std::int64_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const Arc& a : sorted_arcs) {
    const NodeId row = by_source ? a.source : a.target;
    const NodeId col = by_source ? a.target : a.source;
    columns[static_cast<std::size_t>(cursor[static_cast<std::size_t>(row)]++)] = col;
  }
}

}  // namespace

Graph Graph::Build(std::int64_t node_count, std::vector<Arc> arcs, Matrix features,
                   std::optional<std::vector<ClassId>> labels, int num_classes,
                   bool directed) {
  if (node_count < 0 || node_count > std::numeric_limits<NodeId>::max()) {
    Fail(ErrorCode::kData, "node count out of range: " + std::to_string(node_count));
  }
  const auto n = static_cast<NodeId>(node_count);
  if (features.size() == 0 && features.rows() != n) features.resize(n, 0);
  if (features.rows() != n) {
    Fail(ErrorCode::kData, "feature rows (" + std::to_string(features.rows()) +
                               ") do not match node count (" + std::to_string(n) + ")");
  }

  std::vector<Arc> clean;
  clean.reserve(directed ? arcs.size() : 2 * arcs.size());
  for (const Arc& a : arcs) {
    if (a.source < 0 || a.source >= n || a.target < 0 || a.target >= n) {
      Fail(ErrorCode::kData, "arc (" + std::to_string(a.source) + ", " +
                                 std::to_string(a.target) + ") references a node outside [0, " +
                                 std::to_string(n) + ")");
    }
    if (a.source == a.target) continue;
    clean.push_back(a);
    if (!directed) clean.push_back({a.target, a.source});
  }
  std::sort(clean.begin(), clean.end());
  clean.erase(std::unique(clean.begin(), clean.end()), clean.end());

  Graph g;
  g.node_count_ = n;
  g.directed_ = directed;
  g.features_ = std::move(features);

  if (labels) {
    if (labels->size() != static_cast<std::size_t>(n)) {
      Fail(ErrorCode::kData, "label vector length does not match node count");
    }
    ClassId max_label = kUnknownLabel;
    for (ClassId y : *labels) {
      if (y < kUnknownLabel) Fail(ErrorCode::kData, "negative class id " + std::to_string(y));
      max_label = std::max(max_label, y);
    }
    if (num_classes <= 0) num_classes = max_label + 1;
    if (max_label >= num_classes) {
      Fail(ErrorCode::kData, "class id " + std::to_string(max_label) + " outside [0, " +
                                 std::to_string(num_classes) + ")");
    }
    g.labels_ = std::move(*labels);
  }
  g.num_classes_ = std::max(num_classes, 0);

  BuildCsr(n, clean, /*by_source=*/true, g.out_offsets_, g.out_targets_);
  // Re-sort by (target, source) so in-neighbor lists are ascending too.
  std::sort(clean.begin(), clean.end(), [](const Arc& a, const Arc& b) {
    return a.target != b.target ? a.target < b.target : a.source < b.source;
  });
  BuildCsr(n, clean, /*by_source=*/false, g.in_offsets_, g.in_sources_);
  return g;
}

bool Graph::fully_labeled() const {
  return has_labels() &&
         std::none_of(labels_.begin(), labels_.end(),
                      [](ClassId y) { return y == kUnknownLabel; });
}

std::span<const NodeId> Graph::out_neighbors(NodeId v) const {
  const auto i = static_cast<std::size_t>(v);
  return std::span<const NodeId>(out_targets_)
      .subspan(static_cast<std::size_t>(out_offsets_[i]),
               static_cast<std::size_t>(out_offsets_[i + 1] - out_offsets_[i]));
}

std::span<const NodeId> Graph::in_neighbors(NodeId v) const {
  const auto i = static_cast<std::size_t>(v);
  return std::span<const NodeId>(in_sources_)
      .subspan(static_cast<std::size_t>(in_offsets_[i]),
               static_cast<std::size_t>(in_offsets_[i + 1] - in_offsets_[i]));
}

std::vector<Arc> Graph::arcs() const {
  std::vector<Arc> out;
  out.reserve(arc_count());
  for (NodeId u = 0; u < node_count_; ++u) {
    for (NodeId v : out_neighbors(u)) out.push_back({u, v});
  }
  return out;
}

Graph Graph::WithFeatures(Matrix features) const {
  if (features.rows() != node_count_) {
    Fail(ErrorCode::kData, "feature rows do not match node count");
  }
  Graph g = *this;
  g.features_ = std::move(features);
  return g;
}

Matrix OneHot(std::span<const ClassId> labels, int num_classes) {
  Require(num_classes >= 1, "one_hot: num_classes must be >= 1");
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), num_classes);
  for (std::size_t v = 0; v < labels.size(); ++v) {
    if (labels[v] == kUnknownLabel) continue;
    if (labels[v] < 0 || labels[v] >= num_classes) {
      Fail(ErrorCode::kData, "label " + std::to_string(labels[v]) + " of node " +
                                 std::to_string(v) + " outside [0, " +
                                 std::to_string(num_classes) + ")");
    }
    y(static_cast<Eigen::Index>(v), labels[v]) = 1.0;
  }
  return y;
}

Matrix StandardizeColumns(const Matrix& x) {
  Matrix out = x;
  if (x.rows() == 0) return out;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    out.col(j).array() -= mean;
    const double var = out.col(j).squaredNorm() / static_cast<double>(x.rows());
    if (var > 0.0) out.col(j) /= std::sqrt(var);
  }
  return out;
}

SplitScheme SplitScheme::Parse(const std::string& name) {
  if (name == "sparse") return Sparse();
  if (name == "medium") return Medium();
  if (name == "dense") return Dense();
  Fail(ErrorCode::kInvalidArgument, "unknown split scheme '" + name + "'");
}

std::string SplitScheme::name() const {
  switch (kind) {
    case Kind::kSparse: return "sparse";
    case Kind::kMedium: return "medium";
    case Kind::kDense: return "dense";
    case Kind::kCustom: return "custom";
  }
  return "custom";
}

double SplitScheme::train_fraction() const {
  switch (kind) {
    case Kind::kSparse: return 0.05;
    case Kind::kMedium: return 0.10;
    case Kind::kDense: return 0.48;
    case Kind::kCustom: return train_ratio;
  }
  return train_ratio;
}

double SplitScheme::validation_fraction() const {
  switch (kind) {
    case Kind::kSparse: return 0.05;
    case Kind::kMedium: return 0.10;
    case Kind::kDense: return 0.32;
    case Kind::kCustom: return validation_ratio;
  }
  return validation_ratio;
}

namespace {

// floor(fraction * n). Named schemes use exact integer percentages so that
// e.g. 48% of 1000 is 480 and not 479.
std::int64_t PartitionSize(const SplitScheme& scheme, bool train, std::int64_t n) {
  int percent = -1;
  switch (scheme.kind) {
    case SplitScheme::Kind::kSparse: percent = 5; break;
    case SplitScheme::Kind::kMedium: percent = 10; break;
    case SplitScheme::Kind::kDense: percent = train ? 48 : 32; break;
    case SplitScheme::Kind::kCustom: break;
  }
  if (percent >= 0) return n * percent / 100;
  const double ratio = train ? scheme.train_ratio : scheme.validation_ratio;
  return static_cast<std::int64_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
}

}  // namespace

std::vector<SplitMask> MakeSplits(const Graph& graph, const SplitScheme& scheme,
                                  std::uint64_t seed, std::uint32_t instances) {
  Require(instances >= 1, "make_splits: instances must be >= 1");
  if (scheme.kind == SplitScheme::Kind::kCustom) {
    Require(scheme.train_ratio > 0.0 && scheme.validation_ratio >= 0.0 &&
                scheme.train_ratio + scheme.validation_ratio < 1.0,
            "make_splits: custom ratios must satisfy train > 0, val >= 0, train + val < 1");
  }
  if (!graph.fully_labeled()) {
    Fail(ErrorCode::kData, "make_splits: every node needs a label");
  }
  const std::int64_t n = graph.node_count();
  const std::int64_t n_train = PartitionSize(scheme, true, n);
  const std::int64_t n_val = PartitionSize(scheme, false, n);
  const std::int64_t n_test = n - n_train - n_val;
  const bool val_required = scheme.kind != SplitScheme::Kind::kCustom ||
                            scheme.validation_ratio > 0.0;
  if (n_train < 1 || (val_required && n_val < 1) || n_test < 1) {
    Fail(ErrorCode::kData, "make_splits: " + std::to_string(n) +
                               " nodes are too few for a " + scheme.name() + " split");
  }

  std::vector<SplitMask> masks;
  masks.reserve(instances);
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  for (std::uint32_t i = 0; i < instances; ++i) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng = MakeStream(seed, i);
    std::shuffle(order.begin(), order.end(), rng);
    SplitMask mask;
    mask.seed = seed;
    mask.instance = i;
    mask.scheme = scheme;
    const auto t = static_cast<std::ptrdiff_t>(n_train);
    const auto tv = static_cast<std::ptrdiff_t>(n_train + n_val);
    mask.train.assign(order.begin(), order.begin() + t);
    mask.validation.assign(order.begin() + t, order.begin() + tv);
    mask.test.assign(order.begin() + tv, order.end());
    std::sort(mask.train.begin(), mask.train.end());
    std::sort(mask.validation.begin(), mask.validation.end());
    std::sort(mask.test.begin(), mask.test.end());
    masks.push_back(std::move(mask));
  }
  return masks;
}

std::vector<std::uint8_t> MaskVector(std::span<const NodeId> nodes, NodeId node_count) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(node_count), 0);
  for (NodeId v : nodes) {
    Require(v >= 0 && v < node_count, "mask node id out of range");
    mask[static_cast<std::size_t>(v)] = 1;
  }
  return mask;
}

}  // namespace clp
