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

#include "clp/compatibility.hpp"

#include <algorithm>
#include <cmath>

#include "clp/error.hpp"
#include "clp/util.hpp"
#include "json.hpp"

namespace clp {

Beliefs PriorBeliefs(const Beliefs& base, const Matrix& y_onehot,
                     std::span<const NodeId> train) {
  if (base.values.rows() != y_onehot.rows() || base.values.cols() != y_onehot.cols()) {
    Fail(ErrorCode::kInvalidArgument, "prior_beliefs: base predictions and one-hot labels differ in shape");
  }
  Beliefs prior{base.values, BeliefKind::kPrior};
  for (NodeId v : train) {
    Require(v >= 0 && v < prior.values.rows(), "prior_beliefs: train node out of range");
    prior.values.row(v) = y_onehot.row(v);
  }
  return prior;
}

namespace {

double MaxSumDeviation(const Matrix& m) {
  const double rows = (m.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double cols = (m.colwise().sum().array() - 1.0).abs().maxCoeff();
  return std::max(rows, cols);
}

}  // namespace

SinkhornResult SinkhornKnopp(const Matrix& m, const SinkhornOptions& options) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    Fail(ErrorCode::kInvalidArgument, "sinkhorn_knopp: input must be a non-empty square matrix");
  }
  if (!m.allFinite() || (m.array() < 0.0).any()) {
    Fail(ErrorCode::kInvalidArgument, "sinkhorn_knopp: entries must be finite and nonnegative");
  }
  if ((m.rowwise().sum().array() <= 0.0).any() || (m.colwise().sum().array() <= 0.0).any()) {
    Fail(ErrorCode::kInvalidArgument, "sinkhorn_knopp: every row and column needs a positive entry");
  }
  SinkhornResult result;
  result.values = m;
  result.deviation = MaxSumDeviation(result.values);
  while (result.deviation >= options.tol && result.iterations < options.max_iters) {
    result.values.array().colwise() /= result.values.rowwise().sum().array();
    result.values.array().rowwise() /= result.values.colwise().sum().array();
    ++result.iterations;
    result.deviation = MaxSumDeviation(result.values);
  }
  result.converged = result.deviation < options.tol;
  return result;
}

Matrix CompatibilityScores(const Graph& graph, const Beliefs& prior,
                           std::span<const NodeId> train) {
  const int k = graph.num_classes();
  if (prior.values.rows() != graph.node_count() || prior.values.cols() != k) {
    Fail(ErrorCode::kInvalidArgument, "estimate_compatibility: prior beliefs shape mismatch");
  }
  Matrix scores = Matrix::Zero(k, k);
  for (NodeId u : train) {
    const ClassId y = graph.label(u);
    if (y == kUnknownLabel) Fail(ErrorCode::kData, "estimate_compatibility: unlabeled train node");
    for (NodeId v : graph.out_neighbors(u)) scores.row(y) += prior.values.row(v);
  }
  return scores;
}

CompatibilityMatrix EstimateCompatibility(const Graph& graph, const Beliefs& prior,
                                          std::span<const NodeId> train,
                                          const SinkhornOptions& options) {
  if (train.empty()) Fail(ErrorCode::kData, "estimate_compatibility: empty train set");
  Matrix scores = CompatibilityScores(graph, prior, train);

  CompatibilityMatrix h;
  std::vector<bool> present(static_cast<std::size_t>(graph.num_classes()), false);
  for (NodeId u : train) present[static_cast<std::size_t>(graph.label(u))] = true;
  for (int c = 0; c < graph.num_classes(); ++c) {
    if (!present[static_cast<std::size_t>(c)]) {
      h.warnings.push_back("class " + std::to_string(c) +
                           " has no train node; its estimated row is near-uniform");
    }
  }

  const double top = scores.maxCoeff();
  scores.array() += kCompatibilityFloor * (top > 0.0 ? top : 1.0);
  SinkhornResult balanced = SinkhornKnopp(scores, options);
  if (!balanced.converged) {
    h.warnings.push_back("sinkhorn stopped at deviation " + FormatDouble(balanced.deviation) +
                         " after " + std::to_string(balanced.iterations) + " iterations");
  }
  h.values = std::move(balanced.values);
  h.normalization = Normalization::kDoublyStochastic;
  h.deviation = balanced.deviation;
  return h;
}

std::string CompatibilityCsv(const Matrix& h) {
  std::string out;
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      if (j > 0) out += ',';
      out += FormatDouble(h(i, j));
    }
    out += '\n';
  }
  return out;
}

void SaveCompatibility(const CompatibilityMatrix& h, const std::filesystem::path& stem) {
  std::filesystem::path csv = stem;
  csv += ".csv";
  std::filesystem::path sidecar = stem;
  sidecar += ".json";
  WriteFileAtomic(csv, CompatibilityCsv(h.values));
  const nlohmann::json meta = {
      {"normalization", ToString(h.normalization)},
      {"sinkhorn_deviation", h.deviation},
      {"num_classes", h.values.rows()},
      {"warnings", h.warnings},
  };
  WriteFileAtomic(sidecar, meta.dump(2) + "\n");
}

}  // namespace clp
