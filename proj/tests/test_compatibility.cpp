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

#include <cmath>

#include "clp/compatibility.hpp"
#include "clp/error.hpp"
#include "clp/metrics.hpp"
#include "doctest.h"
#include "test_util.hpp"

namespace clp {
namespace {

using testing::MakeGraph;

// Independent scores: (M o Y)^T A B0 with dense matrices.
Matrix DenseScores(const Graph& g, const Matrix& prior, const std::vector<NodeId>& train) {
  const Eigen::Index n = g.node_count();
  Matrix a = Matrix::Zero(n, n);
  for (const Arc& arc : g.arcs()) a(arc.source, arc.target) = 1.0;
  Matrix my = Matrix::Zero(n, g.num_classes());
  for (NodeId v : train) my(v, g.label(v)) = 1.0;
  return my.transpose() * a * prior;
}

TEST_CASE("prior beliefs clamp train rows only") {
  const std::vector<ClassId> labels = {2, 0, 1};
  Matrix base(3, 3);
  base << 0.2, 0.3, 0.5, 0.4, 0.4, 0.2, 0.1, 0.1, 0.8;
  const std::vector<NodeId> train = {0};
  const Beliefs b = PriorBeliefs({base, BeliefKind::kBasePrediction}, OneHot(labels, 3), train);
  CHECK(b.values.row(0) == Eigen::RowVector3d(0, 0, 1));
  CHECK(b.values.row(1) == base.row(1));
  CHECK(b.kind == BeliefKind::kPrior);

  const std::vector<ClassId> two = {0, 1, 1};
  const Beliefs u = PriorBeliefs({Matrix::Constant(3, 2, 0.5), BeliefKind::kBasePrediction},
                                 OneHot(two, 2), train);
  CHECK(u.values == (Matrix(3, 2) << 1, 0, 0.5, 0.5, 0.5, 0.5).finished());
}

TEST_CASE("sinkhorn fixed points") {
  const SinkhornResult id = SinkhornKnopp(Matrix::Identity(3, 3));
  CHECK(id.values == Matrix::Identity(3, 3));
  CHECK(id.iterations == 0);
  const Matrix half = Matrix::Constant(2, 2, 0.5);
  CHECK(SinkhornKnopp(half).values == half);
}

TEST_CASE("sinkhorn 2x2 limit keeps the cross ratio") {
  // Diagonal scaling preserves m00 m11 / (m01 m10); the doubly stochastic
  // 2x2 matrix [[a, 1-a], [1-a, a]] with that ratio has a closed form.
  const Matrix m = (Matrix(2, 2) << 1, 2, 3, 4).finished();
  const SinkhornResult r = SinkhornKnopp(m);
  CHECK(r.converged);
  const double root = std::sqrt(4.0 / 6.0);
  const double a = root / (1.0 + root);
  CHECK(std::abs(r.values(0, 0) - a) < 1e-9);
  CHECK(std::abs(r.values(1, 1) - a) < 1e-9);
  CHECK(std::abs(r.values(0, 1) - r.values(1, 0)) < 1e-9);
  CHECK(std::abs(r.values.row(0).sum() - 1.0) < 1e-9);
  CHECK(std::abs(r.values.col(1).sum() - 1.0) < 1e-9);
}

TEST_CASE("sinkhorn rejects bad input") {
  CHECK_THROWS_AS(SinkhornKnopp(Matrix::Ones(2, 3)), Error);
  CHECK_THROWS_AS(SinkhornKnopp((Matrix(2, 2) << 1, -1, 1, 1).finished()), Error);
  CHECK_THROWS_AS(SinkhornKnopp((Matrix(2, 2) << 1, 0, 0, 0).finished()), Error);
}

TEST_CASE("sinkhorn property: sums, scale invariance, positivity") {
  Rng rng = MakeStream(21, 0);
  for (int t = 0; t < 40; ++t) {
    const auto k = static_cast<Eigen::Index>(1 + rng() % 12);
    Matrix m(k, k);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 0.01 + Uniform01(rng);
    const SinkhornResult r = SinkhornKnopp(m);
    CHECK(r.converged);
    CHECK(((r.values.rowwise().sum().array() - 1.0).abs() < 1e-9).all());
    CHECK(((r.values.colwise().sum().array() - 1.0).abs() < 1e-9).all());
    CHECK((r.values.array() > 0.0).all());
    CHECK((SinkhornKnopp(5.0 * m).values - r.values).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("estimated compatibility on pure structures") {
  SUBCASE("homophilous") {
    const Graph g = MakeGraph(6, {{0, 1}, {1, 2}, {3, 4}, {4, 5}}, {0, 0, 0, 1, 1, 1});
    const std::vector<NodeId> train = {0, 1, 2, 3, 4, 5};
    const Beliefs b{OneHot(g.labels(), 2), BeliefKind::kPrior};
    const CompatibilityMatrix h = EstimateCompatibility(g, b, train);
    CHECK(h.normalization == Normalization::kDoublyStochastic);
    CHECK(h.values(0, 1) < 1e-6);
    CHECK(h.values(1, 0) < 1e-6);
  }
  SUBCASE("K22") {
    const Graph g = testing::K22();
    const std::vector<NodeId> train = {0, 2};
    const Beliefs b{OneHot(g.labels(), 2), BeliefKind::kPrior};
    const Matrix h = EstimateCompatibility(g, b, train).values;
    CHECK((h - (Matrix(2, 2) << 0, 1, 1, 0).finished()).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("path with uniform base predictions") {
    const Graph g = testing::Path4();
    const std::vector<NodeId> train = {0, 3};
    const Beliefs prior = PriorBeliefs({Matrix::Constant(4, 2, 0.5), BeliefKind::kBasePrediction},
                                       OneHot(g.labels(), 2), train);
    const Matrix scores = CompatibilityScores(g, prior, train);
    // Node 0 only sees node 1, node 3 only node 2; both neighbors are uniform.
    CHECK(scores == Matrix::Constant(2, 2, 0.5));
    CHECK(EstimateCompatibility(g, prior, train).values.isApprox(Matrix::Constant(2, 2, 0.5)));
  }
}

TEST_CASE("compatibility scores match the dense product") {
  Rng rng = MakeStream(5, 5);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph g = testing::RandomGraph(25, 4, 0.15, seed, seed % 2 == 0);
    const Matrix prior = testing::RandomStochastic(25, 4, rng);
    std::vector<NodeId> train;
    for (NodeId v = 0; v < 25; v += 3) train.push_back(v);
    const Matrix got = CompatibilityScores(g, {prior, BeliefKind::kPrior}, train);
    CHECK((got - DenseScores(g, prior, train)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("missing classes in the train set warn") {
  const Graph g = testing::Path4();
  const std::vector<NodeId> train = {0};
  const Beliefs b{Matrix::Constant(4, 2, 0.5), BeliefKind::kPrior};
  CHECK(EstimateCompatibility(g, b, train).warnings.size() == 1);
  CHECK_THROWS_AS(EstimateCompatibility(g, b, std::vector<NodeId>{}), Error);
}

}  // namespace
}  // namespace clp
