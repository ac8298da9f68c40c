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

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "clp/compatibility.hpp"
#include "clp/error.hpp"
#include "clp/propagation.hpp"
#include "doctest.h"
#include "test_util.hpp"

namespace clp {
namespace {

using testing::MakeGraph;

double DenseSpectralRadius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::EigenSolver<Matrix>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

// Three nodes, node 0 sending to 1 and 2.
struct SmallInstance {
  Graph graph = MakeGraph(3, {{0, 1}, {0, 2}}, {1, 1, 0}, /*directed=*/true, 2);
  Matrix b = (Matrix(3, 2) << 0.4, 0.6, 0.2, 0.8, 0.7, 0.3).finished();
  Matrix h = (Matrix(2, 2) << 0.2, 0.8, 0.8, 0.2).finished();
};

TEST_CASE("edge weights on the three-node instance") {
  const SmallInstance s;
  const EdgeWeightTensor w = EdgeWeights(s.graph, {s.b, BeliefKind::kPrior}, s.h);
  const auto f01 = w.Weight(0, 1);
  REQUIRE(f01.has_value());
  CHECK(std::abs((*f01)(0) - 0.112) < 1e-15);
  CHECK(std::abs((*f01)(1) - 0.352) < 1e-15);
  const auto f02 = w.Weight(0, 2);
  REQUIRE(f02.has_value());
  CHECK(std::abs((*f02)(0) - 0.392) < 1e-15);
  CHECK(std::abs((*f02)(1) - 0.132) < 1e-15);
  CHECK_FALSE(w.Weight(1, 0).has_value());
  CHECK(w.arc_count() == 2);
}

TEST_CASE("messages on the three-node instance") {
  const SmallInstance s;
  const EdgeWeightTensor w = EdgeWeights(s.graph, {s.b, BeliefKind::kPrior}, s.h);
  const ArcMessages raw = ComputeMessages(w, s.b, false);
  REQUIRE(raw.arcs.size() == 2);
  CHECK(raw.arcs[0] == Arc{0, 1});
  CHECK(raw.arcs[1] == Arc{0, 2});
  CHECK(std::abs(raw.values(0, 0) - 0.0448) < 1e-15);
  CHECK(std::abs(raw.values(0, 1) - 0.2112) < 1e-15);

  const ArcMessages norm = ComputeMessages(w, s.b, true);
  CHECK(std::abs(norm.values(0, 0) - 0.175) < 1e-12);
  CHECK(std::abs(norm.values(0, 1) - 0.825) < 1e-12);
  CHECK(std::abs(norm.values(1, 0) - 0.1568 / 0.236) < 1e-12);
  CHECK(std::abs(norm.values(1, 1) - 0.0792 / 0.236) < 1e-12);
}

TEST_CASE("sender-only aggregate on the three-node instance") {
  const SmallInstance s;
  const SparseMatrix op = PropagationOperator(s.graph, AdjacencyWeighting::kRaw);
  const Matrix m = AggregateClpStar(op, s.b, s.h);
  CHECK(m.row(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::abs(m(1, 0) - 0.56) < 1e-12);
  CHECK(std::abs(m(1, 1) - 0.44) < 1e-12);
  CHECK(m.row(2) == m.row(1));
}

TEST_CASE("identity compatibility with one-hot beliefs gives unit weights") {
  const Graph g = MakeGraph(3, {{0, 1}, {1, 2}}, {1, 1, 1}, false, 3);
  const Matrix b = OneHot(g.labels(), 3);
  const EdgeWeightTensor w = EdgeWeights(g, {b, BeliefKind::kPrior}, Matrix::Identity(3, 3));
  CHECK(*w.Weight(0, 1) == Eigen::Vector3d(0, 1, 0));
  CHECK(*w.Weight(2, 1) == Eigen::Vector3d(0, 1, 0));
}

TEST_CASE("an all-zero belief row sends zero messages") {
  const SmallInstance s;
  const EdgeWeightTensor w = EdgeWeights(s.graph, {s.b, BeliefKind::kPrior}, s.h);
  Matrix b = s.b;
  b.row(0).setZero();
  const ArcMessages m = ComputeMessages(w, b, true);
  CHECK(m.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.values.allFinite());
}

TEST_CASE("edge weights share the arc pattern and stay in [0, 1]") {
  Rng rng = MakeStream(2, 2);
  const Graph g = testing::RandomGraph(30, 4, 0.2, 3, true);
  const Matrix b = testing::RandomStochastic(30, 4, rng);
  const Matrix h = SinkhornKnopp(testing::RandomStochastic(4, 4, rng)).values;
  const EdgeWeightTensor w = EdgeWeights(g, {b, BeliefKind::kPrior}, h);
  for (int k = 0; k < 4; ++k) {
    const Matrix dense = w.Slice(k).ToDense();
    for (NodeId r = 0; r < 30; ++r) {
      for (NodeId s = 0; s < 30; ++s) {
        const auto nb = g.out_neighbors(s);
        const bool arc = std::find(nb.begin(), nb.end(), r) != nb.end();
        if (!arc) CHECK(dense(r, s) == 0.0);
        CHECK(dense(r, s) >= 0.0);
        CHECK(dense(r, s) <= 1.0);
        if (arc) CHECK(dense(r, s) == doctest::Approx((b.row(s) * h)(k) * b(r, k)));
      }
    }
  }
}

TEST_CASE("alpha zero returns the teleport exactly") {
  Rng rng = MakeStream(1, 1);
  const Graph g = testing::RandomGraph(15, 3, 0.3, 1);
  const Matrix b = testing::RandomStochastic(15, 3, rng);
  const EdgeWeightTensor w = EdgeWeights(g, {b, BeliefKind::kPrior}, Matrix::Identity(3, 3));
  PropagationConfig c;
  c.alpha = 0.0;
  const PropagationResult r = PropagateClp(w, {b, BeliefKind::kBasePrediction}, c);
  CHECK(r.beliefs.values == b);
  CHECK(r.iterations() == 1);
  CHECK(r.status == PropagationStatus::kConverged);
}

TEST_CASE("all-zero weights converge to the scaled teleport") {
  const Graph g = MakeGraph(4, {{0, 1}, {2, 3}}, {0, 1, 0, 1});
  std::vector<SparseMatrix> slices(2, PropagationOperator(g, AdjacencyWeighting::kRaw));
  for (auto& s : slices) std::fill(s.values.begin(), s.values.end(), 0.0);
  const EdgeWeightTensor w = EdgeWeightsFromSlices(slices);
  const Matrix t = Matrix::Constant(4, 2, 0.5);
  PropagationConfig c;
  c.alpha = 0.7;
  const PropagationResult r = PropagateClp(w, {t, BeliefKind::kBasePrediction}, c);
  CHECK(r.beliefs.values.isApprox(0.3 * t));
  CHECK(r.status == PropagationStatus::kConverged);
  CHECK(ClosedFormClp(slices[0], t.col(0), 0.7).isApprox(0.3 * t.col(0)));
  CHECK(ClosedFormClp(slices[0], t.col(0), 0.0) == t.col(0));
}

TEST_CASE("iteration limit matches the closed form on random instances") {
  Rng rng = MakeStream(7, 7);
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const NodeId n = 20;
    const int k = 2 + static_cast<int>(seed % 3);
    const Graph g = testing::RandomGraph(n, k, 0.25, 40 + seed, seed % 2 == 0);
    const Matrix b = testing::RandomStochastic(n, k, rng);
    const Matrix h = SinkhornKnopp(testing::RandomStochastic(k, k, rng)).values;
    const EdgeWeightTensor w = EdgeWeights(g, {b, BeliefKind::kPrior}, h);
    for (double alpha : {0.3, 0.6, 0.9}) {
      const auto checks = ConvergenceCheck(w, alpha);
      bool ok = true;
      for (const auto& c : checks) {
        const bool pass = c.verdict == ConvergenceVerdict::kCertified ||
                          c.verdict == ConvergenceVerdict::kConvergent;
        const double exact = DenseSpectralRadius(w.Slice(c.class_index).ToDense());
        if (pass) CHECK(exact < 1.0 / alpha);
        if (c.verdict == ConvergenceVerdict::kDivergent) CHECK(exact >= 1.0 / alpha);
        ok = ok && pass;
      }
      if (!ok) continue;
      PropagationConfig c;
      c.alpha = alpha;
      c.max_iters = 20000;
      c.tol = 1e-14;
      const PropagationResult r = PropagateClp(w, {b, BeliefKind::kBasePrediction}, c);
      const Matrix exact = ClosedFormClpAll(w, b, alpha);
      CHECK((r.beliefs.values - exact).cwiseAbs().maxCoeff() < 1e-8);
      ++compared;
    }
  }
  CHECK(compared >= 20);
}

TEST_CASE("one unnormalized step equals the per-class matrix product") {
  Rng rng = MakeStream(8, 8);
  const Graph g = testing::RandomGraph(12, 3, 0.3, 8, true);
  const Matrix b = testing::RandomStochastic(12, 3, rng);
  const Matrix h = SinkhornKnopp(testing::RandomStochastic(3, 3, rng)).values;
  const EdgeWeightTensor w = EdgeWeights(g, {b, BeliefKind::kPrior}, h);
  PropagationConfig c;
  c.alpha = 0.4;
  c.max_iters = 1;
  const PropagationResult r = PropagateClp(w, {b, BeliefKind::kBasePrediction}, c);
  for (int k = 0; k < 3; ++k) {
    const Vector expected = 0.6 * b.col(k) + 0.4 * w.Slice(k).ToDense() * b.col(k);
    CHECK((r.beliefs.values.col(k) - expected).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK(r.status == PropagationStatus::kMaxIterations);
}

TEST_CASE("one normalized step sums normalized messages per receiver") {
  Rng rng = MakeStream(9, 9);
  const Graph g = testing::RandomGraph(12, 3, 0.3, 9, false);
  const Matrix b = testing::RandomStochastic(12, 3, rng);
  const Matrix h = SinkhornKnopp(testing::RandomStochastic(3, 3, rng)).values;
  const EdgeWeightTensor w = EdgeWeights(g, {b, BeliefKind::kPrior}, h);
  PropagationConfig c;
  c.alpha = 0.5;
  c.max_iters = 1;
  c.message_normalization = true;
  const PropagationResult r = PropagateClp(w, {b, BeliefKind::kBasePrediction}, c);
  Matrix expected = 0.5 * b;
  const ArcMessages m = ComputeMessages(w, b, true);
  for (std::size_t i = 0; i < m.arcs.size(); ++i) {
    expected.row(m.arcs[i].target) += 0.5 * m.values.row(static_cast<Eigen::Index>(i));
  }
  CHECK((r.beliefs.values - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("sender-only propagation matches the Kronecker system") {
  Rng rng = MakeStream(10, 10);
  const int k = 3;
  const NodeId n = 10;
  const Graph g = testing::RandomGraph(n, k, 0.35, 10);
  const Matrix t = testing::RandomStochastic(n, k, rng);
  const Matrix h = SinkhornKnopp(testing::RandomStochastic(k, k, rng)).values;
  PropagationConfig c;
  c.alpha = 0.8;
  c.adjacency = AdjacencyWeighting::kSymmetric;
  c.max_iters = 5000;
  c.tol = 1e-15;
  const PropagationResult r = PropagateClpStar(g, {t, BeliefKind::kBasePrediction}, h, c);

  // vec(B) = (1 - a) vec(T) + a (H^T kron A) vec(B), column-major vec.
  const Matrix a = PropagationOperator(g, AdjacencyWeighting::kSymmetric).ToDense();
  Matrix kron(n * k, n * k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) kron.block(i * n, j * n, n, n) = h(j, i) * a;
  }
  const Matrix system = Matrix::Identity(n * k, n * k) - c.alpha * kron;
  const Vector rhs = (1.0 - c.alpha) * Eigen::Map<const Vector>(t.data(), n * k);
  const Vector x = system.partialPivLu().solve(rhs);
  const Eigen::Map<const Matrix> exact(x.data(), n, k);
  CHECK((r.beliefs.values - exact).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("label propagation") {
  SUBCASE("two cliques") {
    const Graph g = MakeGraph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}},
                              {0, 0, 0, 1, 1, 1});
    const std::vector<NodeId> train = {0, 5};
    PropagationConfig c;
    const PropagationResult r = PropagateLp(g, OneHot(g.labels(), 2), train, c);
    const std::vector<ClassId> expected = {0, 0, 0, 1, 1, 1};
    CHECK(r.predicted == expected);
  }
  SUBCASE("alpha zero keeps only train rows") {
    const Graph g = testing::Path4();
    const std::vector<NodeId> train = {0, 3};
    PropagationConfig c;
    c.alpha = 0.0;
    const PropagationResult r = PropagateLp(g, OneHot(g.labels(), 2), train, c);
    CHECK(r.beliefs.values.row(0) == Eigen::RowVector2d(1, 0));
    CHECK(r.beliefs.values.row(1) == Eigen::RowVector2d(0.5, 0.5));
    CHECK(r.beliefs.values.row(3) == Eigen::RowVector2d(0, 1));
    CHECK(r.warnings.size() == 1);
  }
  SUBCASE("barbell fixed point") {
    const Graph g = MakeGraph(6, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {4, 5}, {3, 5}},
                              {0, 0, 0, 1, 1, 1});
    const std::vector<NodeId> train = {0, 5};
    const Matrix y = OneHot(g.labels(), 2);
    PropagationConfig c;
    c.alpha = 0.9;
    c.max_iters = 10000;
    c.tol = 1e-14;
    const PropagationResult r = PropagateLp(g, y, train, c);
    Matrix a = Matrix::Zero(6, 6);
    for (const Arc& arc : g.arcs()) a(arc.target, arc.source) = 1.0;
    const Vector d = a.rowwise().sum();
    const Matrix s = d.cwiseSqrt().cwiseInverse().asDiagonal() * a *
                     d.cwiseSqrt().cwiseInverse().asDiagonal();
    Matrix t = Matrix::Zero(6, 2);
    for (NodeId v : train) t.row(v) = y.row(v);
    const Matrix exact = (Matrix::Identity(6, 6) - 0.9 * s).partialPivLu().solve(0.1 * t);
    CHECK((r.beliefs.values - exact).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("closed form errors") {
  // rho = 2, so I - 0.5 A is singular.
  const SparseMatrix m = SparseMatrix::FromDense((Matrix(2, 2) << 0, 2, 2, 0).finished());
  try {
    ClosedFormClp(m, Vector::Ones(2), 0.5, 4);
    FAIL("expected a numerical error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNumerical);
    CHECK(std::string(e.what()).find("class 4") != std::string::npos);
  }
  SparseMatrix big;
  big.rows = big.cols = kClosedFormMaxNodes + 1;
  big.row_ptr.assign(static_cast<std::size_t>(big.rows) + 1, 0);
  CHECK_THROWS_AS(ClosedFormClp(big, Vector::Zero(big.rows), 0.5), Error);
}

TEST_CASE("spectral radius") {
  CHECK(SpectralRadius(SparseMatrix::FromDense(Matrix::Zero(3, 3))).rho == 0.0);
  const SpectralEstimate d = SpectralRadius(SparseMatrix::FromDense(Eigen::Vector2d(2, 1).asDiagonal()));
  CHECK(d.rho == doctest::Approx(2.0).epsilon(1e-8));
  const SpectralEstimate swap =
      SpectralRadius(SparseMatrix::FromDense((Matrix(2, 2) << 0, 1, 1, 0).finished()));
  CHECK(swap.rho == doctest::Approx(1.0).epsilon(1e-8));

  Rng rng = MakeStream(12, 0);
  for (int t = 0; t < 20; ++t) {
    const Graph g = testing::RandomGraph(25, 2, 0.2, 200 + t, t % 2 == 0);
    SparseMatrix op = PropagationOperator(g, AdjacencyWeighting::kRaw);
    for (double& v : op.values) v = Uniform01(rng);
    const double exact = DenseSpectralRadius(op.ToDense());
    const SpectralEstimate e = SpectralRadius(op);
    if (e.converged) CHECK(std::abs(e.rho - exact) <= 1e-6 * std::max(1.0, exact));
    if (e.lower_bound) CHECK(*e.lower_bound <= exact + 1e-9);
    if (e.upper_bound) CHECK(*e.upper_bound >= exact - 1e-9);
    CHECK(exact <= op.FrobeniusNorm() + 1e-12);
    CHECK(op.FrobeniusNorm() <= op.EntrywiseOneNorm() + 1e-12);
    CHECK(exact <= op.InducedOneNorm() + 1e-12);
    CHECK(exact <= op.InducedInfNorm() + 1e-12);
  }
}

// Directed cycle with every weight equal to `w`: spectral radius w.
SparseMatrix WeightedCycle(int n, double w) {
  Matrix m = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) m((i + 1) % n, i) = w;
  return SparseMatrix::FromDense(m);
}

TEST_CASE("convergence verdicts") {
  SparseMatrix zero = WeightedCycle(4, 1.0);
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  CHECK(CheckOperator(zero, 0.99).verdict == ConvergenceVerdict::kCertified);

  // Entrywise 1-norm 0.9 < 1 / 0.5.
  const SparseMatrix small = SparseMatrix::FromDense((Matrix(2, 2) << 0.3, 0.2, 0.1, 0.3).finished());
  CHECK(CheckOperator(small, 0.5).verdict == ConvergenceVerdict::kCertified);

  const SparseMatrix cycle = WeightedCycle(5, 1.5);
  const ClassConvergence over = CheckOperator(cycle, 0.8);
  CHECK(over.verdict == ConvergenceVerdict::kDivergent);
  REQUIRE(over.spectral.has_value());
  CHECK(over.spectral->rho == doctest::Approx(1.5));

  CHECK(CheckOperator(cycle, 0.6).verdict == ConvergenceVerdict::kCertified);

  // Every norm is near 10 but rho = 0.1 + sqrt(0.1).
  const SparseMatrix skew = SparseMatrix::FromDense((Matrix(2, 2) << 0.1, 10, 0.01, 0.1).finished());
  const ClassConvergence under = CheckOperator(skew, 0.5);
  CHECK(under.verdict == ConvergenceVerdict::kConvergent);
  REQUIRE(under.spectral.has_value());
  CHECK(under.spectral->rho == doctest::Approx(0.1 + std::sqrt(0.1)));

  const EdgeWeightTensor w = EdgeWeightsFromSlices({cycle});
  PropagationConfig c;
  c.alpha = 0.8;
  c.max_iters = 500;
  const PropagationResult r = PropagateClp(w, {Matrix::Ones(5, 1), BeliefKind::kBasePrediction}, c);
  CHECK(r.status == PropagationStatus::kDiverged);
  CHECK_FALSE(r.diagnostic.empty());

  const auto grid = ConvergenceCheckGrid(w, std::vector<double>{0.6, 0.8});
  REQUIRE(grid.size() == 2);
  CHECK(grid[0][0].verdict == ConvergenceVerdict::kCertified);
  CHECK(grid[1][0].verdict == ConvergenceVerdict::kDivergent);
}

TEST_CASE("propagation log csv") {
  const SmallInstance s;
  const EdgeWeightTensor w = EdgeWeights(s.graph, {s.b, BeliefKind::kPrior}, s.h);
  PropagationConfig c;
  const PropagationResult r = PropagateClp(w, {s.b, BeliefKind::kBasePrediction}, c);
  const std::string csv = r.LogCsv();
  CHECK(csv.rfind("iter,residual,residual_class_0,residual_class_1\n", 0) == 0);
  CHECK(static_cast<int>(std::count(csv.begin(), csv.end(), '\n')) == r.iterations() + 1);
}

TEST_CASE("propagation config validation") {
  PropagationConfig c;
  c.alpha = 1.0;
  CHECK_THROWS_AS(c.Validate(), Error);
  c.alpha = 0.5;
  c.max_iters = 0;
  CHECK_THROWS_AS(c.Validate(), Error);
}

}  // namespace
}  // namespace clp
