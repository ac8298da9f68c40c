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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. An optional argument names the work
// directory (default: <tmp>/clp_acceptance).
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "clp/compatibility.hpp"
#include "clp/experiment.hpp"
#include "clp/graph_io.hpp"
#include "clp/metrics.hpp"
#include "clp/mlp.hpp"
#include "clp/propagation.hpp"
#include "clp/synth.hpp"
#include "test_util.hpp"

namespace clp {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Appends a formatted note and folds `ok` into the verdict.
void Note(Outcome& o, bool ok, const std::string& text) {
  o.pass = o.pass && ok;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += text;
  if (!ok) o.detail += " [violated]";
}

std::string Fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Slices collected by criterion 2 and reused by criterion 4.
std::vector<SparseMatrix> g_slices;

Outcome ThreeNodeOracle() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const Graph g = testing::MakeGraph(3, {{0, 1}, {0, 2}}, {1, 1, 0}, true, 2);
  const Matrix b = (Matrix(3, 2) << 0.4, 0.6, 0.2, 0.8, 0.7, 0.3).finished();
  const Matrix h = (Matrix(2, 2) << 0.2, 0.8, 0.8, 0.2).finished();
  const EdgeWeightTensor w = EdgeWeights(g, {b, BeliefKind::kPrior}, h);
  const Vector f01 = *w.Weight(0, 1);
  Note(o, std::abs(f01(0) - 0.112) < 1e-15 && std::abs(f01(1) - 0.352) < 1e-15,
       Fmt("F01=[%.15g, %.15g]", f01(0), f01(1)));

  const ArcMessages m = ComputeMessages(w, b, true);
  const Eigen::RowVector2d m01 = m.values.row(0);
  const Eigen::RowVector2d m02 = m.values.row(1);
  Note(o, std::abs(m01(0) - 0.175) < 1e-12 && std::abs(m01(1) - 0.825) < 1e-12,
       Fmt("m01=[%.6f, %.6f]", m01(0), m01(1)));
  Note(o, (m01 - Eigen::RowVector2d(0.18, 0.83)).cwiseAbs().maxCoeff() <= 0.01 &&
              (m02 - Eigen::RowVector2d(0.66, 0.34)).cwiseAbs().maxCoeff() <= 0.01,
       Fmt("m02=[%.6f, %.6f]", m02(0), m02(1)));

  const Matrix agg = AggregateClpStar(PropagationOperator(g, AdjacencyWeighting::kRaw), b, h);
  const double dev = std::max((agg.row(1) - Eigen::RowVector2d(0.56, 0.44)).cwiseAbs().maxCoeff(),
                              (agg.row(2) - Eigen::RowVector2d(0.56, 0.44)).cwiseAbs().maxCoeff());
  Note(o, dev < 1e-12, Fmt("sender-only aggregate deviation %.2e", dev));
  const double t = Seconds(start);
  Note(o, t < 1.0, Fmt("%.3f s", t));
  return o;
}

Outcome ClosedFormEquivalence() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  Rng rng = MakeStream(2024, 2);
  double worst = 0.0;
  int compared = 0;
  int rejected = 0;
  for (int gi = 0; gi < 50; ++gi) {
    const NodeId n = 10 + static_cast<NodeId>(rng() % 41);
    const int k = 2 + static_cast<int>(rng() % 4);
    const double p = 0.05 + 0.25 * Uniform01(rng);
    const Graph g = testing::RandomGraph(n, k, p, 9000 + gi, gi % 2 == 1);
    const Matrix b = testing::RandomStochastic(n, k, rng);
    const Matrix h = SinkhornKnopp(testing::RandomStochastic(k, k, rng)).values;
    const EdgeWeightTensor w = EdgeWeights(g, {b, BeliefKind::kPrior}, h);
    for (int c = 0; c < k; ++c) g_slices.push_back(w.Slice(c));
    for (double alpha : {0.3, 0.6, 0.9}) {
      bool ok = true;
      for (const ClassConvergence& cc : ConvergenceCheck(w, alpha)) {
        ok = ok && (cc.verdict == ConvergenceVerdict::kCertified ||
                    cc.verdict == ConvergenceVerdict::kConvergent);
      }
      if (!ok) {
        ++rejected;
        continue;
      }
      PropagationConfig pc;
      pc.alpha = alpha;
      pc.max_iters = 100000;
      pc.tol = 1e-15;
      const PropagationResult r = PropagateClp(w, {b, BeliefKind::kBasePrediction}, pc);
      const Matrix exact = ClosedFormClpAll(w, b, alpha);
      worst = std::max(worst, (r.beliefs.values - exact).cwiseAbs().maxCoeff());
      ++compared;
    }
  }
  Note(o, compared > 0, Fmt("%.0f graph/alpha pairs compared, %.0f rejected", compared, rejected));
  Note(o, worst < 1e-8, Fmt("max deviation %.2e", worst));
  const double t = Seconds(start);
  Note(o, t < 30.0, Fmt("%.2f s", t));
  return o;
}

// Iterates a single-class operator from a random positive teleport.
PropagationResult RunSingle(const SparseMatrix& op, double alpha, int max_iters, std::uint64_t seed) {
  Rng rng = MakeStream(seed, 3);
  Matrix t(op.rows, 1);
  for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, 0) = 0.1 + Uniform01(rng);
  PropagationConfig pc;
  pc.alpha = alpha;
  pc.max_iters = max_iters;
  pc.tol = 1e-10;
  return PropagateClp(EdgeWeightsFromSlices({op}), {t, BeliefKind::kBasePrediction}, pc);
}

SparseMatrix Scaled(SparseMatrix m, double factor) {
  for (double& v : m.values) v *= factor;
  return m;
}

Outcome ConvergenceBoundary() {
  Outcome o;
  // Directed 25-cycle (rho = 1) and a random strongly connected matrix
  // normalized by its exact spectral radius.
  Matrix cycle = Matrix::Zero(25, 25);
  for (int i = 0; i < 25; ++i) cycle((i + 1) % 25, i) = 1.0;
  const Graph rg = testing::RandomGraph(40, 2, 0.15, 77, true);
  SparseMatrix random = PropagationOperator(rg, AdjacencyWeighting::kRaw);
  Rng rng = MakeStream(77, 4);
  for (double& v : random.values) v = 0.2 + Uniform01(rng);
  const double rho =
      Eigen::EigenSolver<Matrix>(random.ToDense(), false).eigenvalues().cwiseAbs().maxCoeff();
  const std::vector<std::pair<std::string, SparseMatrix>> bases = {
      {"cycle", SparseMatrix::FromDense(cycle)}, {"random", Scaled(random, 1.0 / rho)}};

  for (const auto& [name, base] : bases) {
    for (double alpha : {0.5, 0.8}) {
      const PropagationResult conv = RunSingle(Scaled(base, 0.8 / alpha), alpha, 500, 1);
      const bool c_ok = conv.status == PropagationStatus::kConverged &&
                        conv.log.back().residual < 1e-10;
      Note(o, c_ok, name + Fmt(" a=%.1f rho=0.8/a: converged in %.0f iters", alpha, conv.iterations()));
      const PropagationResult div = RunSingle(Scaled(base, 1.2 / alpha), alpha, 200, 2);
      Note(o, div.status == PropagationStatus::kDiverged,
           name + Fmt(" a=%.1f rho=1.2/a: diverged at iter %.0f", alpha, div.iterations()));
      const ConvergenceVerdict below = CheckOperator(Scaled(base, 0.8 / alpha), alpha).verdict;
      const ConvergenceVerdict above = CheckOperator(Scaled(base, 1.2 / alpha), alpha).verdict;
      Note(o, below != ConvergenceVerdict::kDivergent && above == ConvergenceVerdict::kDivergent,
           name + " verdicts " + ToString(below) + "/" + ToString(above));
    }
  }
  return o;
}

Outcome NormChain() {
  Outcome o;
  int violations = 0;
  double worst_gap = -1e300;
  for (std::size_t i = 0; i < g_slices.size(); ++i) {
    const SparseMatrix& s = g_slices[i];
    const double rho = SpectralRadius(s, 2000, 1e-10, i).rho;
    const double fro = s.FrobeniusNorm();
    const double l1 = s.EntrywiseOneNorm();
    if (rho > fro + 1e-6 || fro > l1 + 1e-6) ++violations;
    worst_gap = std::max({worst_gap, rho - fro, fro - l1});
  }
  Note(o, !g_slices.empty(), Fmt("%.0f slices", static_cast<double>(g_slices.size())));
  Note(o, violations == 0, Fmt("%.0f violations, largest gap %.2e", violations, worst_gap));
  return o;
}

Outcome SinkhornCheck() {
  Outcome o;
  Rng rng = MakeStream(5, 5);
  double worst_sum = 0.0;
  double worst_scale = 0.0;
  SinkhornOptions options;
  options.tol = 1e-12;
  options.max_iters = 100000;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng() % 20);
    Matrix m(k, k);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 1e-3 + Uniform01(rng);
    const SinkhornResult s = SinkhornKnopp(m, options);
    const SinkhornResult s3 = SinkhornKnopp(3.0 * m, options);
    worst_sum = std::max({worst_sum, (s.values.rowwise().sum().array() - 1.0).abs().maxCoeff(),
                          (s.values.colwise().sum().array() - 1.0).abs().maxCoeff()});
    worst_scale = std::max(worst_scale, (s.values - s3.values).cwiseAbs().maxCoeff());
  }
  Note(o, worst_sum <= 1e-9, Fmt("max |sum - 1| %.2e", worst_sum));
  Note(o, worst_scale <= 1e-8, Fmt("max |S(3M) - S(M)| %.2e", worst_scale));
  return o;
}

Outcome SyntheticControl() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  double worst_h = 0.0;
  double worst_deg = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (double f : kPInGrid) {
      SyntheticSpec s;
      s.num_nodes = 2000;
      s.num_classes = 10;
      s.target_avg_degree = 5.0;
      s.p_in_fraction = f;
      s.seed = seed;
      const Graph g = GenerateStructure(s);
      worst_h = std::max(worst_h, std::abs(EdgeHomophily(g) - s.p_in() / s.delta()));
      const double degree = static_cast<double>(g.arc_count()) / static_cast<double>(g.node_count());
      worst_deg = std::max(worst_deg, std::abs(degree - 5.0) / 5.0);
    }
  }
  Note(o, worst_h <= 0.03, Fmt("max |h - target| %.4f", worst_h));
  Note(o, worst_deg <= 0.05, Fmt("max relative degree error %.4f", worst_deg));
  const double t = Seconds(start);
  Note(o, t < 60.0, Fmt("%.2f s", t));
  return o;
}

Outcome GaussianFeatureCheck() {
  Outcome o;
  const int n = 10000;
  const Matrix x = GaussianFeatures(std::vector<ClassId>(n, 0), 10, 2026);
  const Eigen::RowVector2d mean = x.colwise().mean();
  const Matrix centered = x.rowwise() - mean;
  const Eigen::Matrix2d cov = centered.transpose() * centered / (n - 1);
  const Eigen::Matrix2d expected = 3500.0 * Eigen::Vector2d(7.0, 2.0).asDiagonal().toDenseMatrix();
  const double se0 = std::sqrt(expected(0, 0) / n);
  const double se1 = std::sqrt(expected(1, 1) / n);
  Note(o, std::abs(mean(0) - 300.0) <= 3 * se0 && std::abs(mean(1)) <= 3 * se1,
       Fmt("mean (%.2f, %.2f), %.2f x SE", mean(0), mean(1),
           std::max(std::abs(mean(0) - 300.0) / se0, std::abs(mean(1)) / se1)));
  const double rel = (cov - expected).norm() / expected.norm();
  const double rel00 = std::abs(cov(0, 0) / expected(0, 0) - 1.0);
  const double rel11 = std::abs(cov(1, 1) / expected(1, 1) - 1.0);
  Note(o, rel <= 0.1 && rel00 <= 0.1 && rel11 <= 0.1,
       Fmt("covariance relative error %.4f (diag %.4f, %.4f)", rel, rel00, rel11));
  return o;
}

Outcome GradientCheck() {
  Outcome o;
  Rng rng = MakeStream(8, 8);
  double worst = 0.0;
  int checked = 0;
  for (int instance = 0; instance < 5; ++instance) {
    const int dim = 3 + instance;
    const int classes = 2 + instance % 3;
    const Graph g = testing::RandomGraph(40, classes, 0.0, 500 + instance, false, dim);
    MlpParams p = InitMlp(dim, 8, 1 + instance % 3, classes, 600 + instance);
    std::vector<NodeId> rows;
    for (NodeId v = 0; v < 40; v += 2) rows.push_back(v);
    const LossGradient lg = CrossEntropyGradient(p, g.features(), rows, g.labels());
    for (int t = 0; t < 20; ++t) {
      const std::size_t l = rng() % p.layers.size();
      const bool bias = rng() % 4 == 0;
      DenseLayer& layer = p.layers[l];
      const Eigen::Index size = bias ? layer.bias.size() : layer.weight.size();
      const auto idx = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(size));
      double* param = bias ? layer.bias.data() + idx : layer.weight.data() + idx;
      const double analytic =
          bias ? lg.gradient[l].bias(idx) : lg.gradient[l].weight.data()[idx];
      const double saved = *param;
      const double eps = 1e-6;
      *param = saved + eps;
      const double up = CrossEntropyLoss(p, g.features(), rows, g.labels());
      *param = saved - eps;
      const double down = CrossEntropyLoss(p, g.features(), rows, g.labels());
      *param = saved;
      const double numeric = (up - down) / (2 * eps);
      const double scale = std::max(std::abs(numeric), std::abs(analytic));
      // Parameters feeding only inactive units have an exact zero gradient.
      const double rel = scale < 1e-9 ? 0.0 : std::abs(numeric - analytic) / scale;
      worst = std::max(worst, rel);
      ++checked;
    }
  }
  Note(o, worst <= 1e-3, Fmt("%.0f parameters, max relative error %.2e", checked, worst));
  return o;
}

ExperimentConfig PipelineConfig(double h, const fs::path& out) {
  ExperimentConfig c;
  SyntheticSpec s;
  s.num_nodes = 2000;
  s.num_classes = 10;
  s.target_avg_degree = 10.0;
  s.p_in_fraction = h;
  s.seed = 7;
  c.synthetic = s;
  c.scheme = SplitScheme::Medium();
  c.seeds = {0, 1, 2, 3, 4};
  c.output_dir = out.string();
  return c;
}

// Runs the criterion-9 sweep below `out` and returns its rows.
std::vector<SweepRow> PipelineSweep(const fs::path& out) {
  ExperimentConfig c = PipelineConfig(0.5, out);
  c.methods = {Method::kMlp, Method::kLp, Method::kClp};
  const auto rows = SweepHomophily(c, {0.1, 0.5, 0.9});
  WriteFileAtomic(out / "sweep.csv", SweepCsv(rows));
  return rows;
}

std::vector<CompatQualityRow> CompatTrend(const fs::path& out) {
  const ExperimentConfig c = PipelineConfig(0.3, out);
  const auto rows = CompatQuality(
      c, {SplitScheme::Sparse(), SplitScheme::Medium(), SplitScheme::Dense()});
  WriteFileAtomic(out / "compat_quality.csv", CompatQualityCsv(rows));
  return rows;
}

Outcome PipelineSanity(const fs::path& work) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const auto rows = PipelineSweep(work / "run_a" / "sweep");
  std::map<double, std::map<Method, double>> acc;
  for (const SweepRow& r : rows) acc[r.h][r.method] = r.test_acc.mean;
  for (const auto& [h, m] : acc) {
    const double mlp = m.at(Method::kMlp);
    const double lp = m.at(Method::kLp);
    const double clp = m.at(Method::kClp);
    Note(o, clp >= mlp - 0.01, Fmt("h=%.1f clp %.4f vs mlp %.4f", h, clp, mlp) + Fmt(", lp %.4f", lp));
    if (h == 0.1) Note(o, clp - lp >= 0.10, Fmt("h=0.1 clp - lp = %.4f", clp - lp));
  }
  const double t = Seconds(start);
  Note(o, t < 600.0, Fmt("%.1f s", t));
  return o;
}

Outcome CompatQualityTrend(const fs::path& work) {
  Outcome o;
  const auto rows = CompatTrend(work / "run_a" / "compat");
  const CompatQualityRow& sparse = rows.front();
  const CompatQualityRow& dense = rows.back();
  Note(o, dense.distance.mean <= sparse.distance.mean,
       Fmt("dist sparse %.4f, medium %.4f, dense %.4f", sparse.distance.mean, rows[1].distance.mean,
           dense.distance.mean));
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].mean_acc >= rows[i - 1].mean_acc;
  Note(o, monotone, Fmt("acc sparse %.4f, medium %.4f, dense %.4f", sparse.mean_acc, rows[1].mean_acc,
                        dense.mean_acc));
  return o;
}

// Relative paths of every CSV/TSV file below `root`, sorted.
std::vector<fs::path> TableFiles(const fs::path& root) {
  std::vector<fs::path> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".csv" || ext == ".tsv")) out.push_back(fs::relative(e.path(), root));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome Determinism(const fs::path& work) {
  Outcome o;
  const fs::path a = work / "run_a";
  const fs::path b = work / "run_b";
  PipelineSweep(b / "sweep");
  CompatTrend(b / "compat");
  WritePreset(SyntheticPreset::kSyn1, 0.2, 3, a / "synth");
  WritePreset(SyntheticPreset::kSyn1, 0.2, 3, b / "synth");

  const auto files_a = TableFiles(a);
  const auto files_b = TableFiles(b);
  Note(o, files_a == files_b && !files_a.empty(),
       Fmt("%.0f vs %.0f table files", static_cast<double>(files_a.size()),
           static_cast<double>(files_b.size())));
  std::size_t differing = 0;
  std::string first;
  for (const fs::path& f : files_a) {
    if (!fs::exists(b / f) || ReadFile(a / f) != ReadFile(b / f)) {
      if (differing++ == 0) first = f.string();
    }
  }
  Note(o, differing == 0, Fmt("%.0f files differ", static_cast<double>(differing)) +
                              (first.empty() ? "" : " (first: " + first + ")"));
  return o;
}

}  // namespace
}  // namespace clp

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path work =
      argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "clp_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<clp::Outcome()>>> criteria = {
      {"three-node oracle", clp::ThreeNodeOracle},
      {"closed-form equivalence", clp::ClosedFormEquivalence},
      {"convergence boundary", clp::ConvergenceBoundary},
      {"norm chain", clp::NormChain},
      {"sinkhorn", clp::SinkhornCheck},
      {"synthetic control", clp::SyntheticControl},
      {"gaussian features", clp::GaussianFeatureCheck},
      {"gradient check", clp::GradientCheck},
      {"pipeline sanity", [&] { return clp::PipelineSanity(work); }},
      {"compatibility quality trend", [&] { return clp::CompatQualityTrend(work); }},
      {"determinism", [&] { return clp::Determinism(work); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    clp::Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double t = clp::Seconds(start);
    failures += o.pass ? 0 : 1;
    std::printf("%s criterion %zu (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str(), t);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
