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

// Small fixtures shared by the unit tests and the acceptance binary.
#ifndef CLP_TESTS_TEST_UTIL_HPP_
#define CLP_TESTS_TEST_UTIL_HPP_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "clp/graph.hpp"
#include "clp/util.hpp"

namespace clp::testing {

inline Graph MakeGraph(NodeId n, const std::vector<std::pair<NodeId, NodeId>>& edges,
                       std::vector<ClassId> labels, bool directed = false, int num_classes = 0) {
  std::vector<Arc> arcs;
  for (const auto& [u, v] : edges) arcs.push_back({u, v});
  return Graph::Build(n, std::move(arcs), Matrix(), std::move(labels), num_classes, directed);
}

// 0-1-2-3
inline Graph Path4(std::vector<ClassId> labels = {0, 0, 1, 1}) {
  return MakeGraph(4, {{0, 1}, {1, 2}, {2, 3}}, std::move(labels));
}

// Nodes 0, 1 in class 0; 2, 3 in class 1; every cross pair connected.
inline Graph K22() {
  return MakeGraph(4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}, {0, 0, 1, 1});
}

inline Graph Triangle() { return MakeGraph(3, {{0, 1}, {1, 2}, {0, 2}}, {0, 0, 0}); }

// Erdos-Renyi style graph with uniformly random labels and features.
inline Graph RandomGraph(NodeId n, int num_classes, double p, std::uint64_t seed,
                         bool directed = false, int feature_dim = 0) {
  Rng rng = MakeStream(seed, 1);
  std::vector<Arc> arcs;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = directed ? 0 : u + 1; v < n; ++v) {
      if (u != v && Uniform01(rng) < p) arcs.push_back({u, v});
    }
  }
  std::vector<ClassId> labels(static_cast<std::size_t>(n));
  for (auto& y : labels) y = static_cast<ClassId>(rng() % static_cast<std::uint64_t>(num_classes));
  Matrix x(n, feature_dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = Uniform01(rng) - 0.5;
  return Graph::Build(n, std::move(arcs), std::move(x), std::move(labels), num_classes, directed);
}

// Random row-stochastic n x k matrix with entries bounded away from zero.
inline Matrix RandomStochastic(Eigen::Index n, Eigen::Index k, Rng& rng) {
  Matrix m(n, k);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 0.05 + Uniform01(rng);
  for (Eigen::Index r = 0; r < n; ++r) m.row(r) /= m.row(r).sum();
  return m;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("clp_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace clp::testing

#endif  // CLP_TESTS_TEST_UTIL_HPP_
