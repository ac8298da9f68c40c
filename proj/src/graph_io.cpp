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

#include "clp/graph_io.hpp"

#include <string>
#include <vector>

#include "clp/error.hpp"
#include "clp/util.hpp"

namespace clp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Calls fn(line_number, line) for every LF-terminated line. A missing final
// newline is tolerated; a trailing empty line is not reported.
template <typename Fn>
void ForEachLine(std::string_view text, Fn&& fn) {
  std::size_t start = 0;
  std::size_t line_no = 1;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    fn(line_no, text.substr(start, end - start));
    start = end + 1;
    ++line_no;
  }
}

std::string Where(const fs::path& path, std::size_t line_no) {
  return path.filename().string() + ":" + std::to_string(line_no);
}

}  // namespace

Graph LoadGraph(const fs::path& edges_path, const fs::path& features_path,
                const fs::path& labels_path, const LoadOptions& options) {
  // Features first: they fix the node count.
  std::vector<std::vector<double>> rows;
  const std::string feature_text = ReadFile(features_path);
  std::size_t dim = 0;
  ForEachLine(feature_text, [&](std::size_t line_no, std::string_view line) {
    std::vector<double> row;
    if (!line.empty()) {
      for (std::string_view field : SplitFields(line, '\t')) {
        row.push_back(ParseDouble(field, Where(features_path, line_no)));
      }
    }
    if (rows.empty()) {
      dim = row.size();
    } else if (row.size() != dim) {
      Fail(ErrorCode::kData, Where(features_path, line_no) + ": expected " +
                                 std::to_string(dim) + " columns, got " +
                                 std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  });

  std::int64_t n = options.node_count.value_or(static_cast<std::int64_t>(rows.size()));
  if (options.node_count && !rows.empty() && static_cast<std::int64_t>(rows.size()) != n) {
    Fail(ErrorCode::kData, features_path.filename().string() + ": " +
                               std::to_string(rows.size()) + " feature rows for " +
                               std::to_string(n) + " nodes");
  }
  Matrix features(n, static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }

  std::vector<Arc> arcs;
  const std::string edge_text = ReadFile(edges_path);
  ForEachLine(edge_text, [&](std::size_t line_no, std::string_view line) {
    const auto fields = SplitFields(line, '\t');
    if (fields.size() != 2) {
      Fail(ErrorCode::kData, Where(edges_path, line_no) + ": malformed arc line '" +
                                 std::string(line) + "'");
    }
    const std::int64_t src = ParseInt(fields[0], Where(edges_path, line_no));
    const std::int64_t dst = ParseInt(fields[1], Where(edges_path, line_no));
    if (src < 0 || src >= n || dst < 0 || dst >= n) {
      Fail(ErrorCode::kData, Where(edges_path, line_no) + ": node id out of range [0, " +
                                 std::to_string(n) + ")");
    }
    arcs.push_back({static_cast<NodeId>(src), static_cast<NodeId>(dst)});
  });

  std::optional<std::vector<ClassId>> labels;
  if (!labels_path.empty()) {
    labels.emplace(static_cast<std::size_t>(n), kUnknownLabel);
    const std::string label_text = ReadFile(labels_path);
    ForEachLine(label_text, [&](std::size_t line_no, std::string_view line) {
      const auto fields = SplitFields(line, '\t');
      if (fields.size() != 2) {
        Fail(ErrorCode::kData, Where(labels_path, line_no) + ": malformed label line '" +
                                   std::string(line) + "'");
      }
      const std::int64_t node = ParseInt(fields[0], Where(labels_path, line_no));
      const std::int64_t cls = ParseInt(fields[1], Where(labels_path, line_no));
      if (node < 0 || node >= n) {
        Fail(ErrorCode::kData, Where(labels_path, line_no) + ": node id out of range");
      }
      if (cls < 0 || (options.num_classes && cls >= *options.num_classes)) {
        Fail(ErrorCode::kData, Where(labels_path, line_no) + ": class id out of range");
      }
      auto& slot = (*labels)[static_cast<std::size_t>(node)];
      if (slot != kUnknownLabel) {
        Fail(ErrorCode::kData, Where(labels_path, line_no) + ": duplicate label for node " +
                                   std::to_string(node));
      }
      slot = static_cast<ClassId>(cls);
    });
    if (!options.partial_labels) {
      for (std::size_t v = 0; v < labels->size(); ++v) {
        if ((*labels)[v] == kUnknownLabel) {
          Fail(ErrorCode::kData, labels_path.filename().string() + ": node " +
                                     std::to_string(v) +
                                     " has no label (use partial labels to allow this)");
        }
      }
    }
  }

  return Graph::Build(n, std::move(arcs), std::move(features), std::move(labels),
                      options.num_classes.value_or(0), options.directed);
}

json ReadManifest(const fs::path& dir) {
  const fs::path path = dir / kManifestFile;
  if (!fs::exists(path)) return nullptr;
  try {
    return json::parse(ReadFile(path));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kData, path.string() + ": " + e.what());
  }
}

Graph LoadDataset(const fs::path& dir, std::optional<bool> directed_override,
                  bool partial_labels) {
  if (!fs::is_directory(dir)) Fail(ErrorCode::kIo, "no dataset directory " + dir.string());
  const json manifest = ReadManifest(dir);
  LoadOptions options;
  options.partial_labels = partial_labels;
  if (manifest.is_object()) {
    try {
      options.node_count = manifest.at("node_count").get<std::int64_t>();
      if (manifest.contains("num_classes")) {
        options.num_classes = manifest.at("num_classes").get<int>();
      }
      options.directed = manifest.value("directed", false);
      options.partial_labels = partial_labels || manifest.value("partial_labels", false);
      if (manifest.contains("files")) {
        for (const auto& [key, entry] : manifest.at("files").items()) {
          const fs::path file = dir / entry.at("path").get<std::string>();
          const std::string expected = entry.at("sha256").get<std::string>();
          if (Sha256File(file) != expected) {
            Fail(ErrorCode::kData, file.string() + ": checksum mismatch with manifest");
          }
        }
      }
    } catch (const json::exception& e) {
      Fail(ErrorCode::kData, (dir / kManifestFile).string() + ": " + e.what());
    }
  }
  if (directed_override) options.directed = *directed_override;
  const fs::path labels = dir / kLabelsFile;
  return LoadGraph(dir / kEdgesFile, dir / kFeaturesFile,
                   fs::exists(labels) ? labels : fs::path(), options);
}

std::string EdgesTsv(const Graph& graph) {
  std::string out;
  for (NodeId u = 0; u < graph.node_count(); ++u) {
    for (NodeId v : graph.out_neighbors(u)) {
      out += std::to_string(u);
      out += '\t';
      out += std::to_string(v);
      out += '\n';
    }
  }
  return out;
}

std::string FeaturesTsv(const Graph& graph) {
  std::string out;
  const Matrix& x = graph.features();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j > 0) out += '\t';
      out += FormatDouble(x(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string LabelsTsv(const Graph& graph) {
  std::string out;
  for (NodeId v = 0; v < graph.node_count() && graph.has_labels(); ++v) {
    if (graph.label(v) == kUnknownLabel) continue;
    out += std::to_string(v);
    out += '\t';
    out += std::to_string(graph.label(v));
    out += '\n';
  }
  return out;
}

void SaveDataset(const Graph& graph, const fs::path& dir, const json& extra) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());

  json files = json::object();
  auto emit = [&](const char* key, const char* name, const std::string& content) {
    WriteFileAtomic(dir / name, content);
    files[key] = {{"path", name}, {"sha256", Sha256Hex(content)}};
  };
  emit("edges", kEdgesFile, EdgesTsv(graph));
  emit("features", kFeaturesFile, FeaturesTsv(graph));
  if (graph.has_labels()) emit("labels", kLabelsFile, LabelsTsv(graph));

  json manifest = {
      {"format_version", 1},
      {"node_count", graph.node_count()},
      {"num_classes", graph.num_classes()},
      {"directed", graph.directed()},
      {"feature_dim", graph.feature_dim()},
      {"arc_count", graph.arc_count()},
      {"partial_labels", graph.has_labels() && !graph.fully_labeled()},
      {"files", files},
  };
  if (!extra.is_null()) manifest["extra"] = extra;
  WriteFileAtomic(dir / kManifestFile, manifest.dump(2) + "\n");
}

}  // namespace clp
