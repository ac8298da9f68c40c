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

// Command-line front end. Everything below goes through the C interface;
// this file only turns flags into JSON requests and prints results.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "clp/clp.h"
#include "json.hpp"

namespace {

using nlohmann::json;

struct Flags {
  std::string config;
  std::string dataset;
  std::string preset;
  double scale = 1.0;
  std::vector<std::string> schemes;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> methods;
  std::vector<double> alphas;
  bool directed = false;
  std::string out;
  std::string normalize_messages;
  std::string teleport;
  std::vector<double> homophily;
  std::string model;
  bool partial_labels = false;
};

// Exit codes: 0 success, 1 usage, 2 data, 3 numerical.
int ExitCode(clp_status status) {
  switch (status) {
    case CLP_OK: return 0;
    case CLP_ERROR_INVALID_ARGUMENT: return 1;
    case CLP_ERROR_NUMERICAL: return 3;
    case CLP_ERROR_DATA:
    case CLP_ERROR_IO:
    case CLP_ERROR_INTERNAL: return 2;
  }
  return 2;
}

struct Failure {
  int code;
};

void Check(clp_status status) {
  if (status != CLP_OK) {
    std::cerr << "clp: " << clp_status_string(status) << ": " << clp_last_error() << "\n";
    throw Failure{ExitCode(status)};
  }
}

std::string TakeString(char* s) {
  std::string out = s == nullptr ? "" : s;
  clp_string_free(s);
  return out;
}

void AddCommon(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config; flags override its fields");
  cmd->add_option("--dataset", f.dataset, "dataset directory (edges/features/labels TSV)");
  cmd->add_option("--preset", f.preset, "synthetic preset")
      ->check(CLI::IsMember({"syn1", "syn2", "syn3"}));
  cmd->add_option("--scale", f.scale, "node count factor for presets (1.0 = 10000 nodes)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--scheme", f.schemes, "split scheme")
      ->delimiter(',')
      ->check(CLI::IsMember({"sparse", "medium", "dense"}));
  cmd->add_option("--seeds", f.seeds, "comma-separated seeds")->delimiter(',');
  cmd->add_option("--method", f.methods, "method(s)")
      ->delimiter(',')
      ->check(CLI::IsMember({"mlp", "lp", "clp", "clp-star"}));
  cmd->add_option("--alpha", f.alphas, "comma-separated alpha grid")->delimiter(',');
  cmd->add_flag("--directed", f.directed, "keep arc directions");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--normalize-messages", f.normalize_messages, "message normalization")
      ->check(CLI::IsMember({"on", "off", "auto"}));
  cmd->add_option("--teleport", f.teleport, "teleport source")
      ->check(CLI::IsMember({"base", "prior", "auto"}));
  cmd->add_option("--homophily", f.homophily,
                  "target homophily (p_in / delta) for generated graphs; a list for sweep")
      ->delimiter(',');
  cmd->add_option("--model", f.model, "MLP checkpoint for inspect");
  cmd->add_flag("--partial-labels", f.partial_labels, "allow nodes without labels");
}

json ReadConfig(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) {
    std::cerr << "clp: cannot read config " << path << "\n";
    throw Failure{2};
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    std::cerr << "clp: malformed config " << path << ": " << e.what() << "\n";
    throw Failure{1};
  }
}

json BuildConfig(const Flags& f) {
  json c = ReadConfig(f.config);
  if (!f.dataset.empty() && !f.preset.empty()) {
    std::cerr << "clp: --dataset and --preset are mutually exclusive\n";
    throw Failure{1};
  }
  if (!f.dataset.empty()) {
    c.erase("synthetic");
    c["dataset"] = f.dataset;
  }
  if (!f.preset.empty()) {
    c.erase("dataset");
    json s = {{"preset", f.preset}, {"scale", f.scale}};
    if (!f.homophily.empty()) s["p_in_fraction"] = f.homophily.front();
    c["synthetic"] = s;
  } else if (!f.homophily.empty() && c.contains("synthetic")) {
    c["synthetic"]["p_in_fraction"] = f.homophily.front();
  }
  if (f.schemes.size() == 1) c["scheme"] = f.schemes.front();
  if (!f.seeds.empty()) c["seeds"] = f.seeds;
  if (!f.methods.empty()) {
    c.erase("method");
    c["methods"] = f.methods;
  }
  if (!f.alphas.empty()) c["alpha_grid"] = f.alphas;
  if (f.directed) c["directed"] = true;
  if (f.partial_labels) c["partial_labels"] = true;
  if (!f.out.empty()) c["output_dir"] = f.out;
  if (!f.normalize_messages.empty()) c["propagation"]["normalize_messages"] = f.normalize_messages;
  if (!f.teleport.empty()) c["propagation"]["teleport"] = f.teleport;
  return c;
}

void PrintWarnings(const json& report) {
  if (!report.contains("warnings")) return;
  for (const auto& w : report.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << "\n";
}

std::string Fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

void CmdSynth(const Flags& f) {
  if (f.out.empty()) {
    std::cerr << "clp synth: --out is required\n";
    throw Failure{1};
  }
  json request = {{"out", f.out}};
  const std::uint64_t seed = f.seeds.empty() ? 0 : f.seeds.front();
  if (!f.preset.empty()) {
    request["preset"] = f.preset;
    request["scale"] = f.scale;
    request["seed"] = seed;
  } else {
    json config = ReadConfig(f.config);
    json s = config.value("synthetic", json::object());
    if (!f.homophily.empty()) s["p_in_fraction"] = f.homophily.front();
    if (!f.seeds.empty()) s["seed"] = seed;
    request["synthetic"] = s;
  }
  char* out = nullptr;
  Check(clp_synth(request.dump().c_str(), &out));
  const json summary = json::parse(TakeString(out));
  std::cout << "dir\tp_in_fraction\trealized_h\tavg_degree\tedges\n";
  for (const auto& d : summary.at("datasets")) {
    std::cout << d.value("dir", f.out) << "\t" << d.at("p_in_fraction").get<double>() << "\t"
              << Fixed(d.at("realized_edge_homophily").get<double>()) << "\t"
              << Fixed(d.at("realized_avg_degree").get<double>(), 3) << "\t"
              << d.at("edge_count").get<std::uint64_t>() << "\n";
  }
}

void CmdInspect(const Flags& f) {
  json request = {{"config", BuildConfig(f)}};
  if (!f.model.empty()) request["checkpoint"] = f.model;
  char* out = nullptr;
  Check(clp_inspect(request.dump().c_str(), &out));
  const json r = json::parse(TakeString(out));
  std::cout << "edge_homophily\t" << Fixed(r.at("edge_homophily").get<double>()) << "\n";
  std::cout << "node_homophily\t" << Fixed(r.at("node_homophily").get<double>()) << "\n";
  const json& d = r.at("degree");
  std::cout << "degree\tmin " << d.at("min") << "\tmax " << d.at("max") << "\tmean "
            << Fixed(d.at("mean").get<double>(), 3) << "\tmedian " << d.at("median")
            << "\tisolated " << d.at("isolated") << "\n";
  std::cout << "true_compatibility\n";
  for (const auto& row : r.at("true_compatibility")) {
    std::string line;
    for (const auto& v : row) line += (line.empty() ? "  " : " ") + Fixed(v.get<double>(), 3);
    std::cout << line << "\n";
  }
  std::cout << "h_v histogram\n";
  const auto& hist = r.at("h_histogram");
  for (std::size_t b = 0; b < hist.size(); ++b) {
    std::cout << "  " << Fixed(static_cast<double>(b) / 10.0, 1) << "\t" << hist[b] << "\n";
  }
  std::cout << "  undefined\t" << r.at("h_undefined") << "\n";
  if (r.contains("bucket_table_csv")) {
    std::cout << "accuracy by h_v (" << r.at("bucket_mask").get<std::string>() << ")\n"
              << r.at("bucket_table_csv").get<std::string>();
  }
  for (const auto& w : r.at("compatibility_warnings")) {
    std::cerr << "warning: " << w.get<std::string>() << "\n";
  }
}

void CmdTrain(const Flags& f) {
  char* out = nullptr;
  Check(clp_train(BuildConfig(f).dump().c_str(), &out));
  const json r = json::parse(TakeString(out));
  std::cout << "seed\tlayers\tbest_epoch\tval_acc\ttest_acc\tcheckpoint_sha256\n";
  for (const auto& run : r.at("runs")) {
    std::cout << run.at("seed") << "\t" << run.at("hidden_layers") << "\t" << run.at("best_epoch")
              << "\t" << Fixed(run.at("best_val_acc").get<double>()) << "\t"
              << Fixed(run.at("test_acc").get<double>()) << "\t"
              << run.at("checkpoint_sha256").get<std::string>() << "\n";
  }
}

void CmdRun(const Flags& f) {
  char* out = nullptr;
  Check(clp_run(BuildConfig(f).dump().c_str(), &out));
  const json r = json::parse(TakeString(out));
  PrintWarnings(r);
  std::cout << "method\tmean_test_acc\tstd\tn_seeds\tmean_compat_distance\n";
  for (const auto& a : r.at("aggregate")) {
    std::cout << a.at("method").get<std::string>() << "\t"
              << Fixed(a.at("mean_test_acc").get<double>()) << "\t"
              << Fixed(a.at("std_test_acc").get<double>()) << "\t" << a.at("n_seeds") << "\t"
              << (a.contains("mean_compat_distance")
                      ? Fixed(a.at("mean_compat_distance").get<double>())
                      : std::string("-"))
              << "\n";
  }
}

void CmdSweep(const Flags& f) {
  json request = {{"config", BuildConfig(f)}};
  if (!f.homophily.empty()) {
    request["h_grid"] = f.homophily;
    request["config"]["synthetic"].erase("p_in_fraction");
  }
  char* out = nullptr;
  Check(clp_sweep(request.dump().c_str(), &out));
  std::cout << TakeString(out);
}

void CmdCompatQuality(const Flags& f) {
  json request = {{"config", BuildConfig(f)}};
  if (!f.schemes.empty()) request["schemes"] = f.schemes;
  char* out = nullptr;
  Check(clp_compat_quality(request.dump().c_str(), &out));
  std::cout << TakeString(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compatible label propagation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", clp_version());

  Flags flags;
  struct Sub {
    const char* name;
    const char* help;
    void (*run)(const Flags&);
  };
  const Sub subs[] = {
      {"synth", "generate synthetic benchmark graphs", CmdSynth},
      {"inspect", "homophily, compatibility and degree diagnostics", CmdInspect},
      {"train", "train the base predictor", CmdTrain},
      {"run", "run the full pipeline", CmdRun},
      {"sweep", "accuracy across a homophily grid", CmdSweep},
      {"compat-quality", "compatibility estimation error per split scheme", CmdCompatQuality},
  };
  std::vector<std::pair<CLI::App*, void (*)(const Flags&)>> commands;
  for (const Sub& s : subs) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    AddCommon(cmd, flags);
    commands.emplace_back(cmd, s.run);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    for (const auto& [cmd, run] : commands) {
      if (cmd->parsed()) run(flags);
    }
  } catch (const Failure& f) {
    return f.code;
  } catch (const json::exception& e) {
    std::cerr << "clp: unexpected response: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
