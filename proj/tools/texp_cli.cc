// Copyright 2026 The TEXP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver for the registered experiments.
//
//   texp_cli --list
//   texp_cli --config configs/toy1.cfg --seed 3 --out runs/toy1 --check
//   texp_cli --experiment sweep --set run.threads=4 --out runs/sweep

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "texp/config.h"
#include "texp/experiments.h"

namespace {

void PrintList() {
  for (const auto& e : texp::RegisteredExperiments()) {
    std::printf("%-22s %s\n", e.name.c_str(), e.summary.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tilted exponential layer experiments"};
  std::string config_path;
  std::string experiment;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<std::string> assignments;
  bool check = false;
  bool list = false;
  bool print_config = false;
  app.add_option("--config", config_path, "key = value config file")
      ->check(CLI::ExistingFile);
  app.add_option("--experiment", experiment, "experiment name (overrides the config)");
  app.add_option("--seed", seed, "base seed (overrides the config)");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--set", assignments, "extra key=value override, repeatable");
  app.add_flag("--check", check, "exit nonzero when an acceptance gate fails");
  app.add_flag("--list", list, "print the registered experiments and exit");
  app.add_flag("--print-config", print_config,
               "print the resolved configuration and exit");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    PrintList();
    return 0;
  }

  texp::ExperimentConfig config;
  try {
    texp::ConfigFile overrides;
    if (!config_path.empty()) overrides = texp::ConfigFile::Load(config_path);
    for (const auto& a : assignments) overrides.SetAssignment(a);
    if (!experiment.empty()) overrides.Set("experiment", experiment);
    if (seed) overrides.Set("seed", std::to_string(*seed));
    if (!out_dir.empty()) overrides.Set("output.dir", out_dir);
    if (!overrides.Has("experiment")) {
      std::cerr << "error: no experiment given (use --config or --experiment; "
                   "--list shows the choices)\n";
      return 2;
    }
    config = texp::ExperimentConfig::FromConfig(overrides);
  } catch (const texp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (print_config) {
    std::cout << config.resolved.Canonical();
    return 0;
  }

  texp::RunArtifact artifact;
  try {
    artifact = texp::RunExperiment(config);
  } catch (const std::exception& e) {
    std::cerr << config.name << " failed: " << e.what() << "\n";
    return 3;
  }

  std::printf("%s: %zu files in %s (%.1f s)\n", config.name.c_str(),
              artifact.files.size(), artifact.output_dir.c_str(),
              artifact.wall_seconds);
  for (const auto& [name, value] : artifact.metrics) {
    std::printf("  %-40s %.6g\n", name.c_str(), value);
  }
  for (const auto& [name, pass] : artifact.gates) {
    std::printf("  gate %-35s %s\n", name.c_str(), pass ? "PASS" : "FAIL");
  }
  if (check && !artifact.AllGatesPass()) return 1;
  return 0;
}
