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

#ifndef TEXP_EXPERIMENTS_H_
#define TEXP_EXPERIMENTS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "texp/classifier.h"
#include "texp/config.h"
#include "texp/data_models.h"
#include "texp/optimizer.h"
#include "texp/unsupervised.h"

namespace texp {

struct ExperimentInfo {
  std::string name;
  std::string summary;
};

const std::vector<ExperimentInfo>& RegisteredExperiments();
bool IsRegisteredExperiment(const std::string& name);

// Every key the named experiment accepts, set to its default.
ConfigFile DefaultConfigFile(const std::string& name);

struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 1;
  int num_seeds = 1;
  int threads = 1;
  std::string output_dir = "out";

  // Toy experiments.
  ToyModelSpec toy;
  int toy_filters = 20;
  double toy_tilt = 10.0;
  TrainConfig train;

  // Supervised experiments. t_inf = t_inf_scale / sqrt(D), t = t_ratio * t_inf.
  ClassifierConfig classifier;
  LabeledToySpec data;  // templates are built per seed
  std::string templates = "stripes";
  double template_amplitude = 0.25;
  double t_inf_scale = 1.0;
  double t_ratio = 10.0;
  std::vector<double> eval_nus;
  double gate_nu = 0.3;

  std::vector<double> hist_t_inf;
  int hist_bins = 10;
  int hist_samples = 1000;

  int sparsity_images = 100;
  double sparsity_eps = 1e-8;

  int gradcheck_texp_instances = 100;
  int gradcheck_layer_instances = 20;

  std::string sweep_mode = "axes";
  std::vector<double> sweep_alpha;
  std::vector<double> sweep_t_inf_scale;
  std::vector<double> sweep_t_ratio;

  // The merged key/value text the fields were read from.
  ConfigFile resolved;

  static ExperimentConfig Defaults(const std::string& name);
  // `overrides` must name the experiment; other keys replace defaults.
  static ExperimentConfig FromConfig(const ConfigFile& overrides);

  std::string Hash() const;
  std::vector<std::uint64_t> Seeds() const;
  // Supervised layer settings for the given tilt scales and alpha.
  TexpLayerConfig LayerFor(double t_inf_scale, double t_ratio, double alpha) const;
};

struct RunArtifact {
  std::string output_dir;
  std::map<std::string, std::string> files;  // relative path -> checksum
  std::map<std::string, double> metrics;
  std::map<std::string, bool> gates;
  double wall_seconds = 0.0;

  bool AllGatesPass() const;
};

// Runs the experiment, writes its CSV files and manifest.json under
// config.output_dir.
RunArtifact RunExperiment(const ExperimentConfig& config);

std::string FileChecksum(const std::string& path);

// Seeds needed to pass a per-seed gate: all but one in five.
int RequiredPasses(int num_seeds);

}  // namespace texp

#endif  // TEXP_EXPERIMENTS_H_
