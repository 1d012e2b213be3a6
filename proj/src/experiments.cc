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

#include "texp/experiments.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "texp/csv.h"
#include "texp/gradcheck.h"
#include "texp/metrics.h"
#include "texp/rng.h"

namespace texp {
namespace {

namespace fs = std::filesystem;

constexpr char kVersion[] = "0.1.0";

bool IsToy(const std::string& name) {
  return name == "toy1" || name == "toy1-balanced" || name == "toy2" ||
         name == "histograms";
}

bool IsSupervised(const std::string& name) {
  return name == "supervised-robustness" || name == "sweep" || name == "sparsity";
}

bool Trains(const std::string& name) {
  return name == "supervised-robustness" || name == "sweep";
}

std::string Hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string ShortReal(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", value);
  return buf;
}

template <typename Fn>
void WithPath(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

template <typename Enum>
Enum ParseChoice(const ConfigFile& f, const std::string& key,
                 std::initializer_list<std::pair<const char*, Enum>> choices) {
  const std::string value = f.GetString(key);
  std::string names;
  for (const auto& [name, e] : choices) {
    if (value == name) return e;
    names += names.empty() ? name : std::string("|") + name;
  }
  throw ConfigError(key + ": expected one of " + names + ", got '" + value + "'");
}

void RequirePositive(const std::string& key, double value) {
  if (!(value > 0.0)) throw ConfigError(key + ": must be positive");
}

void SetToyDefaults(const std::string& name, ConfigFile& f) {
  const bool model2 = name == "toy2";
  f.Set("run.seeds", "5");
  f.Set("model.kind", model2 ? "model2" : "model1");
  f.Set("model.d", "10");
  f.Set("model.sigma", model2 ? "0.3" : "0.1");
  if (model2) {
    f.Set("model.a1", "3");
    f.Set("model.a2", "2");
  }
  f.Set("model.num_filters", "20");
  f.Set("model.tilt", "10");
  f.Set("train.lr", model2 ? "0.2" : "0.05");
  f.Set("train.lr_milestones", "");
  f.Set("train.lr_decay", "0.1");
  f.Set("train.steps", model2 ? "50000" : "5000");
  f.Set("train.optimizer", "plain");
  f.Set("train.objective", "unscaled");
  f.Set("train.balanced", name == "toy1-balanced" ? "true" : "false");
  f.Set("train.log_every", model2 ? "100" : "10");
}

void SetSupervisedDefaults(const std::string& name, ConfigFile& f) {
  f.Set("data.height", "8");
  f.Set("data.width", "8");
  f.Set("data.channels", "1");
  f.Set("data.classes", "4");
  f.Set("data.templates", "stripes");
  f.Set("data.amplitude", "0.25");
  f.Set("data.noise", "0.05");
  f.Set("data.train_per_class", "64");
  f.Set("data.test_per_class", "100");
  f.Set("layer.num_filters", "16");
  f.Set("layer.kernel", "3");
  f.Set("layer.stride", "1");
  f.Set("layer.padding", "1");
  f.Set("layer.t_inf_scale", "1");
  f.Set("layer.t_ratio", "10");
  f.Set("layer.alpha", "0.001");
  f.Set("layer.c", "0.5");
  f.Set("layer.variant", "standard");
  f.Set("layer.v2_keep_fraction", "0.2");
  f.Set("layer.balanced", "false");
  if (!Trains(name)) return;
  f.Set("train.lr", "0.01");
  f.Set("train.lr_milestones", "");
  f.Set("train.lr_decay", "0.1");
  f.Set("train.steps", "600");
  f.Set("train.batch_size", "32");
  f.Set("train.optimizer", "adam");
  f.Set("train.log_every", "50");
  f.Set("eval.nu", "0, 0.1, 0.2, 0.3");
}

}  // namespace

const std::vector<ExperimentInfo>& RegisteredExperiments() {
  static const std::vector<ExperimentInfo> kExperiments = {
      {"toy1", "Model 1 ascent: neurons align with the two signals"},
      {"toy1-balanced", "Model 1 with the balanced objective: spurious neurons turn away"},
      {"toy2", "Model 2 ascent: orthogonal energy dies out"},
      {"histograms", "softmax output histograms of a trained Model 1 bank per t_inf"},
      {"sparsity", "nonzero fractions of the TEXP layer against a ReLU layer"},
      {"grad-check", "finite-difference checks of every analytic gradient"},
      {"supervised-robustness", "TEXP and baseline classifiers under Gaussian corruption"},
      {"sweep", "alpha / t_inf / t grid with clean and robust accuracy per point"},
  };
  return kExperiments;
}

bool IsRegisteredExperiment(const std::string& name) {
  const auto& all = RegisteredExperiments();
  return std::any_of(all.begin(), all.end(),
                     [&](const ExperimentInfo& e) { return e.name == name; });
}

ConfigFile DefaultConfigFile(const std::string& name) {
  if (!IsRegisteredExperiment(name)) {
    throw ConfigError("experiment: unknown experiment '" + name + "'");
  }
  ConfigFile f;
  f.Set("experiment", name);
  f.Set("seed", "1");
  f.Set("output.dir", "out");
  f.Set("run.seeds", "1");
  if (IsToy(name)) SetToyDefaults(name, f);
  if (IsSupervised(name)) SetSupervisedDefaults(name, f);
  if (name == "histograms") {
    f.Set("hist.t_inf", "1, 3");
    f.Set("hist.bins", "10");
    f.Set("hist.samples", "1000");
  } else if (name == "sparsity") {
    f.Set("sparsity.images", "100");
    f.Set("sparsity.eps", "1e-8");
  } else if (name == "grad-check") {
    f.Set("gradcheck.texp_instances", "100");
    f.Set("gradcheck.layer_instances", "20");
  } else if (name == "supervised-robustness") {
    f.Set("run.seeds", "5");
    f.Set("eval.gate_nu", "0.3");
  } else if (name == "sweep") {
    f.Set("run.threads", "1");
    f.Set("sweep.mode", "axes");
    f.Set("sweep.alpha", "1e-5, 1e-4, 5e-4, 2e-3, 5e-3, 1e-2");
    f.Set("sweep.t_inf_scale", "0.5, 2, 3, 4, 8, 16");
    f.Set("sweep.t_ratio", "1, 5, 15, 25, 50");
  }
  return f;
}

ExperimentConfig ExperimentConfig::Defaults(const std::string& name) {
  ConfigFile f;
  f.Set("experiment", name);
  return FromConfig(f);
}

ExperimentConfig ExperimentConfig::FromConfig(const ConfigFile& overrides) {
  if (!overrides.Has("experiment")) throw ConfigError("experiment: missing");
  ExperimentConfig c;
  c.name = overrides.GetString("experiment");
  ConfigFile f = DefaultConfigFile(c.name);
  f.Merge(overrides, /*known_keys_only=*/true);
  c.resolved = f;

  c.seed = f.GetUnsigned("seed");
  c.output_dir = f.GetString("output.dir");
  c.num_seeds = static_cast<int>(f.GetInt("run.seeds"));
  if (c.num_seeds < 1) throw ConfigError("run.seeds: must be >= 1");
  if (f.Has("run.threads")) {
    c.threads = static_cast<int>(f.GetInt("run.threads"));
    if (c.threads < 1) throw ConfigError("run.threads: must be >= 1");
  }

  if (f.Has("model.kind")) {
    c.toy.kind = ParseChoice<ToyModelKind>(
        f, "model.kind",
        {{"model1", ToyModelKind::kModel1}, {"model2", ToyModelKind::kModel2}});
    const int d = static_cast<int>(f.GetInt("model.d"));
    const double sigma = f.GetReal("model.sigma");
    WithPath("model", [&] {
      if (c.toy.kind == ToyModelKind::kModel1) {
        c.toy.model1 = Model1Spec::Defaults(d, sigma);
      } else {
        c.toy.model2.d = d;
        c.toy.model2.sigma = sigma;
        if (f.Has("model.a1")) c.toy.model2.a1 = f.GetReal("model.a1");
        if (f.Has("model.a2")) c.toy.model2.a2 = f.GetReal("model.a2");
      }
      c.toy.Validate();
    });
    c.toy_filters = static_cast<int>(f.GetInt("model.num_filters"));
    if (c.toy_filters < 1) throw ConfigError("model.num_filters: must be >= 1");
    c.toy_tilt = f.GetReal("model.tilt");
    RequirePositive("model.tilt", c.toy_tilt);
  }

  if (f.Has("train.lr")) {
    c.train.schedule.initial = f.GetReal("train.lr");
    c.train.schedule.milestones = f.GetIntList("train.lr_milestones");
    c.train.schedule.decay = f.GetReal("train.lr_decay");
    c.train.steps = static_cast<int>(f.GetInt("train.steps"));
    if (f.Has("train.batch_size")) {
      c.train.batch_size = static_cast<int>(f.GetInt("train.batch_size"));
    }
    c.train.optimizer.kind = ParseChoice<OptimizerKind>(
        f, "train.optimizer",
        {{"plain", OptimizerKind::kPlain},
         {"momentum", OptimizerKind::kMomentum},
         {"adam", OptimizerKind::kAdam}});
    if (f.Has("train.objective")) {
      c.train.objective_form = ParseChoice<ObjectiveForm>(
          f, "train.objective",
          {{"unscaled", ObjectiveForm::kUnscaled}, {"scaled", ObjectiveForm::kScaled}});
    }
    if (f.Has("train.balanced")) c.train.balanced = f.GetBool("train.balanced");
    c.train.log_every = static_cast<int>(f.GetInt("train.log_every"));
    c.train.seed = c.seed;
    WithPath("train", [&] { c.train.Validate(); });
  }

  if (f.Has("data.height")) {
    c.classifier.height = static_cast<int>(f.GetInt("data.height"));
    c.classifier.width = static_cast<int>(f.GetInt("data.width"));
    c.classifier.channels = static_cast<int>(f.GetInt("data.channels"));
    c.classifier.num_classes = static_cast<int>(f.GetInt("data.classes"));
    c.templates = f.GetString("data.templates");
    if (c.templates != "stripes" && c.templates != "orthogonal") {
      throw ConfigError("data.templates: expected stripes|orthogonal, got '" +
                        c.templates + "'");
    }
    if (c.templates == "stripes" &&
        (c.classifier.num_classes != 4 || c.classifier.channels != 1)) {
      throw ConfigError("data.templates: stripes define 4 single-channel classes");
    }
    c.template_amplitude = f.GetReal("data.amplitude");
    RequirePositive("data.amplitude", c.template_amplitude);
    c.data.num_classes = c.classifier.num_classes;
    c.data.noise = f.GetReal("data.noise");
    c.data.train_per_class = static_cast<int>(f.GetInt("data.train_per_class"));
    c.data.test_per_class = static_cast<int>(f.GetInt("data.test_per_class"));
    if (c.data.noise < 0.0) throw ConfigError("data.noise: must be >= 0");
    if (c.data.train_per_class < 1 || c.data.test_per_class < 1) {
      throw ConfigError("data.train_per_class: per-class counts must be >= 1");
    }

    TexpLayerConfig& layer = c.classifier.layer;
    layer.num_filters = static_cast<int>(f.GetInt("layer.num_filters"));
    layer.geometry.kernel = static_cast<int>(f.GetInt("layer.kernel"));
    layer.geometry.stride = static_cast<int>(f.GetInt("layer.stride"));
    layer.geometry.padding = static_cast<int>(f.GetInt("layer.padding"));
    layer.threshold_c = f.GetReal("layer.c");
    layer.variant = ParseChoice<TexpVariant>(
        f, "layer.variant",
        {{"standard", TexpVariant::kStandard}, {"v2", TexpVariant::kV2}});
    layer.v2_keep_fraction = f.GetReal("layer.v2_keep_fraction");
    layer.balanced = f.GetBool("layer.balanced");
    c.t_inf_scale = f.GetReal("layer.t_inf_scale");
    c.t_ratio = f.GetReal("layer.t_ratio");
    RequirePositive("layer.t_inf_scale", c.t_inf_scale);
    RequirePositive("layer.t_ratio", c.t_ratio);
    const double alpha = f.GetReal("layer.alpha");
    if (!(alpha >= 0.0)) throw ConfigError("layer.alpha: must be >= 0");
    WithPath("layer", [&] {
      layer.geometry.Validate();
      layer = c.LayerFor(c.t_inf_scale, c.t_ratio, alpha);
      c.classifier.Validate();
    });
  }

  if (f.Has("eval.nu")) {
    c.eval_nus = f.GetRealList("eval.nu");
    if (std::find(c.eval_nus.begin(), c.eval_nus.end(), 0.0) == c.eval_nus.end()) {
      throw ConfigError("eval.nu: must include 0 (clean accuracy)");
    }
    for (double nu : c.eval_nus) {
      if (!(nu >= 0.0)) throw ConfigError("eval.nu: levels must be >= 0");
    }
  }
  if (f.Has("eval.gate_nu")) {
    c.gate_nu = f.GetReal("eval.gate_nu");
    if (std::find(c.eval_nus.begin(), c.eval_nus.end(), c.gate_nu) == c.eval_nus.end()) {
      throw ConfigError("eval.gate_nu: must be one of eval.nu");
    }
  }
  if (f.Has("hist.t_inf")) {
    c.hist_t_inf = f.GetRealList("hist.t_inf");
    if (c.hist_t_inf.empty()) throw ConfigError("hist.t_inf: empty list");
    for (double t : c.hist_t_inf) RequirePositive("hist.t_inf", t);
    c.hist_bins = static_cast<int>(f.GetInt("hist.bins"));
    c.hist_samples = static_cast<int>(f.GetInt("hist.samples"));
    if (c.hist_bins < 1) throw ConfigError("hist.bins: must be >= 1");
    if (c.hist_samples < 1) throw ConfigError("hist.samples: must be >= 1");
  }
  if (f.Has("sparsity.images")) {
    c.sparsity_images = static_cast<int>(f.GetInt("sparsity.images"));
    c.sparsity_eps = f.GetReal("sparsity.eps");
    if (c.sparsity_images < 1) throw ConfigError("sparsity.images: must be >= 1");
    RequirePositive("sparsity.eps", c.sparsity_eps);
  }
  if (f.Has("gradcheck.texp_instances")) {
    c.gradcheck_texp_instances = static_cast<int>(f.GetInt("gradcheck.texp_instances"));
    c.gradcheck_layer_instances = static_cast<int>(f.GetInt("gradcheck.layer_instances"));
    if (c.gradcheck_texp_instances < 1 || c.gradcheck_layer_instances < 1) {
      throw ConfigError("gradcheck: instance counts must be >= 1");
    }
  }
  if (f.Has("sweep.mode")) {
    c.sweep_mode = f.GetString("sweep.mode");
    if (c.sweep_mode != "axes" && c.sweep_mode != "grid") {
      throw ConfigError("sweep.mode: expected axes|grid, got '" + c.sweep_mode + "'");
    }
    c.sweep_alpha = f.GetRealList("sweep.alpha");
    c.sweep_t_inf_scale = f.GetRealList("sweep.t_inf_scale");
    c.sweep_t_ratio = f.GetRealList("sweep.t_ratio");
    for (double a : c.sweep_alpha) {
      if (!(a >= 0.0)) throw ConfigError("sweep.alpha: values must be >= 0");
    }
    for (double s : c.sweep_t_inf_scale) RequirePositive("sweep.t_inf_scale", s);
    for (double r : c.sweep_t_ratio) RequirePositive("sweep.t_ratio", r);
  }
  return c;
}

TexpLayerConfig ExperimentConfig::LayerFor(double scale, double ratio,
                                           double alpha) const {
  TexpLayerConfig layer = classifier.layer;
  const double root_d = std::sqrt(static_cast<double>(classifier.patch_dim()));
  layer.t_inf = scale / root_d;
  layer.t_train = ratio * layer.t_inf;
  layer.alpha = alpha;
  return layer;
}

std::string ExperimentConfig::Hash() const {
  ConfigFile hashed;
  for (const auto& [key, value] : resolved.values()) {
    if (key != "output.dir") hashed.Set(key, value);
  }
  return "fnv1a64:" + Hex(Fnv1a64(hashed.Canonical()));
}

std::vector<std::uint64_t> ExperimentConfig::Seeds() const {
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < num_seeds; ++k) seeds.push_back(seed + static_cast<std::uint64_t>(k));
  return seeds;
}

bool RunArtifact::AllGatesPass() const {
  return std::all_of(gates.begin(), gates.end(),
                     [](const auto& gate) { return gate.second; });
}

std::string FileChecksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream bytes;
  bytes << in.rdbuf();
  return "fnv1a64:" + Hex(Fnv1a64(bytes.str()));
}

int RequiredPasses(int num_seeds) { return num_seeds - num_seeds / 5; }

namespace {

class ArtifactWriter {
 public:
  ArtifactWriter(const ExperimentConfig& config, RunArtifact& artifact)
      : config_(config), artifact_(artifact) {}

  std::string SeedPrefix(std::uint64_t seed) const {
    return config_.num_seeds > 1 ? "seed_" + std::to_string(seed) + "/" : "";
  }

  void Emit(const std::string& relative, const std::vector<CsvRecord>& records,
            std::string_view schema) {
    const std::string path = Prepare(relative);
    EmitCsv(records, schema, path);
    Record(relative, path);
  }

  void EmitDataset(const std::string& relative,
                   const std::vector<LabeledSample>& samples,
                   const std::string& spec_hash) {
    const std::string path = Prepare(relative);
    WriteDatasetCsv(samples, spec_hash, path);
    Record(relative, path);
  }

 private:
  std::string Prepare(const std::string& relative) {
    const fs::path path = fs::path(config_.output_dir) / relative;
    fs::create_directories(path.parent_path());
    return path.string();
  }

  void Record(const std::string& relative, const std::string& path) {
    artifact_.files[relative] = FileChecksum(path);
  }

  const ExperimentConfig& config_;
  RunArtifact& artifact_;
};

void GateAcrossSeeds(RunArtifact& artifact, const std::string& gate, int passes,
                     int num_seeds) {
  artifact.metrics[gate + ".seeds_passed"] = passes;
  artifact.gates[gate] = passes >= RequiredPasses(num_seeds);
}

void EmitToyLog(ArtifactWriter& writer, const std::string& prefix,
                const TrainLog& log) {
  std::vector<CsvRecord> projections;
  for (const TrainRecord& r : log.records) {
    for (Eigen::Index i = 0; i < r.projections.rows(); ++i) {
      projections.push_back({std::int64_t{r.step}, std::int64_t{i}, r.projections(i, 0),
                             r.projections(i, 1), r.orth_fraction[i]});
    }
  }
  writer.Emit(prefix + "projections.csv", projections, "projections");
  std::vector<CsvRecord> objective;
  for (size_t k = 0; k < log.objective.size(); ++k) {
    objective.push_back({static_cast<std::int64_t>(k), log.objective[k]});
  }
  writer.Emit(prefix + "objective.csv", objective, "objective");
}

// Cosine of each neuron to signal s, for neurons outside the useful set.
double MaxSpuriousCosine(const AlignmentReport& report, size_t s) {
  double worst = -1.0;
  for (const auto& n : report.neurons) {
    if (!n.useful) worst = std::max(worst, n.signal_cosines[s]);
  }
  return worst;
}

bool AnySpurious(const AlignmentReport& report) {
  return std::any_of(report.neurons.begin(), report.neurons.end(),
                     [](const NeuronAlignment& n) { return !n.useful; });
}

void RunToy(const ExperimentConfig& c, ArtifactWriter& writer, RunArtifact& art) {
  const bool model1 = c.toy.kind == ToyModelKind::kModel1;
  int converged = 0;
  int attenuated = 0;
  int orthogonal_gone = 0;
  for (const std::uint64_t seed : c.Seeds()) {
    const std::string prefix = writer.SeedPrefix(seed);
    const std::string tag = "seed_" + std::to_string(seed) + ".";
    const UnsupervisedResult run =
        TrainUnsupervised(c.toy, c.toy_filters, c.toy_tilt, c.train, SeededRng(seed));
    EmitToyLog(writer, prefix, run.log);
    const AlignmentReport report = ComputeAlignment(run.bank, c.toy.Signals());
    art.metrics[tag + "final_objective"] = run.log.objective.back();
    art.metrics[tag + "useful_neurons"] = report.NumUseful();

    if (model1) {
      const double cos1 = report.MaxCosine(0);
      const double cos2 = report.MaxCosine(1);
      art.metrics[tag + "max_cosine_s1"] = cos1;
      art.metrics[tag + "max_cosine_s2"] = cos2;
      if (cos1 >= 0.95 && cos2 >= 0.95) ++converged;
      const double spur1 = MaxSpuriousCosine(report, 0);
      const double spur2 = MaxSpuriousCosine(report, 1);
      if (AnySpurious(report)) {
        art.metrics[tag + "max_spurious_s1"] = spur1;
        art.metrics[tag + "max_spurious_s2"] = spur2;
      }
      const bool ok = c.train.balanced
                          ? spur1 <= 0.05 && spur2 <= 0.05
                          : spur1 <= 0.5 * cos1 && spur2 <= 0.5 * cos2;
      if (ok) ++attenuated;
    } else {
      double worst_orth = 0.0;
      int closer_e1 = 0;
      int closer_e2 = 0;
      for (const auto& n : report.neurons) {
        worst_orth = std::max(worst_orth, n.orth_fraction);
        const double c1 = std::abs(n.signal_cosines[0]);
        const double c2 = std::abs(n.signal_cosines[1]);
        if (c1 > c2) ++closer_e1;
        if (c2 > c1) ++closer_e2;
      }
      art.metrics[tag + "max_orth_fraction"] = worst_orth;
      art.metrics[tag + "closer_to_e1"] = closer_e1;
      art.metrics[tag + "closer_to_e2"] = closer_e2;
      if (worst_orth < 0.05 && closer_e1 > closer_e2) ++orthogonal_gone;
    }
  }
  if (model1 && c.train.balanced) {
    // One neuron can settle between the two signals and win both; the
    // balanced run is judged on its losers only.
    art.metrics["signal-alignment.seeds_passed"] = converged;
    GateAcrossSeeds(art, "spurious-rotated-away", attenuated, c.num_seeds);
  } else if (model1) {
    GateAcrossSeeds(art, "signal-alignment", converged, c.num_seeds);
    GateAcrossSeeds(art, "spurious-attenuated", attenuated, c.num_seeds);
  } else {
    GateAcrossSeeds(art, "orthogonal-energy", orthogonal_gone, c.num_seeds);
  }
}

void RunHistograms(const ExperimentConfig& c, ArtifactWriter& writer,
                   RunArtifact& art) {
  std::vector<double> tilts = c.hist_t_inf;
  std::sort(tilts.begin(), tilts.end());
  int polarized = 0;
  for (const std::uint64_t seed : c.Seeds()) {
    const std::string prefix = writer.SeedPrefix(seed);
    const std::string tag = "seed_" + std::to_string(seed) + ".";
    const SeededRng root(seed);
    const FilterBank<double> bank =
        TrainUnsupervised(c.toy, c.toy_filters, c.toy_tilt, c.train, root).bank;
    SeededRng sample_stream = root.Substream("histogram");
    std::vector<Vector<double>> activations;
    std::vector<double> flat_activations;
    for (int n = 0; n < c.hist_samples; ++n) {
      activations.push_back(NormalizedActivations(c.toy.Sample(sample_stream), bank));
      for (double a : activations.back()) flat_activations.push_back(a);
    }
    const auto emit = [&](const std::string& name, const Histogram& h) {
      std::vector<CsvRecord> rows;
      for (size_t b = 0; b < h.counts.size(); ++b) {
        rows.push_back({h.BinLo(b), h.BinHi(b), h.counts[b]});
      }
      writer.Emit(prefix + name, rows, "histogram");
    };
    emit("histogram_a.csv", ActivationHistogram(flat_activations, c.hist_bins));

    bool decreasing = true;
    double previous = 0.0;
    for (size_t k = 0; k < tilts.size(); ++k) {
      std::vector<double> values;
      for (const auto& a : activations) {
        for (double p : TiltedSoftmax(a, tilts[k])) values.push_back(p);
      }
      const Histogram h = ActivationHistogram(values, c.hist_bins);
      emit("histogram_p_tinf_" + ShortReal(tilts[k]) + ".csv", h);
      art.metrics[tag + "entropy_tinf_" + ShortReal(tilts[k])] = h.entropy;
      if (k > 0 && !(h.entropy < previous)) decreasing = false;
      previous = h.entropy;
    }
    if (decreasing) ++polarized;
  }
  art.metrics["polarization.seeds_passed"] = polarized;
  art.gates["polarization"] = polarized == c.num_seeds;
}

std::vector<ImageTensor> BuildTemplates(const ExperimentConfig& c, const SeededRng& rng) {
  if (c.templates == "stripes") {
    return StripeTemplates(c.classifier.height, c.classifier.width, c.template_amplitude);
  }
  return OrthogonalBinaryTemplates(c.classifier.num_classes, c.classifier.height,
                                   c.classifier.width, c.classifier.channels,
                                   rng.Substream("templates"), c.template_amplitude);
}

LabeledToySpec DataSpecFor(const ExperimentConfig& c, const SeededRng& rng) {
  LabeledToySpec spec = c.data;
  spec.templates = BuildTemplates(c, rng);
  return spec;
}

void RunSparsity(const ExperimentConfig& c, ArtifactWriter& writer, RunArtifact& art) {
  const SeededRng root(c.seed);
  LabeledToySpec spec = DataSpecFor(c, root);
  spec.train_per_class = 1;
  spec.test_per_class =
      (c.sparsity_images + spec.num_classes - 1) / spec.num_classes;
  const LabeledDataset data = MakeLabeledToy(spec, root.Substream("data"));
  SeededRng filter_stream = root.Substream("filters");
  const FilterBank<double> bank = RandomUnitBank(
      c.classifier.layer.num_filters, c.classifier.patch_dim(), filter_stream);

  std::vector<CsvRecord> rows;
  const auto add_rows = [&](const std::string& view, std::int64_t image,
                            const SparsityReport& r) {
    rows.push_back({view + ".overall", image, r.overall});
    for (Eigen::Index l = 0; l < r.channel_fraction.size(); ++l) {
      rows.push_back({view + ".channel", image * r.channel_fraction.size() + l,
                      r.channel_fraction[l]});
    }
    for (Eigen::Index i = 0; i < r.spatial_fraction.size(); ++i) {
      rows.push_back({view + ".spatial", image * r.spatial_fraction.size() + i,
                      r.spatial_fraction[i]});
    }
  };
  double texp_total = 0.0, p_total = 0.0, relu_total = 0.0;
  bool o_below_p = true;
  for (int n = 0; n < c.sparsity_images; ++n) {
    const PatchGrid patches =
        ExtractPatches(data.test[static_cast<size_t>(n)].image, c.classifier.layer.geometry);
    const ActivationMap map = TexpLayerForward(patches, bank, c.classifier.layer);
    const SparsityReport texp = ComputeSparsity(map.o, c.sparsity_eps);
    const SparsityReport p = ComputeSparsity(map.p, c.sparsity_eps);
    const SparsityReport relu = ComputeSparsity(map.y.cwiseMax(0.0), c.sparsity_eps);
    add_rows("texp", n, texp);
    add_rows("relu", n, relu);
    texp_total += texp.overall;
    p_total += p.overall;
    relu_total += relu.overall;
    o_below_p = o_below_p && texp.overall <= p.overall;
  }
  writer.Emit("sparsity.csv", rows, "sparsity");
  const double inv_n = 1.0 / c.sparsity_images;
  art.metrics["texp.overall_mean"] = texp_total * inv_n;
  art.metrics["texp_p.overall_mean"] = p_total * inv_n;
  art.metrics["relu.overall_mean"] = relu_total * inv_n;
  art.gates["texp-sparser-than-relu"] = texp_total < relu_total;
  art.gates["threshold-never-densifies"] = o_below_p;
}

void RunGradCheck(const ExperimentConfig& c, ArtifactWriter& writer, RunArtifact& art) {
  const std::vector<GradCheckResult> results = RunAllGradientChecks(
      c.gradcheck_texp_instances, c.gradcheck_layer_instances, SeededRng(c.seed));
  std::vector<CsvRecord> rows;
  for (const auto& r : results) {
    rows.push_back({r.check, std::int64_t{r.instances}, r.max_rel_error, r.tolerance,
                    std::int64_t{r.pass() ? 1 : 0}});
    art.metrics[r.check + ".max_rel_error"] = r.max_rel_error;
    art.gates[r.check] = r.pass();
  }
  writer.Emit("gradcheck.csv", rows, "gradcheck");
}

ClassifierConfig WithLayer(const ClassifierConfig& base, FirstLayerKind kind,
                           const TexpLayerConfig& layer) {
  ClassifierConfig cfg = base;
  cfg.first_layer = kind;
  cfg.layer = layer;
  return cfg;
}

void RunRobustness(const ExperimentConfig& c, ArtifactWriter& writer, RunArtifact& art) {
  const auto gate_level = static_cast<size_t>(
      std::find(c.eval_nus.begin(), c.eval_nus.end(), c.gate_nu) - c.eval_nus.begin());
  const auto clean_level = static_cast<size_t>(
      std::find(c.eval_nus.begin(), c.eval_nus.end(), 0.0) - c.eval_nus.begin());
  struct Family {
    const char* name;
    FirstLayerKind kind;
    std::vector<CsvRecord> rows;
    double drop_sum = 0.0;
    double min_clean = 1.0;
  };
  Family families[] = {{"texp", FirstLayerKind::kTexp, {}},
                       {"baseline", FirstLayerKind::kBaseline, {}}};
  bool first = true;
  for (const std::uint64_t seed : c.Seeds()) {
    const SeededRng root(seed);
    const LabeledToySpec spec = DataSpecFor(c, root);
    const LabeledDataset data = MakeLabeledToy(spec, root.Substream("data"));
    if (first) {
      const std::string hash = LabeledToySpecHash(spec);
      writer.EmitDataset("dataset_train.csv", data.train, hash);
      writer.EmitDataset("dataset_test.csv", data.test, hash);
      first = false;
    }
    for (Family& fam : families) {
      const ClassifierConfig cfg = WithLayer(c.classifier, fam.kind, c.classifier.layer);
      const SupervisedResult trained =
          TrainSupervised(data, cfg, c.train, root.Substream("train"));
      const std::vector<double> acc =
          EvaluateAccuracy(trained.model, data.test, c.eval_nus, root.Substream("eval"));
      for (size_t k = 0; k < acc.size(); ++k) {
        fam.rows.push_back({c.eval_nus[k], static_cast<std::int64_t>(seed), acc[k]});
      }
      fam.drop_sum += acc[clean_level] - acc[gate_level];
      fam.min_clean = std::min(fam.min_clean, acc[clean_level]);
      art.metrics[std::string(fam.name) + ".seed_" + std::to_string(seed) +
                  ".final_loss"] = trained.log.loss.back();
    }
  }
  for (Family& fam : families) {
    writer.Emit(std::string("robustness_") + fam.name + ".csv", fam.rows, "robustness");
    art.metrics[std::string(fam.name) + ".mean_drop"] = fam.drop_sum / c.num_seeds;
    art.metrics[std::string(fam.name) + ".min_clean_accuracy"] = fam.min_clean;
  }
  art.gates["robustness-direction"] = families[0].drop_sum < families[1].drop_sum;
  art.gates["clean-accuracy"] =
      families[0].min_clean >= 0.9 && families[1].min_clean >= 0.9;
}

void RunSweep(const ExperimentConfig& c, ArtifactWriter& writer, RunArtifact& art) {
  using Point = std::tuple<double, double, double>;  // alpha, t_inf scale, ratio
  const double alpha0 = c.classifier.layer.alpha;
  std::vector<Point> points;
  if (c.sweep_mode == "grid") {
    for (double a : c.sweep_alpha) {
      for (double s : c.sweep_t_inf_scale) {
        for (double r : c.sweep_t_ratio) points.emplace_back(a, s, r);
      }
    }
  } else {
    for (double a : c.sweep_alpha) points.emplace_back(a, c.t_inf_scale, c.t_ratio);
    for (double s : c.sweep_t_inf_scale) points.emplace_back(alpha0, s, c.t_ratio);
    for (double r : c.sweep_t_ratio) points.emplace_back(alpha0, c.t_inf_scale, r);
  }

  const SeededRng root(c.seed);
  const LabeledDataset data = MakeLabeledToy(DataSpecFor(c, root), root.Substream("data"));
  std::vector<CsvRecord> rows(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<size_t> next{0};
  const auto worker = [&] {
    for (size_t k = next++; k < points.size(); k = next++) {
      try {
        const auto [alpha, scale, ratio] = points[k];
        const TexpLayerConfig layer = c.LayerFor(scale, ratio, alpha);
        const ClassifierConfig cfg = WithLayer(c.classifier, FirstLayerKind::kTexp, layer);
        const SupervisedResult trained =
            TrainSupervised(data, cfg, c.train, root.Substream("train"));
        const std::vector<double> acc = EvaluateAccuracy(trained.model, data.test,
                                                         c.eval_nus, root.Substream("eval"));
        double clean = 0.0, robust_sum = 0.0, robust_min = 1.0;
        int robust_levels = 0;
        for (size_t j = 0; j < acc.size(); ++j) {
          if (c.eval_nus[j] == 0.0) {
            clean = acc[j];
          } else {
            robust_sum += acc[j];
            robust_min = std::min(robust_min, acc[j]);
            ++robust_levels;
          }
        }
        const double robust_mean = robust_levels > 0 ? robust_sum / robust_levels : clean;
        if (robust_levels == 0) robust_min = clean;
        rows[k] = {alpha, layer.t_inf, ratio, clean, robust_mean, robust_min};
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int extra = std::min<int>(c.threads, static_cast<int>(points.size())) - 1;
  for (int k = 0; k < extra; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  writer.Emit("sweep.csv", rows, "sweep");
  art.metrics["grid_points"] = static_cast<double>(points.size());
  double best_clean = 0.0;
  for (const auto& r : rows) best_clean = std::max(best_clean, std::get<double>(r[3]));
  art.metrics["best_clean_accuracy"] = best_clean;
  bool finite = true;
  for (const auto& r : rows) {
    for (const auto& v : r) finite = finite && std::isfinite(std::get<double>(v));
  }
  art.gates["sweep-finite"] = finite;
}

void WriteManifest(const ExperimentConfig& c, const RunArtifact& art) {
  nlohmann::json manifest;
  manifest["experiment"] = c.name;
  manifest["seed"] = c.seed;
  manifest["config_hash"] = c.Hash();
  manifest["version.texp"] = kVersion;
  manifest["version.eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                              std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION);
  manifest["wall_time_s"] = art.wall_seconds;
  for (const auto& [key, value] : c.resolved.values()) manifest["config." + key] = value;
  for (const auto& [file, sum] : art.files) manifest["file." + file] = sum;
  for (const auto& [name, value] : art.metrics) manifest["metric." + name] = value;
  for (const auto& [name, pass] : art.gates) manifest["gate." + name] = pass;
  manifest["gates_pass"] = art.AllGatesPass();
  const fs::path path = fs::path(c.output_dir) / "manifest.json";
  std::ofstream out(path);
  out << manifest.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

RunArtifact RunExperiment(const ExperimentConfig& config) {
  if (!IsRegisteredExperiment(config.name)) {
    throw ConfigError("experiment: unknown experiment '" + config.name + "'");
  }
  const auto start = std::chrono::steady_clock::now();
  RunArtifact artifact;
  artifact.output_dir = config.output_dir;
  fs::create_directories(config.output_dir);
  ArtifactWriter writer(config, artifact);

  const std::string& name = config.name;
  if (IsToy(name) && name != "histograms") {
    RunToy(config, writer, artifact);
  } else if (name == "histograms") {
    RunHistograms(config, writer, artifact);
  } else if (name == "sparsity") {
    RunSparsity(config, writer, artifact);
  } else if (name == "grad-check") {
    RunGradCheck(config, writer, artifact);
  } else if (name == "supervised-robustness") {
    RunRobustness(config, writer, artifact);
  } else {
    RunSweep(config, writer, artifact);
  }
  artifact.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  WriteManifest(config, artifact);
  return artifact;
}

}  // namespace texp
