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

// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Runs the registered experiments at their default configuration.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "texp/experiments.h"
#include "texp/gradcheck.h"
#include "texp/rng.h"
#include "texp/texp_math.h"

namespace {

using namespace texp;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buffer[256];
  std::snprintf(buffer, sizeof(buffer), format, a, b, c);
  return buffer;
}

std::map<std::string, RunArtifact>& FirstRuns() {
  static std::map<std::string, RunArtifact> runs;
  return runs;
}

RunArtifact Run(const std::string& name, const std::string& tag) {
  ConfigFile cfg;
  cfg.Set("experiment", name);
  cfg.Set("output.dir", (fs::path("acceptance_out") / tag / name).string());
  return RunExperiment(ExperimentConfig::FromConfig(cfg));
}

const RunArtifact& FirstRun(const std::string& name) {
  auto it = FirstRuns().find(name);
  if (it == FirstRuns().end()) it = FirstRuns().emplace(name, Run(name, "first")).first;
  return it->second;
}

std::string GateSummary(const RunArtifact& art) {
  std::string out;
  for (const auto& [gate, pass] : art.gates) {
    if (!out.empty()) out += ", ";
    out += gate + (pass ? "=pass" : "=fail");
  }
  return out;
}

double Metric(const RunArtifact& art, const std::string& key) {
  const auto it = art.metrics.find(key);
  return it == art.metrics.end() ? std::nan("") : it->second;
}

Outcome GradientCorrectness() {
  const auto plain = CheckTexpGradient(100, false, SeededRng(1).Substream("texp-grad"));
  const auto balanced =
      CheckTexpGradient(100, true, SeededRng(1).Substream("balanced-texp-grad"));
  return {plain.pass() && balanced.pass(),
          Fmt("max rel error %.3g (plain), %.3g (balanced), tolerance 1e-5",
              plain.max_rel_error, balanced.max_rel_error)};
}

Outcome LayerBackward() {
  const auto frozen = CheckJointLossGradient(20, JointLossCase::kTexpFrozenMask,
                                             SeededRng(1).Substream("frozen"));
  const auto open = CheckJointLossGradient(20, JointLossCase::kTexpNoThreshold,
                                           SeededRng(1).Substream("no-threshold"));
  return {frozen.pass() && open.pass(),
          Fmt("max rel error %.3g (frozen mask), %.3g (c = -10), tolerance 1e-4",
              frozen.max_rel_error, open.max_rel_error)};
}

Outcome SoftmaxInvariants() {
  SeededRng rng(3);
  double worst_sum = 0.0, worst_shift = 0.0;
  for (int row = 0; row < 10000; ++row) {
    const int m = 2 + static_cast<int>(rng.UniformInt(15));
    Vector<double> a(m);
    for (auto& v : a) v = 5.0 * rng.Normal();
    const double t = std::pow(10.0, 2.0 * rng.Uniform() - 1.0);
    const double shift = 20.0 * rng.Uniform() - 10.0;
    const Vector<double> p = TiltedSoftmax(a, t);
    const Vector<double> q = TiltedSoftmax((a.array() + shift).matrix(), t);
    worst_sum = std::max(worst_sum, std::abs(p.sum() - 1.0));
    worst_shift = std::max(worst_shift, (p - q).cwiseAbs().maxCoeff());
  }
  return {worst_sum <= 1e-12 && worst_shift <= 1e-12,
          Fmt("max |sum - 1| %.3g, max shift deviation %.3g", worst_sum, worst_shift)};
}

Outcome Model1Convergence() {
  const RunArtifact& plain = FirstRun("toy1");
  const RunArtifact& balanced = FirstRun("toy1-balanced");
  const bool pass = plain.gates.at("signal-alignment") &&
                    balanced.gates.at("spurious-rotated-away");
  std::ostringstream os;
  os << "toy1 aligned seeds " << Metric(plain, "signal-alignment.seeds_passed")
     << "/5; balanced spurious seeds "
     << Metric(balanced, "spurious-rotated-away.seeds_passed")
     << "/5 (balanced aligned seeds " << Metric(balanced, "signal-alignment.seeds_passed")
     << "/5, reported only)";
  return {pass, os.str()};
}

Outcome Model2Convergence() {
  const RunArtifact& art = FirstRun("toy2");
  std::ostringstream os;
  os << "seeds passing " << Metric(art, "orthogonal-energy.seeds_passed") << "/5";
  return {art.AllGatesPass(), os.str()};
}

Outcome Polarization() {
  const RunArtifact& art = FirstRun("histograms");
  std::ostringstream os;
  os << "seeds with lower entropy at t_inf = 3 " << Metric(art, "polarization.seeds_passed")
     << "/5";
  return {art.AllGatesPass(), os.str()};
}

Outcome Sparsity() {
  const RunArtifact& art = FirstRun("sparsity");
  return {art.gates.at("texp-sparser-than-relu"),
          Fmt("nonzero fraction %.4f (TEXP) vs %.4f (ReLU)",
              Metric(art, "texp.overall_mean"), Metric(art, "relu.overall_mean"))};
}

Outcome Sensitivity() {
  bool monotone = true;
  for (double t : {0.5, 1.0, 2.0, 5.0}) {
    double previous = SigmoidSensitivity(0.0, t);
    for (int k = 1; k < 1000; ++k) {
      const double value = SigmoidSensitivity(20.0 * k / 999.0, t);
      if (value > previous) monotone = false;
      previous = value;
    }
  }
  return {monotone, "1000-point grid on [0, 20] for t in {0.5, 1, 2, 5}"};
}

Outcome Robustness() {
  const RunArtifact& art = FirstRun("supervised-robustness");
  return {art.AllGatesPass(),
          Fmt("mean drop %.4f (TEXP) vs %.4f (baseline); min clean %.3f",
              Metric(art, "texp.mean_drop"), Metric(art, "baseline.mean_drop"),
              std::min(Metric(art, "texp.min_clean_accuracy"),
                       Metric(art, "baseline.min_clean_accuracy")))};
}

Outcome Determinism() {
  int files = 0, mismatched = 0;
  for (const auto& info : RegisteredExperiments()) {
    const RunArtifact& first = FirstRun(info.name);
    const RunArtifact second = Run(info.name, "second");
    if (first.files.size() != second.files.size()) ++mismatched;
    for (const auto& [rel, sum] : first.files) {
      ++files;
      const auto it = second.files.find(rel);
      if (it == second.files.end() || it->second != sum) ++mismatched;
    }
  }
  std::ostringstream os;
  os << files << " CSV artifacts over " << RegisteredExperiments().size()
     << " experiments, " << mismatched << " mismatched";
  return {files > 0 && mismatched == 0, os.str()};
}

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;  // 0 means unbounded
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", 10.0, GradientCorrectness},
      {2, "layer backward correctness", 30.0, LayerBackward},
      {3, "softmax invariants", 5.0, SoftmaxInvariants},
      {4, "model 1 convergence", 300.0, Model1Convergence},
      {5, "model 2 convergence", 300.0, Model2Convergence},
      {6, "polarization", 10.0, Polarization},
      {7, "sparsity", 30.0, Sparsity},
      {8, "sensitivity monotonicity", 0.0, Sensitivity},
      {9, "robustness direction", 300.0, Robustness},
      {10, "determinism", 0.0, Determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && seconds > c.budget_seconds) {
      outcome.pass = false;
      outcome.detail += Fmt(" [over budget of %.0f s]", c.budget_seconds);
    }
    failures += !outcome.pass;
    std::printf("%s criterion %d: %s (%s; %.2f s)\n", outcome.pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
