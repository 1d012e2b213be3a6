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

#ifndef TEXP_UNSUPERVISED_H_
#define TEXP_UNSUPERVISED_H_

#include <stdexcept>
#include <string>
#include <vector>

#include "texp/data_models.h"
#include "texp/optimizer.h"
#include "texp/rng.h"
#include "texp/texp_math.h"

namespace texp {

enum class ToyModelKind { kModel1, kModel2 };

struct ToyModelSpec {
  ToyModelKind kind = ToyModelKind::kModel1;
  Model1Spec model1 = Model1Spec::Defaults();
  Model2Spec model2;

  int dim() const { return kind == ToyModelKind::kModel1 ? model1.d : model2.d; }
  Vector<double> Sample(SeededRng& rng) const;
  // Model 1: {s1, s2}. Model 2: {e1, e2}.
  std::vector<Vector<double>> Signals() const;
  void Validate() const;
};

// Snapshot of the bank geometry at one logged step.
struct TrainRecord {
  int step = 0;
  double objective = 0.0;
  Eigen::MatrixXd projections;    // M x 2: components along e1, e2
  Eigen::VectorXd orth_fraction;  // 1 - (w_1^2 + w_2^2) / ||w||^2
  Eigen::VectorXd grad_norms;
};

struct TrainLog {
  std::vector<double> objective;  // every step, evaluated before the update
  std::vector<double> loss;       // supervised runs only
  std::vector<TrainRecord> records;
  std::vector<FilterBank<double>> snapshots;  // initial and final banks
};

struct UnsupervisedResult {
  FilterBank<double> bank;
  TrainLog log;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// i.i.d. standard normal rows, each scaled to unit norm.
FilterBank<double> RandomUnitBank(int num_filters, int dim, SeededRng& rng);

// Per-sample TEXP gradient ascent on a toy model. Filters are normalized once
// at initialization and never again. `tilt` is the training tilt t.
UnsupervisedResult TrainUnsupervised(const ToyModelSpec& model, int num_filters,
                                     double tilt, const TrainConfig& train,
                                     const SeededRng& rng);

// Ascent direction used by TrainUnsupervised for one input.
GradientBank<double> UnsupervisedGradient(const Vector<double>& x,
                                          const FilterBank<double>& bank,
                                          double tilt, ObjectiveForm form,
                                          bool balanced);
double UnsupervisedObjective(const Vector<double>& x,
                             const FilterBank<double>& bank, double tilt,
                             ObjectiveForm form, bool balanced);

}  // namespace texp

#endif  // TEXP_UNSUPERVISED_H_
