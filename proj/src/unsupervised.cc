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

#include "texp/unsupervised.h"

#include <sstream>

namespace texp {
namespace {

constexpr double kMinFilterNorm = 1e-6;
constexpr double kMaxFilterNorm = 1e6;

TrainRecord MakeRecord(int step, double objective, const FilterBank<double>& bank,
                       const GradientBank<double>& grad) {
  TrainRecord r;
  r.step = step;
  r.objective = objective;
  r.projections = bank.leftCols(2);
  const Eigen::VectorXd energy = bank.rowwise().squaredNorm();
  r.orth_fraction =
      (1.0 - (r.projections.rowwise().squaredNorm().array() / energy.array()))
          .cwiseMax(0.0);
  r.grad_norms = grad.rowwise().norm();
  return r;
}

void CheckNorms(const FilterBank<double>& bank, int step) {
  const Eigen::VectorXd norms = bank.rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (!(norms[i] >= kMinFilterNorm && norms[i] <= kMaxFilterNorm)) {
      std::ostringstream msg;
      msg << "filter " << i << " norm " << norms[i] << " left [" << kMinFilterNorm
          << ", " << kMaxFilterNorm << "] at step " << step;
      throw TrainingDiverged(msg.str());
    }
  }
}

}  // namespace

Vector<double> ToyModelSpec::Sample(SeededRng& rng) const {
  return kind == ToyModelKind::kModel1 ? SampleModel1(model1, rng)
                                       : SampleModel2(model2, rng);
}

std::vector<Vector<double>> ToyModelSpec::Signals() const {
  if (kind == ToyModelKind::kModel1) return {model1.s1, model1.s2};
  Vector<double> e1 = Vector<double>::Zero(model2.d);
  Vector<double> e2 = Vector<double>::Zero(model2.d);
  e1[0] = 1.0;
  e2[1] = 1.0;
  return {e1, e2};
}

void ToyModelSpec::Validate() const {
  if (kind == ToyModelKind::kModel1) {
    model1.Validate();
  } else {
    model2.Validate();
  }
}

FilterBank<double> RandomUnitBank(int num_filters, int dim, SeededRng& rng) {
  if (num_filters < 1 || dim < 1) throw std::invalid_argument("empty bank shape");
  FilterBank<double> bank(num_filters, dim);
  for (int i = 0; i < num_filters; ++i) {
    for (int j = 0; j < dim; ++j) bank(i, j) = rng.Normal();
  }
  bank.rowwise().normalize();
  return bank;
}

GradientBank<double> UnsupervisedGradient(const Vector<double>& x,
                                          const FilterBank<double>& bank,
                                          double tilt, ObjectiveForm form,
                                          bool balanced) {
  GradientBank<double> grad =
      balanced ? BalancedTexpGrad(x, bank, tilt) : TexpGrad(x, bank, tilt);
  if (form == ObjectiveForm::kScaled) grad /= tilt;
  return grad;
}

double UnsupervisedObjective(const Vector<double>& x,
                             const FilterBank<double>& bank, double tilt,
                             ObjectiveForm form, bool balanced) {
  const Vector<double> a = NormalizedActivations(x, bank);
  const double value =
      balanced ? BalancedTexpObjective(a, tilt) : TexpObjective(a, tilt);
  return form == ObjectiveForm::kScaled ? value / tilt : value;
}

UnsupervisedResult TrainUnsupervised(const ToyModelSpec& model, int num_filters,
                                     double tilt, const TrainConfig& train,
                                     const SeededRng& rng) {
  model.Validate();
  train.Validate();
  if (num_filters < 1) throw std::invalid_argument("need at least one filter");
  internal::RequirePositiveTilt(tilt);

  SeededRng init_stream = rng.Substream("init");
  SeededRng data_stream = rng.Substream("data");
  UnsupervisedResult result;
  result.bank = RandomUnitBank(num_filters, model.dim(), init_stream);
  result.log.snapshots.push_back(result.bank);
  result.log.objective.reserve(train.steps);

  OptimizerState state;
  for (int step = 0; step < train.steps; ++step) {
    const Vector<double> x = model.Sample(data_stream);
    const double objective = UnsupervisedObjective(
        x, result.bank, tilt, train.objective_form, train.balanced);
    const GradientBank<double> grad = UnsupervisedGradient(
        x, result.bank, tilt, train.objective_form, train.balanced);
    result.log.objective.push_back(objective);
    if (step % train.log_every == 0) {
      result.log.records.push_back(MakeRecord(step, objective, result.bank, grad));
    }
    OptimizerStep(result.bank, grad, train.schedule, train.optimizer,
                  StepDirection::kAscent, state);
    CheckNorms(result.bank, step);
  }
  const Vector<double> x = model.Sample(data_stream);
  result.log.records.push_back(MakeRecord(
      train.steps,
      UnsupervisedObjective(x, result.bank, tilt, train.objective_form,
                            train.balanced),
      result.bank,
      UnsupervisedGradient(x, result.bank, tilt, train.objective_form,
                           train.balanced)));
  result.log.snapshots.push_back(result.bank);
  return result;
}

}  // namespace texp
