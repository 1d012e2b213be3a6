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

#ifndef TEXP_OPTIMIZER_H_
#define TEXP_OPTIMIZER_H_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace texp {

enum class OptimizerKind { kPlain, kMomentum, kAdam };
enum class StepDirection { kDescent, kAscent };
// Unscaled: log-mean-exp of t * a. Scaled: the same divided by t.
enum class ObjectiveForm { kUnscaled, kScaled };

// Piecewise-constant rate: multiplied by `decay` at each milestone step.
struct LearningRateSchedule {
  double initial = 0.05;
  std::vector<int> milestones;
  double decay = 0.1;

  double RateAt(std::int64_t step) const;
};

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kPlain;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  LearningRateSchedule schedule;
  int steps = 5000;
  int batch_size = 1;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  ObjectiveForm objective_form = ObjectiveForm::kUnscaled;
  bool balanced = false;
  // Stride between detailed TrainLog records; the scalar objective is kept
  // for every step regardless.
  int log_every = 1;

  void Validate() const;
};

struct OptimizerState {
  Eigen::MatrixXd velocity;
  Eigen::MatrixXd first_moment;
  Eigen::MatrixXd second_moment;
  std::int64_t step = 0;
};

// One update of `params` from `grads` at rate schedule.RateAt(state.step),
// then advances state.step.
void OptimizerStep(Eigen::Ref<Eigen::MatrixXd> params,
                   const Eigen::Ref<const Eigen::MatrixXd>& grads,
                   const LearningRateSchedule& schedule,
                   const OptimizerConfig& config, StepDirection direction,
                   OptimizerState& state);

}  // namespace texp

#endif  // TEXP_OPTIMIZER_H_
