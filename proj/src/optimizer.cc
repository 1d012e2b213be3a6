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

#include "texp/optimizer.h"

#include <cmath>
#include <stdexcept>

namespace texp {

double LearningRateSchedule::RateAt(std::int64_t step) const {
  double rate = initial;
  for (int milestone : milestones) {
    if (step >= milestone) rate *= decay;
  }
  return rate;
}

void TrainConfig::Validate() const {
  if (!(schedule.initial >= 0.0)) {
    throw std::invalid_argument("train.lr must be non-negative");
  }
  if (!(schedule.decay > 0.0)) throw std::invalid_argument("train.lr_decay must be positive");
  if (steps < 1) throw std::invalid_argument("train.steps must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("train.batch_size must be >= 1");
  if (log_every < 1) throw std::invalid_argument("train.log_every must be >= 1");
}

void OptimizerStep(Eigen::Ref<Eigen::MatrixXd> params,
                   const Eigen::Ref<const Eigen::MatrixXd>& grads,
                   const LearningRateSchedule& schedule,
                   const OptimizerConfig& config, StepDirection direction,
                   OptimizerState& state) {
  if (params.rows() != grads.rows() || params.cols() != grads.cols()) {
    throw std::invalid_argument("parameter and gradient shapes differ");
  }
  const double rate = schedule.RateAt(state.step);
  const double sign = direction == StepDirection::kAscent ? 1.0 : -1.0;
  ++state.step;
  switch (config.kind) {
    case OptimizerKind::kPlain:
      params += (sign * rate) * grads;
      return;
    case OptimizerKind::kMomentum:
      if (state.velocity.size() == 0) {
        state.velocity = Eigen::MatrixXd::Zero(params.rows(), params.cols());
      }
      state.velocity = config.momentum * state.velocity + grads;
      params += (sign * rate) * state.velocity;
      return;
    case OptimizerKind::kAdam: {
      if (state.first_moment.size() == 0) {
        state.first_moment = Eigen::MatrixXd::Zero(params.rows(), params.cols());
        state.second_moment = Eigen::MatrixXd::Zero(params.rows(), params.cols());
      }
      state.first_moment =
          config.beta1 * state.first_moment + (1.0 - config.beta1) * grads;
      state.second_moment = config.beta2 * state.second_moment +
                            (1.0 - config.beta2) * grads.cwiseAbs2();
      const double t = static_cast<double>(state.step);
      const double c1 = 1.0 - std::pow(config.beta1, t);
      const double c2 = 1.0 - std::pow(config.beta2, t);
      params.array() += sign * rate * (state.first_moment.array() / c1) /
                        ((state.second_moment.array() / c2).sqrt() + config.epsilon);
      return;
    }
  }
  throw std::invalid_argument("unknown optimizer kind");
}

}  // namespace texp
