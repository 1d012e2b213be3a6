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

#ifndef TEXP_GRADCHECK_H_
#define TEXP_GRADCHECK_H_

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "texp/rng.h"

namespace texp {

// Central differences of `f` at `at`, one coordinate at a time.
Eigen::MatrixXd NumericGradient(
    const std::function<double(const Eigen::MatrixXd&)>& f,
    const Eigen::MatrixXd& at, double h = 1e-5);

// ||analytic - numeric|| / max(||analytic||, ||numeric||), Frobenius norms.
// Two all-zero gradients compare equal.
double RelativeError(const Eigen::MatrixXd& analytic,
                     const Eigen::MatrixXd& numeric);

struct GradCheckResult {
  std::string check;
  int instances = 0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;

  bool pass() const { return max_rel_error < tolerance; }
};

// Per-sample TEXP gradient against differences of the TEXP objective, on
// instances with D <= 16, M <= 8 and t cycling through {0.1, 1, 10}.
GradCheckResult CheckTexpGradient(int instances, bool balanced, SeededRng rng);

enum class JointLossCase {
  kTexpFrozenMask,  // threshold mask fixed at the unperturbed forward pass
  kTexpNoThreshold,  // c = -10, every output survives, nothing frozen
  kTexpV2FrozenMask,
  kBaseline,
};

// Filters, readout and bias gradients of the joint loss on a two-sample batch.
GradCheckResult CheckJointLossGradient(int instances, JointLossCase which,
                                       SeededRng rng);

std::vector<GradCheckResult> RunAllGradientChecks(int texp_instances,
                                                  int layer_instances,
                                                  const SeededRng& rng);

}  // namespace texp

#endif  // TEXP_GRADCHECK_H_
