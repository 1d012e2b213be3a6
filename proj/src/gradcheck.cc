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

#include "texp/gradcheck.h"

#include <algorithm>
#include <array>
#include <cmath>

#include "texp/classifier.h"
#include "texp/texp_math.h"

namespace texp {
namespace {

constexpr std::array<double, 3> kTilts = {0.1, 1.0, 10.0};

int UniformBetween(SeededRng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.UniformInt(static_cast<std::uint64_t>(hi - lo + 1)));
}

Eigen::MatrixXd GaussianMatrix(SeededRng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.Normal();
  }
  return m;
}

const char* JointLossCaseName(JointLossCase which) {
  switch (which) {
    case JointLossCase::kTexpFrozenMask: return "joint-loss-texp-frozen-mask";
    case JointLossCase::kTexpNoThreshold: return "joint-loss-texp-no-threshold";
    case JointLossCase::kTexpV2FrozenMask: return "joint-loss-texp-v2-frozen-mask";
    case JointLossCase::kBaseline: return "joint-loss-baseline";
  }
  return "joint-loss";
}

}  // namespace

Eigen::MatrixXd NumericGradient(
    const std::function<double(const Eigen::MatrixXd&)>& f,
    const Eigen::MatrixXd& at, double h) {
  Eigen::MatrixXd grad(at.rows(), at.cols());
  Eigen::MatrixXd probe = at;
  for (Eigen::Index k = 0; k < at.size(); ++k) {
    const double saved = probe(k);
    probe(k) = saved + h;
    const double up = f(probe);
    probe(k) = saved - h;
    const double down = f(probe);
    probe(k) = saved;
    grad(k) = (up - down) / (2.0 * h);
  }
  return grad;
}

double RelativeError(const Eigen::MatrixXd& analytic,
                     const Eigen::MatrixXd& numeric) {
  const double scale = std::max(analytic.norm(), numeric.norm());
  if (scale == 0.0) return 0.0;
  return (analytic - numeric).norm() / scale;
}

GradCheckResult CheckTexpGradient(int instances, bool balanced, SeededRng rng) {
  GradCheckResult result;
  result.check = balanced ? "balanced-texp-grad" : "texp-grad";
  result.instances = instances;
  result.tolerance = 1e-5;
  for (int n = 0; n < instances; ++n) {
    const int dim = UniformBetween(rng, 2, 16);
    const int filters = UniformBetween(rng, 2, 8);
    const double t = kTilts[n % kTilts.size()];
    const Vector<double> x = GaussianMatrix(rng, dim, 1);
    const FilterBank<double> bank = GaussianMatrix(rng, filters, dim);

    const auto objective = [&](const Eigen::MatrixXd& w) {
      const Vector<double> a = NormalizedActivations(x, w);
      return balanced ? BalancedTexpObjective(a, t) : TexpObjective(a, t);
    };
    const Eigen::MatrixXd analytic =
        balanced ? BalancedTexpGrad(x, bank, t) : TexpGrad(x, bank, t);
    result.max_rel_error = std::max(
        result.max_rel_error, RelativeError(analytic, NumericGradient(objective, bank)));
  }
  return result;
}

GradCheckResult CheckJointLossGradient(int instances, JointLossCase which,
                                       SeededRng rng) {
  GradCheckResult result;
  result.check = JointLossCaseName(which);
  result.instances = instances;
  result.tolerance = 1e-4;
  for (int n = 0; n < instances; ++n) {
    ClassifierConfig cfg;
    cfg.height = UniformBetween(rng, 3, 5);
    cfg.width = UniformBetween(rng, 3, 5);
    cfg.channels = UniformBetween(rng, 1, 2);
    cfg.num_classes = UniformBetween(rng, 2, 3);
    cfg.readout_init_std = 0.5;
    const int filters = UniformBetween(rng, 2, 4);
    cfg.layer = TexpLayerConfig::Defaults(cfg.patch_dim(), filters);
    cfg.layer.alpha = 0.5;
    cfg.layer.balanced = (n % 2) == 1;
    cfg.first_layer = which == JointLossCase::kBaseline ? FirstLayerKind::kBaseline
                                                        : FirstLayerKind::kTexp;
    if (which == JointLossCase::kTexpNoThreshold) cfg.layer.threshold_c = -10.0;
    if (which == JointLossCase::kTexpV2FrozenMask) {
      cfg.layer.variant = TexpVariant::kV2;
      cfg.layer.v2_keep_fraction = 0.5;
    }
    // Larger tilts separate the softmax outputs, so the mask is not
    // decided by a rounding error.
    cfg.layer.t_inf = 1.0;
    cfg.layer.t_train = kTilts[n % kTilts.size()] + 1.0;

    TinyClassifier model(cfg, rng.Substream(static_cast<std::uint64_t>(n)));
    std::vector<LabeledSample> batch;
    for (int b = 0; b < 2; ++b) {
      ImageTensor image(cfg.height, cfg.width, cfg.channels);
      for (auto& v : image.data) v = rng.Normal();
      batch.push_back({std::move(image), UniformBetween(rng, 0, cfg.num_classes - 1)});
    }

    std::vector<Eigen::MatrixXd> masks;
    const std::vector<Eigen::MatrixXd>* frozen = nullptr;
    if (which == JointLossCase::kTexpFrozenMask ||
        which == JointLossCase::kTexpV2FrozenMask) {
      for (const auto& s : batch) masks.push_back(model.Forward(s.image).texp.mask);
      frozen = &masks;
    }
    const JointLossGrad analytic = JointLoss(model, batch, frozen);

    TinyClassifier probe = model;
    const auto loss_filters = [&](const Eigen::MatrixXd& w) {
      probe.mutable_filters() = w;
      return JointLoss(probe, batch, frozen).loss;
    };
    const Eigen::MatrixXd num_filters = NumericGradient(loss_filters, model.filters());
    probe = model;
    const auto loss_readout = [&](const Eigen::MatrixXd& r) {
      probe.mutable_readout() = r;
      return JointLoss(probe, batch, frozen).loss;
    };
    const Eigen::MatrixXd num_readout = NumericGradient(loss_readout, model.readout());
    probe = model;
    const auto loss_bias = [&](const Eigen::MatrixXd& c) {
      probe.mutable_bias() = c.col(0);
      return JointLoss(probe, batch, frozen).loss;
    };
    const Eigen::MatrixXd num_bias = NumericGradient(loss_bias, model.bias());

    for (const double err : {RelativeError(analytic.grad_filters, num_filters),
                             RelativeError(analytic.grad_readout, num_readout),
                             RelativeError(analytic.grad_bias, num_bias)}) {
      result.max_rel_error = std::max(result.max_rel_error, err);
    }
  }
  return result;
}

std::vector<GradCheckResult> RunAllGradientChecks(int texp_instances,
                                                  int layer_instances,
                                                  const SeededRng& rng) {
  return {
      CheckTexpGradient(texp_instances, false, rng.Substream("texp-grad")),
      CheckTexpGradient(texp_instances, true, rng.Substream("balanced-texp-grad")),
      CheckJointLossGradient(layer_instances, JointLossCase::kTexpFrozenMask,
                             rng.Substream("frozen")),
      CheckJointLossGradient(layer_instances, JointLossCase::kTexpNoThreshold,
                             rng.Substream("no-threshold")),
      CheckJointLossGradient(layer_instances, JointLossCase::kTexpV2FrozenMask,
                             rng.Substream("v2")),
      CheckJointLossGradient(layer_instances, JointLossCase::kBaseline,
                             rng.Substream("baseline")),
  };
}

}  // namespace texp
