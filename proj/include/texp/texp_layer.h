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

#ifndef TEXP_TEXP_LAYER_H_
#define TEXP_TEXP_LAYER_H_

#include <Eigen/Dense>

#include "texp/tensor.h"
#include "texp/texp_math.h"

namespace texp {

enum class TexpVariant { kStandard, kV2 };

struct TexpLayerConfig {
  int num_filters = 8;
  ConvGeometry geometry;
  double t_inf = 1.0;
  double t_train = 10.0;
  double threshold_c = 0.5;
  double alpha = 1e-3;
  TexpVariant variant = TexpVariant::kStandard;
  // Fraction of locations kept per filter by the v2 top-k threshold.
  double v2_keep_fraction = 0.2;
  bool balanced = false;

  void Validate() const;

  // t_inf = 1/sqrt(D), t = 10/sqrt(D), alpha = 1e-3, c = 0.5.
  static TexpLayerConfig Defaults(int patch_dim, int num_filters,
                                  ConvGeometry geometry = {});
};

// All stages of one forward pass, L locations by M filters.
struct ActivationMap {
  Eigen::MatrixXd y;     // normalized convolution
  Eigen::MatrixXd p;     // tilted softmax
  Eigen::MatrixXd o;     // thresholded output
  Eigen::MatrixXd mask;  // 1 where o = p, 0 where pruned
  Eigen::VectorXd tau;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;

  Eigen::Index num_locations() const { return y.rows(); }
  Eigen::Index num_filters() const { return y.cols(); }
};

struct LayerGradients {
  Eigen::MatrixXd grad_weights;  // M x D
  ImageTensor grad_input;
};

// Scalar value plus its gradient w.r.t. the y stage (L x M).
struct StageObjective {
  double value = 0.0;
  Eigen::MatrixXd grad_y;
};

// y(l, i) = x(l)^T w_i / ||w_i||.
Eigen::MatrixXd ConvNormalizedForward(const PatchGrid& patches,
                                      const FilterBank<double>& bank);
Eigen::MatrixXd ConvNormalizedForward(const ImageTensor& input,
                                      const FilterBank<double>& bank,
                                      const ConvGeometry& geometry);

// Per-location softmax over filters.
Eigen::MatrixXd TiltedSoftmaxMap(const Eigen::MatrixXd& y, double t_inf);

// tau_i = m_i + c * s_i over locations, population standard deviation;
// values with p >= tau survive. Fills p, o, mask, tau, mean, stddev.
ActivationMap AdaptiveThreshold(const Eigen::MatrixXd& p, double c);

ActivationMap TexpLayerForward(const PatchGrid& patches,
                               const FilterBank<double>& bank,
                               const TexpLayerConfig& cfg);
ActivationMap TexpLayerForward(const ImageTensor& input,
                               const FilterBank<double>& bank,
                               const TexpLayerConfig& cfg);

// Forward pass with a caller-supplied threshold mask instead of a
// data-dependent one. Used to probe the layer with the mask held fixed.
ActivationMap TexpLayerForwardWithMask(const PatchGrid& patches,
                                       const FilterBank<double>& bank,
                                       const TexpLayerConfig& cfg,
                                       const Eigen::MatrixXd& mask);

// Softmax competes over all L * M activations; each filter keeps its top
// ceil(fraction * L) outputs (ties go to the lower location index).
ActivationMap TexpV2Forward(const PatchGrid& patches,
                            const FilterBank<double>& bank,
                            const TexpLayerConfig& cfg);

// Backpropagates grad_o through the frozen mask, the softmax Jacobian and
// the normalized convolution.
LayerGradients TexpLayerBackward(const Eigen::MatrixXd& grad_o,
                                 const ActivationMap& cache,
                                 const PatchGrid& patches,
                                 const FilterBank<double>& bank,
                                 const TexpLayerConfig& cfg);

// Pieces of the backward pass, exposed for composition.
Eigen::MatrixXd SoftmaxMapBackward(const Eigen::MatrixXd& grad_p,
                                   const Eigen::MatrixXd& p, double t_inf,
                                   TexpVariant variant);
Eigen::MatrixXd ConvNormalizedWeightGrad(const PatchGrid& patches,
                                         const FilterBank<double>& bank,
                                         const Eigen::MatrixXd& y,
                                         const Eigen::MatrixXd& grad_y);
ImageTensor ConvNormalizedInputGrad(const PatchGrid& patches,
                                    const FilterBank<double>& bank,
                                    const Eigen::MatrixXd& grad_y);

// (1/L) sum_l (1/t) log((1/M) sum_i exp(t y_i(l))), or the mean-centered
// form when balanced.
StageObjective LayerTexpObjective(const Eigen::MatrixXd& y, double t_train,
                                  bool balanced);

// (1/t) log((1/M') sum_m exp(t a_m)) with a = ReLU(y) over all M' = L * M
// entries, or the form centered by the mean of a when balanced.
StageObjective TexpV2Objective(const Eigen::MatrixXd& y, double t_train,
                               bool balanced);

// Variant-dispatched objective for the layer config.
StageObjective LayerObjective(const Eigen::MatrixXd& y,
                              const TexpLayerConfig& cfg);

struct ObjectiveWeightGrad {
  double value = 0.0;
  Eigen::MatrixXd grad_weights;
};

// Layer objective of one input and its gradient w.r.t. the filters.
ObjectiveWeightGrad LayerObjectiveWeightGrad(const PatchGrid& patches,
                                             const FilterBank<double>& bank,
                                             const TexpLayerConfig& cfg);

}  // namespace texp

#endif  // TEXP_TEXP_LAYER_H_
