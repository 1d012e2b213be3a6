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

#include "texp/texp_layer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace texp {
namespace {

void RequireBankMatchesPatches(const PatchGrid& patches,
                               const FilterBank<double>& bank) {
  if (bank.cols() != patches.patches.cols()) {
    throw std::invalid_argument("filter dimension does not match patch size");
  }
  ValidateFilterBank(bank);
}

Eigen::MatrixXd UnitRows(const FilterBank<double>& bank) {
  return bank.rowwise().normalized();
}

}  // namespace

void TexpLayerConfig::Validate() const {
  if (num_filters < 1) throw std::invalid_argument("num_filters must be >= 1");
  geometry.Validate();
  if (!(t_inf > 0.0)) throw std::invalid_argument("t_inf must be positive");
  if (!(t_train > 0.0)) throw std::invalid_argument("t_train must be positive");
  if (!std::isfinite(threshold_c)) {
    throw std::invalid_argument("threshold_c must be finite");
  }
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  if (variant == TexpVariant::kV2 &&
      !(v2_keep_fraction > 0.0 && v2_keep_fraction <= 1.0)) {
    throw std::invalid_argument("v2_keep_fraction must lie in (0, 1]");
  }
}

TexpLayerConfig TexpLayerConfig::Defaults(int patch_dim, int num_filters,
                                          ConvGeometry geometry) {
  TexpLayerConfig cfg;
  cfg.num_filters = num_filters;
  cfg.geometry = geometry;
  const double root = std::sqrt(static_cast<double>(patch_dim));
  cfg.t_inf = 1.0 / root;
  cfg.t_train = 10.0 / root;
  cfg.threshold_c = 0.5;
  cfg.alpha = 1e-3;
  return cfg;
}

Eigen::MatrixXd ConvNormalizedForward(const PatchGrid& patches,
                                      const FilterBank<double>& bank) {
  RequireBankMatchesPatches(patches, bank);
  return patches.patches * UnitRows(bank).transpose();
}

Eigen::MatrixXd ConvNormalizedForward(const ImageTensor& input,
                                      const FilterBank<double>& bank,
                                      const ConvGeometry& geometry) {
  return ConvNormalizedForward(ExtractPatches(input, geometry), bank);
}

Eigen::MatrixXd TiltedSoftmaxMap(const Eigen::MatrixXd& y, double t_inf) {
  internal::RequirePositiveTilt(t_inf);
  Eigen::MatrixXd p(y.rows(), y.cols());
  for (Eigen::Index l = 0; l < y.rows(); ++l) {
    p.row(l) = TiltedSoftmax(y.row(l), t_inf).transpose();
  }
  return p;
}

ActivationMap AdaptiveThreshold(const Eigen::MatrixXd& p, double c) {
  if (p.rows() < 1) throw std::invalid_argument("need at least one location");
  ActivationMap map;
  map.p = p;
  const Eigen::Index L = p.rows();
  const Eigen::Index M = p.cols();
  map.mean.resize(M);
  map.stddev.resize(M);
  map.tau.resize(M);
  map.mask.resize(L, M);
  for (Eigen::Index i = 0; i < M; ++i) {
    const auto column = p.col(i);
    if (column.maxCoeff() == column.minCoeff()) {
      // Exact statistics for a constant column so the tie case keeps all.
      map.mean[i] = column[0];
      map.stddev[i] = 0.0;
    } else {
      map.mean[i] = column.mean();
      map.stddev[i] = std::sqrt(
          (column.array() - map.mean[i]).square().sum() / static_cast<double>(L));
    }
    map.tau[i] = map.mean[i] + c * map.stddev[i];
    map.mask.col(i) = (column.array() >= map.tau[i]).cast<double>();
  }
  map.o = map.p.cwiseProduct(map.mask);
  return map;
}

ActivationMap TexpLayerForward(const PatchGrid& patches,
                               const FilterBank<double>& bank,
                               const TexpLayerConfig& cfg) {
  cfg.Validate();
  if (bank.rows() != cfg.num_filters) {
    throw std::invalid_argument("bank size does not match num_filters");
  }
  if (cfg.variant == TexpVariant::kV2) return TexpV2Forward(patches, bank, cfg);
  Eigen::MatrixXd y = ConvNormalizedForward(patches, bank);
  ActivationMap map = AdaptiveThreshold(TiltedSoftmaxMap(y, cfg.t_inf),
                                        cfg.threshold_c);
  map.y = std::move(y);
  return map;
}

ActivationMap TexpLayerForward(const ImageTensor& input,
                               const FilterBank<double>& bank,
                               const TexpLayerConfig& cfg) {
  return TexpLayerForward(ExtractPatches(input, cfg.geometry), bank, cfg);
}

ActivationMap TexpLayerForwardWithMask(const PatchGrid& patches,
                                       const FilterBank<double>& bank,
                                       const TexpLayerConfig& cfg,
                                       const Eigen::MatrixXd& mask) {
  cfg.Validate();
  ActivationMap map;
  map.y = ConvNormalizedForward(patches, bank);
  if (mask.rows() != map.y.rows() || mask.cols() != map.y.cols()) {
    throw std::invalid_argument("mask shape does not match activation map");
  }
  if (cfg.variant == TexpVariant::kV2) {
    Eigen::VectorXd flat = (cfg.t_inf * map.y).reshaped();
    flat.array() = (flat.array() - flat.maxCoeff()).exp();
    flat /= flat.sum();
    map.p = flat.reshaped(map.y.rows(), map.y.cols());
  } else {
    map.p = TiltedSoftmaxMap(map.y, cfg.t_inf);
  }
  map.mask = mask;
  map.o = map.p.cwiseProduct(mask);
  return map;
}

ActivationMap TexpV2Forward(const PatchGrid& patches,
                            const FilterBank<double>& bank,
                            const TexpLayerConfig& cfg) {
  cfg.Validate();
  if (cfg.variant != TexpVariant::kV2) {
    throw std::invalid_argument("TexpV2Forward needs variant = v2");
  }
  ActivationMap map;
  map.y = ConvNormalizedForward(patches, bank);
  const Eigen::Index L = map.y.rows();
  const Eigen::Index M = map.y.cols();
  // Column-major flattening: flat index = i * L + l, the canonical layout.
  Eigen::VectorXd flat = (cfg.t_inf * map.y).reshaped();
  flat.array() = (flat.array() - flat.maxCoeff()).exp();
  flat /= flat.sum();
  map.p = flat.reshaped(L, M);

  const auto keep = static_cast<Eigen::Index>(
      std::ceil(cfg.v2_keep_fraction * static_cast<double>(L) - 1e-12));
  const Eigen::Index kept = std::clamp<Eigen::Index>(keep, 1, L);
  map.mask = Eigen::MatrixXd::Zero(L, M);
  map.tau.resize(M);
  map.mean = map.p.colwise().mean().transpose();
  map.stddev.resize(M);
  std::vector<Eigen::Index> order(L);
  for (Eigen::Index i = 0; i < M; ++i) {
    const auto column = map.p.col(i);
    map.stddev[i] = std::sqrt((column.array() - map.mean[i]).square().mean());
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) {
                       return column[a] > column[b];
                     });
    for (Eigen::Index r = 0; r < kept; ++r) map.mask(order[r], i) = 1.0;
    map.tau[i] = column[order[kept - 1]];
  }
  map.o = map.p.cwiseProduct(map.mask);
  return map;
}

Eigen::MatrixXd SoftmaxMapBackward(const Eigen::MatrixXd& grad_p,
                                   const Eigen::MatrixXd& p, double t_inf,
                                   TexpVariant variant) {
  if (variant == TexpVariant::kV2) {
    const double inner = p.cwiseProduct(grad_p).sum();
    return t_inf * p.cwiseProduct((grad_p.array() - inner).matrix());
  }
  const Eigen::VectorXd inner = p.cwiseProduct(grad_p).rowwise().sum();
  return t_inf *
         p.cwiseProduct((grad_p.colwise() - inner));
}

Eigen::MatrixXd ConvNormalizedWeightGrad(const PatchGrid& patches,
                                         const FilterBank<double>& bank,
                                         const Eigen::MatrixXd& y,
                                         const Eigen::MatrixXd& grad_y) {
  // d y_i(l) / d w_i = (x(l) - y_i(l) w_i/||w_i||) / ||w_i||.
  const Eigen::VectorXd norms = bank.rowwise().norm();
  const Eigen::MatrixXd unit = UnitRows(bank);
  const Eigen::MatrixXd correlated = grad_y.transpose() * patches.patches;
  const Eigen::VectorXd radial = grad_y.cwiseProduct(y).colwise().sum().transpose();
  Eigen::MatrixXd grad = correlated - radial.asDiagonal() * unit;
  return norms.cwiseInverse().asDiagonal() * grad;
}

ImageTensor ConvNormalizedInputGrad(const PatchGrid& patches,
                                    const FilterBank<double>& bank,
                                    const Eigen::MatrixXd& grad_y) {
  const Eigen::MatrixXd patch_grad = grad_y * UnitRows(bank);
  return ScatterPatches(patches, patch_grad);
}

LayerGradients TexpLayerBackward(const Eigen::MatrixXd& grad_o,
                                 const ActivationMap& cache,
                                 const PatchGrid& patches,
                                 const FilterBank<double>& bank,
                                 const TexpLayerConfig& cfg) {
  if (cache.y.size() == 0 || cache.p.size() == 0 || cache.mask.size() == 0) {
    throw std::invalid_argument("backward needs the cached forward stages");
  }
  if (grad_o.rows() != cache.p.rows() || grad_o.cols() != cache.p.cols()) {
    throw std::invalid_argument("upstream gradient shape mismatch");
  }
  const Eigen::MatrixXd grad_p = grad_o.cwiseProduct(cache.mask);
  const Eigen::MatrixXd grad_y =
      SoftmaxMapBackward(grad_p, cache.p, cfg.t_inf, cfg.variant);
  LayerGradients out;
  out.grad_weights = ConvNormalizedWeightGrad(patches, bank, cache.y, grad_y);
  out.grad_input = ConvNormalizedInputGrad(patches, bank, grad_y);
  return out;
}

StageObjective LayerTexpObjective(const Eigen::MatrixXd& y, double t_train,
                                  bool balanced) {
  internal::RequirePositiveTilt(t_train);
  const Eigen::Index L = y.rows();
  const Eigen::Index M = y.cols();
  if (L < 1 || M < 1) throw std::invalid_argument("empty activation map");
  StageObjective out;
  out.grad_y.resize(L, M);
  const double inv_l = 1.0 / static_cast<double>(L);
  const double uniform = 1.0 / static_cast<double>(M);
  for (Eigen::Index l = 0; l < L; ++l) {
    const Eigen::RowVectorXd row = y.row(l);
    const double term = balanced ? BalancedTexpObjective(row, t_train)
                                 : TexpObjective(row, t_train);
    out.value += inv_l * term / t_train;
    // The 1/t in front cancels the t from the chain rule.
    Eigen::RowVectorXd weight = TiltedSoftmax(row, t_train).transpose();
    if (balanced) weight.array() -= uniform;
    out.grad_y.row(l) = inv_l * weight;
  }
  return out;
}

StageObjective TexpV2Objective(const Eigen::MatrixXd& y, double t_train,
                               bool balanced) {
  internal::RequirePositiveTilt(t_train);
  if (y.size() == 0) throw std::invalid_argument("empty activation map");
  const Eigen::VectorXd a = y.reshaped().cwiseMax(0.0);
  const Eigen::VectorXd active = (y.reshaped().array() > 0.0).cast<double>();
  StageObjective out;
  out.value = (balanced ? BalancedTexpObjective(a, t_train)
                        : TexpObjective(a, t_train)) /
              t_train;
  Eigen::VectorXd weight = TiltedSoftmax(a, t_train);
  if (balanced) weight.array() -= 1.0 / static_cast<double>(a.size());
  out.grad_y = weight.cwiseProduct(active).reshaped(y.rows(), y.cols());
  return out;
}

StageObjective LayerObjective(const Eigen::MatrixXd& y,
                              const TexpLayerConfig& cfg) {
  if (cfg.variant == TexpVariant::kV2) {
    return TexpV2Objective(y, cfg.t_train, cfg.balanced);
  }
  return LayerTexpObjective(y, cfg.t_train, cfg.balanced);
}

ObjectiveWeightGrad LayerObjectiveWeightGrad(const PatchGrid& patches,
                                             const FilterBank<double>& bank,
                                             const TexpLayerConfig& cfg) {
  const Eigen::MatrixXd y = ConvNormalizedForward(patches, bank);
  const StageObjective objective = LayerObjective(y, cfg);
  return {objective.value,
          ConvNormalizedWeightGrad(patches, bank, y, objective.grad_y)};
}

}  // namespace texp
