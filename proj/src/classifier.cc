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

#include "texp/classifier.h"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace texp {
namespace {

double LogSumExp(const Eigen::VectorXd& z) {
  const double peak = z.maxCoeff();
  return peak + std::log((z.array() - peak).exp().sum());
}

void CheckFinite(double value, const char* what, int step) {
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << what << " became non-finite at step " << step;
    throw TrainingDiverged(msg.str());
  }
}

}  // namespace

void ClassifierConfig::Validate() const {
  if (height < 1 || width < 1 || channels < 1) {
    throw std::invalid_argument("classifier input shape must be positive");
  }
  if (num_classes < 2) throw std::invalid_argument("need at least two classes");
  layer.Validate();
  if (!(standardize_epsilon > 0.0)) {
    throw std::invalid_argument("standardize_epsilon must be positive");
  }
}

TinyClassifier::TinyClassifier(const ClassifierConfig& config, SeededRng rng)
    : config_(config) {
  config_.Validate();
  const int out_h = config_.layer.geometry.OutputExtent(config_.height);
  const int out_w = config_.layer.geometry.OutputExtent(config_.width);
  if (out_h < 1 || out_w < 1) {
    throw std::invalid_argument("classifier geometry yields no locations");
  }
  SeededRng filter_stream = rng.Substream("filters");
  SeededRng readout_stream = rng.Substream("readout");
  filters_ = RandomUnitBank(config_.layer.num_filters, config_.patch_dim(),
                            filter_stream);
  const Eigen::Index features =
      static_cast<Eigen::Index>(out_h) * out_w * config_.layer.num_filters;
  readout_.resize(config_.num_classes, features);
  for (Eigen::Index j = 0; j < readout_.cols(); ++j) {
    for (Eigen::Index k = 0; k < readout_.rows(); ++k) {
      readout_(k, j) = config_.readout_init_std * readout_stream.Normal();
    }
  }
  bias_ = Eigen::VectorXd::Zero(config_.num_classes);
}

TinyClassifier::ForwardPass TinyClassifier::Finish(ForwardPass pass) const {
  pass.logits = readout_ * pass.features.reshaped() + bias_;
  return pass;
}

void TinyClassifier::CheckInput(const ImageTensor& image) const {
  if (image.height != config_.height || image.width != config_.width ||
      image.channels != config_.channels) {
    throw std::invalid_argument("image shape does not match the classifier input");
  }
}

TinyClassifier::ForwardPass TinyClassifier::Forward(const ImageTensor& image) const {
  CheckInput(image);
  ForwardPass pass;
  pass.patches = ExtractPatches(image, config_.layer.geometry);
  if (config_.first_layer == FirstLayerKind::kTexp) {
    pass.texp = TexpLayerForward(pass.patches, filters_, config_.layer);
    pass.features = pass.texp.o;
    return Finish(std::move(pass));
  }
  pass.texp.y = ConvNormalizedForward(pass.patches, filters_);
  pass.relu = pass.texp.y.cwiseMax(0.0);
  const Eigen::RowVectorXd mean = pass.relu.colwise().mean();
  const Eigen::MatrixXd centered = pass.relu.rowwise() - mean;
  const Eigen::RowVectorXd var = centered.cwiseAbs2().colwise().mean();
  pass.inv_std =
      (var.array() + config_.standardize_epsilon).rsqrt().matrix().transpose();
  pass.features = centered * pass.inv_std.asDiagonal();
  return Finish(std::move(pass));
}

TinyClassifier::ForwardPass TinyClassifier::ForwardWithMask(
    const ImageTensor& image, const Eigen::MatrixXd& mask) const {
  if (config_.first_layer != FirstLayerKind::kTexp) {
    throw std::invalid_argument("only the TEXP layer has a threshold mask");
  }
  CheckInput(image);
  ForwardPass pass;
  pass.patches = ExtractPatches(image, config_.layer.geometry);
  pass.texp = TexpLayerForwardWithMask(pass.patches, filters_, config_.layer, mask);
  pass.features = pass.texp.o;
  return Finish(std::move(pass));
}

int TinyClassifier::Predict(const ImageTensor& image) const {
  Eigen::Index best;
  Forward(image).logits.maxCoeff(&best);
  return static_cast<int>(best);
}

JointLossGrad JointLoss(const TinyClassifier& model,
                        std::span<const LabeledSample> batch,
                        const std::vector<Eigen::MatrixXd>* frozen_masks) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  if (frozen_masks != nullptr && frozen_masks->size() != batch.size()) {
    throw std::invalid_argument("need one frozen mask per sample");
  }
  const ClassifierConfig& cfg = model.config();
  const bool texp_layer = cfg.first_layer == FirstLayerKind::kTexp;
  const double alpha = texp_layer ? cfg.layer.alpha : 0.0;
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  JointLossGrad out;
  out.grad_filters = Eigen::MatrixXd::Zero(model.filters().rows(), model.filters().cols());
  out.grad_readout = Eigen::MatrixXd::Zero(model.readout().rows(), model.readout().cols());
  out.grad_bias = Eigen::VectorXd::Zero(model.bias().size());

  for (size_t b = 0; b < batch.size(); ++b) {
    const LabeledSample& sample = batch[b];
    if (sample.label < 0 || sample.label >= cfg.num_classes) {
      throw std::invalid_argument("label out of range");
    }
    const TinyClassifier::ForwardPass pass =
        frozen_masks ? model.ForwardWithMask(sample.image, (*frozen_masks)[b])
                     : model.Forward(sample.image);

    const double ce = LogSumExp(pass.logits) - pass.logits[sample.label];
    Eigen::VectorXd grad_logits = (pass.logits.array() - LogSumExp(pass.logits)).exp();
    grad_logits[sample.label] -= 1.0;
    grad_logits *= inv_b;
    out.cross_entropy += inv_b * ce;
    out.grad_readout += grad_logits * pass.features.reshaped().transpose();
    out.grad_bias += grad_logits;
    const Eigen::MatrixXd grad_features =
        (model.readout().transpose() * grad_logits)
            .reshaped(pass.features.rows(), pass.features.cols());

    Eigen::MatrixXd grad_y;
    if (texp_layer) {
      grad_y = SoftmaxMapBackward(grad_features.cwiseProduct(pass.texp.mask),
                                  pass.texp.p, cfg.layer.t_inf, cfg.layer.variant);
      if (alpha > 0.0) {
        const StageObjective objective = LayerObjective(pass.texp.y, cfg.layer);
        out.texp_objective += inv_b * objective.value;
        grad_y -= (alpha * inv_b) * objective.grad_y;
      }
    } else {
      // Standardization backward per channel (population variance), then ReLU.
      const Eigen::MatrixXd& z = pass.features;
      const Eigen::Index L = z.rows();
      const Eigen::RowVectorXd mean_g = grad_features.colwise().mean();
      const Eigen::RowVectorXd mean_gz =
          grad_features.cwiseProduct(z).colwise().sum() / static_cast<double>(L);
      Eigen::MatrixXd grad_relu = grad_features.rowwise() - mean_g;
      grad_relu -= z * mean_gz.asDiagonal();
      grad_relu = grad_relu * pass.inv_std.asDiagonal();
      grad_y = grad_relu.cwiseProduct(
          (pass.texp.y.array() > 0.0).cast<double>().matrix());
    }
    out.grad_filters +=
        ConvNormalizedWeightGrad(pass.patches, model.filters(), pass.texp.y, grad_y);
  }
  out.loss = out.cross_entropy - alpha * out.texp_objective;
  return out;
}

double MeanCrossEntropy(const TinyClassifier& model,
                        std::span<const LabeledSample> samples) {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  double total = 0.0;
  for (const auto& s : samples) {
    const Eigen::VectorXd logits = model.Forward(s.image).logits;
    total += LogSumExp(logits) - logits[s.label];
  }
  return total / static_cast<double>(samples.size());
}

SupervisedResult TrainSupervised(const LabeledDataset& data,
                                 const ClassifierConfig& config,
                                 const TrainConfig& train, const SeededRng& rng) {
  if (data.train.empty()) throw std::invalid_argument("empty training set");
  train.Validate();
  if (!(config.layer.alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  SupervisedResult result{TinyClassifier(config, rng.Substream("model")), {}};
  result.log.snapshots.push_back(result.model.filters());
  SeededRng batch_stream = rng.Substream("batches");

  const int n = static_cast<int>(data.train.size());
  const int batch_size = std::min(train.batch_size, n);
  std::vector<int> order(n);
  std::vector<LabeledSample> batch;
  batch.reserve(batch_size);
  OptimizerState filter_state, readout_state, bias_state;
  for (int step = 0; step < train.steps; ++step) {
    // Partial Fisher-Yates: the first batch_size entries are the batch.
    std::iota(order.begin(), order.end(), 0);
    batch.clear();
    for (int j = 0; j < batch_size; ++j) {
      const int pick = j + static_cast<int>(batch_stream.UniformInt(n - j));
      std::swap(order[j], order[pick]);
      batch.push_back(data.train[order[j]]);
    }
    const JointLossGrad g = JointLoss(result.model, batch);
    CheckFinite(g.loss, "joint loss", step);
    result.log.loss.push_back(g.loss);
    result.log.objective.push_back(g.texp_objective);
    if (step % train.log_every == 0) {
      TrainRecord record;
      record.step = step;
      record.objective = g.texp_objective;
      record.grad_norms = g.grad_filters.rowwise().norm();
      result.log.records.push_back(std::move(record));
    }
    OptimizerStep(result.model.mutable_filters(), g.grad_filters, train.schedule,
                  train.optimizer, StepDirection::kDescent, filter_state);
    OptimizerStep(result.model.mutable_readout(), g.grad_readout, train.schedule,
                  train.optimizer, StepDirection::kDescent, readout_state);
    OptimizerStep(result.model.mutable_bias(), g.grad_bias, train.schedule,
                  train.optimizer, StepDirection::kDescent, bias_state);
    const Eigen::VectorXd norms = result.model.filters().rowwise().norm();
    if (!(norms.minCoeff() >= 1e-6 && norms.maxCoeff() <= 1e6)) {
      std::ostringstream msg;
      msg << "filter norm left [1e-6, 1e6] at step " << step;
      throw TrainingDiverged(msg.str());
    }
  }
  result.log.snapshots.push_back(result.model.filters());
  return result;
}

}  // namespace texp
