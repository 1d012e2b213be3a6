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

#ifndef TEXP_CLASSIFIER_H_
#define TEXP_CLASSIFIER_H_

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "texp/data_models.h"
#include "texp/optimizer.h"
#include "texp/texp_layer.h"
#include "texp/unsupervised.h"

namespace texp {

enum class FirstLayerKind {
  kTexp,
  // Normalized conv -> ReLU -> per-image, per-channel standardization.
  kBaseline,
};

struct ClassifierConfig {
  FirstLayerKind first_layer = FirstLayerKind::kTexp;
  int height = 8;
  int width = 8;
  int channels = 1;
  int num_classes = 4;
  TexpLayerConfig layer;  // geometry and M are shared by both kinds
  double standardize_epsilon = 1e-5;
  double readout_init_std = 0.01;

  int patch_dim() const {
    return layer.geometry.kernel * layer.geometry.kernel * channels;
  }
  void Validate() const;
};

// First layer, flatten (canonical channel-major order), one linear map to K
// logits.
class TinyClassifier {
 public:
  struct ForwardPass {
    PatchGrid patches;
    ActivationMap texp;        // y, p, o, mask for the TEXP layer; y only otherwise
    Eigen::MatrixXd relu;      // baseline only
    Eigen::VectorXd inv_std;   // baseline only, per channel
    Eigen::MatrixXd features;  // L x M layer output
    Eigen::VectorXd logits;
  };

  TinyClassifier(const ClassifierConfig& config, SeededRng rng);

  ForwardPass Forward(const ImageTensor& image) const;
  // TEXP kind only: the threshold mask is supplied instead of recomputed.
  ForwardPass ForwardWithMask(const ImageTensor& image,
                              const Eigen::MatrixXd& mask) const;
  int Predict(const ImageTensor& image) const;

  const ClassifierConfig& config() const { return config_; }
  const FilterBank<double>& filters() const { return filters_; }
  FilterBank<double>& mutable_filters() { return filters_; }
  const Eigen::MatrixXd& readout() const { return readout_; }
  Eigen::MatrixXd& mutable_readout() { return readout_; }
  const Eigen::VectorXd& bias() const { return bias_; }
  Eigen::VectorXd& mutable_bias() { return bias_; }

 private:
  void CheckInput(const ImageTensor& image) const;
  ForwardPass Finish(ForwardPass pass) const;

  ClassifierConfig config_;
  FilterBank<double> filters_;
  Eigen::MatrixXd readout_;  // K x (L * M)
  Eigen::VectorXd bias_;
};

struct JointLossGrad {
  double loss = 0.0;
  double cross_entropy = 0.0;
  double texp_objective = 0.0;
  Eigen::MatrixXd grad_filters;
  Eigen::MatrixXd grad_readout;
  Eigen::VectorXd grad_bias;
};

// Batch mean of CE - alpha * L_TEXP (alpha term only for the TEXP layer) and
// its gradient. With `frozen_masks`, sample b uses (*frozen_masks)[b] as its
// threshold mask.
JointLossGrad JointLoss(const TinyClassifier& model,
                        std::span<const LabeledSample> batch,
                        const std::vector<Eigen::MatrixXd>* frozen_masks = nullptr);

struct SupervisedResult {
  TinyClassifier model;
  TrainLog log;
};

// Minibatch descent on the joint loss. Samples are drawn without
// replacement within a batch.
SupervisedResult TrainSupervised(const LabeledDataset& data,
                                 const ClassifierConfig& config,
                                 const TrainConfig& train, const SeededRng& rng);

// Mean cross-entropy over a sample set.
double MeanCrossEntropy(const TinyClassifier& model,
                        std::span<const LabeledSample> samples);

}  // namespace texp

#endif  // TEXP_CLASSIFIER_H_
