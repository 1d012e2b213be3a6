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

#include "doctest.h"
#include "test_util.h"

namespace texp {
namespace {

ClassifierConfig SmallConfig(FirstLayerKind kind, double alpha) {
  ClassifierConfig cfg;
  cfg.first_layer = kind;
  cfg.height = 5;
  cfg.width = 5;
  cfg.channels = 1;
  cfg.num_classes = 3;
  cfg.layer = TexpLayerConfig::Defaults(9, 4);
  cfg.layer.alpha = alpha;
  cfg.readout_init_std = 0.3;
  return cfg;
}

std::vector<LabeledSample> Batch(int n, SeededRng rng) {
  std::vector<LabeledSample> batch;
  for (int k = 0; k < n; ++k) {
    batch.push_back({testing::RandomImage(rng, 5, 5, 1), k % 3});
  }
  return batch;
}

TEST_CASE("forward shapes") {
  for (FirstLayerKind kind : {FirstLayerKind::kTexp, FirstLayerKind::kBaseline}) {
    const TinyClassifier model(SmallConfig(kind, 1e-3), SeededRng(1));
    CHECK(model.readout().rows() == 3);
    CHECK(model.readout().cols() == 25 * 4);
    const auto pass = model.Forward(Batch(1, SeededRng(2))[0].image);
    CHECK(pass.features.rows() == 25);
    CHECK(pass.features.cols() == 4);
    CHECK(pass.logits.size() == 3);
  }
}

TEST_CASE("joint loss gradient matches finite differences on two samples") {
  const TinyClassifier model(SmallConfig(FirstLayerKind::kTexp, 0.5), SeededRng(3));
  const auto batch = Batch(2, SeededRng(4));
  std::vector<Eigen::MatrixXd> masks;
  for (const auto& s : batch) masks.push_back(model.Forward(s.image).texp.mask);
  const JointLossGrad g = JointLoss(model, batch, &masks);

  const auto readout_loss = [&](const Eigen::MatrixXd& r) {
    TinyClassifier m = model;
    m.mutable_readout() = r;
    return JointLoss(m, batch, &masks).loss;
  };
  const auto filter_loss = [&](const Eigen::MatrixXd& w) {
    TinyClassifier m = model;
    m.mutable_filters() = w;
    return JointLoss(m, batch, &masks).loss;
  };
  CHECK(testing::RelErr(g.grad_readout,
                        testing::CentralDifference(readout_loss, model.readout())) < 1e-6);
  CHECK(testing::RelErr(g.grad_filters,
                        testing::CentralDifference(filter_loss, model.filters())) < 1e-5);
}

TEST_CASE("large alpha makes the filter gradient follow the objective") {
  ClassifierConfig cfg = SmallConfig(FirstLayerKind::kTexp, 1e3);
  const TinyClassifier model(cfg, SeededRng(5));
  const auto batch = Batch(2, SeededRng(6));
  std::vector<Eigen::MatrixXd> masks;
  for (const auto& s : batch) masks.push_back(model.Forward(s.image).texp.mask);
  const Eigen::MatrixXd joint = JointLoss(model, batch, &masks).grad_filters;

  cfg.layer.alpha = 1.0;
  const auto objective = [&](const Eigen::MatrixXd& w) {
    double total = 0.0;
    for (const auto& s : batch) {
      const PatchGrid patches = ExtractPatches(s.image, cfg.layer.geometry);
      total += LayerObjectiveWeightGrad(patches, w, cfg.layer).value;
    }
    return total / batch.size();
  };
  const Eigen::MatrixXd ascent = testing::CentralDifference(objective, model.filters());
  const double cosine = (-joint).cwiseProduct(ascent).sum() / (joint.norm() * ascent.norm());
  CHECK(cosine > 0.99);
}

TEST_CASE("baseline training lowers the loss") {
  LabeledToySpec spec;
  spec.templates = StripeTemplates(8, 8, 0.5);
  spec.noise = 0.05;
  const LabeledDataset data = MakeLabeledToy(spec, SeededRng(7));
  ClassifierConfig cfg;
  cfg.first_layer = FirstLayerKind::kBaseline;
  cfg.layer = TexpLayerConfig::Defaults(9, 8);
  TrainConfig train;
  train.steps = 50;
  train.batch_size = 16;
  train.schedule.initial = 0.01;
  train.optimizer.kind = OptimizerKind::kAdam;
  train.log_every = 10;
  const TinyClassifier untrained(cfg, SeededRng(8).Substream("model"));
  const double before = MeanCrossEntropy(untrained, data.train);
  const SupervisedResult result = TrainSupervised(data, cfg, train, SeededRng(8));
  CHECK(MeanCrossEntropy(result.model, data.train) < before);
  CHECK(result.log.loss.size() == 50u);
}

TEST_CASE("supervised training is deterministic") {
  LabeledToySpec spec;
  spec.templates = StripeTemplates(8, 8, 0.5);
  spec.train_per_class = 8;
  spec.test_per_class = 4;
  const LabeledDataset data = MakeLabeledToy(spec, SeededRng(9));
  ClassifierConfig cfg;
  cfg.layer = TexpLayerConfig::Defaults(9, 4);
  TrainConfig train;
  train.steps = 10;
  train.batch_size = 4;
  train.schedule.initial = 0.01;
  const auto a = TrainSupervised(data, cfg, train, SeededRng(1));
  const auto b = TrainSupervised(data, cfg, train, SeededRng(1));
  CHECK(a.model.filters() == b.model.filters());
  CHECK(a.model.readout() == b.model.readout());
}

TEST_CASE("mismatched inputs are rejected") {
  const TinyClassifier model(SmallConfig(FirstLayerKind::kTexp, 1e-3), SeededRng(1));
  CHECK_THROWS(model.Forward(ImageTensor(4, 5, 1)));
  std::vector<LabeledSample> bad = Batch(1, SeededRng(2));
  bad[0].label = 3;
  CHECK_THROWS(JointLoss(model, bad));
}

}  // namespace
}  // namespace texp
