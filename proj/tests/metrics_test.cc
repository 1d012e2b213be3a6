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

#include "texp/metrics.h"

#include <cmath>
#include <vector>

#include "doctest.h"

namespace texp {
namespace {

TEST_CASE("sparsity of a small layer output") {
  Eigen::MatrixXd stage(3, 2);
  stage << 0.0, 0.5,
           1e-9, 2.0,
           0.3, 0.0;
  const SparsityReport r = ComputeSparsity(stage, 1e-8, 4);
  CHECK(r.overall == doctest::Approx(0.5));
  CHECK(r.channel_fraction[0] == 0.5);
  CHECK(r.channel_fraction[1] == 0.5);
  CHECK(r.channel_fraction[2] == 0.5);
  CHECK(r.spatial_fraction[0] == doctest::Approx(1.0 / 3.0));
  CHECK(r.spatial_fraction[1] == doctest::Approx(2.0 / 3.0));
  CHECK(r.channel_histogram.counts == std::vector<std::int64_t>{0, 0, 3, 0});
  CHECK(r.spatial_histogram.Total() == 2);
}

TEST_CASE("sparsity extremes") {
  CHECK(ComputeSparsity(Eigen::MatrixXd::Zero(4, 3)).overall == 0.0);
  CHECK(ComputeSparsity(Eigen::MatrixXd::Ones(4, 3)).overall == 1.0);
  CHECK_THROWS(ComputeSparsity(Eigen::MatrixXd::Ones(4, 3), 0.0));
}

TEST_CASE("alignment of axis-aligned filters") {
  FilterBank<double> bank = FilterBank<double>::Zero(3, 4);
  bank(0, 0) = 2.0;
  bank(1, 0) = 1.0;
  bank(1, 1) = 1.0;
  bank(2, 3) = 1.0;
  Vector<double> s1 = Vector<double>::Unit(4, 0);
  Vector<double> s2 = (Vector<double>::Unit(4, 0) + Vector<double>::Unit(4, 1)) / std::sqrt(2.0);
  const AlignmentReport r = ComputeAlignment(bank, {s1, s2});
  CHECK(r.neurons[0].signal_cosines[0] == doctest::Approx(1.0));
  CHECK(r.neurons[1].signal_cosines[1] == doctest::Approx(1.0));
  CHECK(r.neurons[2].orth_fraction == 1.0);
  CHECK(r.neurons[0].orth_fraction == 0.0);
  CHECK(r.neurons[0].proj_e1 == 2.0);
  CHECK(r.NumUseful() == 2);
  CHECK(r.MaxCosine(0) == doctest::Approx(1.0));
  CHECK_FALSE(r.neurons[2].useful);
}

TEST_CASE("histogram of a constant input") {
  const std::vector<double> v(10, 3.0);
  const Histogram h = ActivationHistogram(v, 5);
  CHECK(h.counts[0] == 10);
  CHECK(h.entropy == 0.0);
}

TEST_CASE("histogram of a uniform grid has maximal entropy") {
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) v.push_back(i + 0.5);
  const Histogram h = ActivationHistogram(v, 10);
  for (auto c : h.counts) CHECK(c == 10);
  CHECK(h.entropy == doctest::Approx(std::log(10.0)));
  CHECK(h.BinLo(0) == 0.5);
  CHECK(h.BinHi(9) == doctest::Approx(99.5));
  CHECK_THROWS(ActivationHistogram(std::vector<double>{}, 3));
  CHECK_THROWS(ActivationHistogram(v, 0));
}

TEST_CASE("fixed range histogram clamps out-of-range values") {
  const std::vector<double> v = {-1.0, 0.0, 0.49, 0.5, 1.0, 7.0};
  const Histogram h = FixedRangeHistogram(v, 2, 0.0, 1.0);
  CHECK(h.counts == std::vector<std::int64_t>{3, 3});
}

std::vector<LabeledSample> BalancedSet() {
  LabeledToySpec spec;
  spec.templates = StripeTemplates(8, 8, 1.0);
  spec.noise = 0.1;
  spec.test_per_class = 25;
  return MakeLabeledToy(spec, SeededRng(1)).test;
}

TEST_CASE("a constant predictor scores chance") {
  ClassifierConfig cfg;
  cfg.layer = TexpLayerConfig::Defaults(9, 4);
  TinyClassifier model(cfg, SeededRng(1));
  model.mutable_readout().setZero();
  model.mutable_bias().setZero();
  const std::vector<double> nus = {0.0, 0.5};
  const auto acc = EvaluateAccuracy(model, BalancedSet(), nus, SeededRng(2));
  CHECK(acc[0] == doctest::Approx(0.25));
  CHECK(acc[1] == doctest::Approx(0.25));
}

TEST_CASE("accuracy degrades with heavy corruption") {
  LabeledToySpec spec;
  spec.templates = StripeTemplates(8, 8, 1.0);
  spec.noise = 0.1;
  const LabeledDataset data = MakeLabeledToy(spec, SeededRng(3));
  ClassifierConfig cfg;
  cfg.layer = TexpLayerConfig::Defaults(9, 8);
  TrainConfig train;
  train.steps = 200;
  train.batch_size = 16;
  train.schedule.initial = 0.01;
  train.optimizer.kind = OptimizerKind::kAdam;
  const SupervisedResult result = TrainSupervised(data, cfg, train, SeededRng(4));
  const std::vector<double> nus = {0.0, 5.0};
  const auto acc = EvaluateAccuracy(result.model, data.test, nus, SeededRng(5));
  CHECK(acc[0] > 0.9);
  CHECK(acc[1] < acc[0]);
  CHECK(EvaluateAccuracy(result.model, data.test, nus, SeededRng(5)) == acc);
}

}  // namespace
}  // namespace texp
