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

#include "texp/data_models.h"

#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"

namespace texp {
namespace {

TEST_CASE("model 1 defaults") {
  const Model1Spec spec = Model1Spec::Defaults();
  CHECK(spec.d == 10);
  CHECK(spec.sigma == 0.1);
  CHECK(spec.s1 == Vector<double>::Unit(10, 0));
  CHECK(spec.s2[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(spec.s2[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(spec.s2.tail(8).isZero());
}

TEST_CASE("model 1 without noise only emits the two signals") {
  const Model1Spec spec = Model1Spec::Defaults(10, 0.0);
  SeededRng rng(1);
  int first = 0;
  for (int n = 0; n < 1000; ++n) {
    const Vector<double> x = SampleModel1(spec, rng);
    const bool is_s1 = x == spec.s1;
    CHECK((is_s1 || x == spec.s2));
    first += is_s1;
  }
  CHECK(first > 400);
  CHECK(first < 600);
}

TEST_CASE("model 1 empirical mean over 1e5 samples") {
  const Model1Spec spec = Model1Spec::Defaults();
  SeededRng rng(2);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(10);
  for (int n = 0; n < 100000; ++n) sum += SampleModel1(spec, rng);
  const Eigen::VectorXd expected = 0.5 * (spec.s1 + spec.s2);
  CHECK((sum / 1e5 - expected).cwiseAbs().maxCoeff() < 0.03);
}

Eigen::VectorXd EmpiricalVariance(const Model2Spec& spec, std::uint64_t seed, int n,
                                  Eigen::MatrixXd* covariance = nullptr) {
  SeededRng rng(seed);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(spec.d, spec.d);
  for (int k = 0; k < n; ++k) {
    const Vector<double> x = SampleModel2(spec, rng);
    cov += x * x.transpose();
  }
  cov /= n;
  if (covariance) *covariance = cov;
  return cov.diagonal();
}

TEST_CASE("model 2 with no signal is a standard gaussian") {
  Model2Spec spec;
  spec.a1 = 0.0;
  spec.a2 = 0.0;
  spec.sigma = 1.0;
  Eigen::MatrixXd cov;
  EmpiricalVariance(spec, 3, 100000, &cov);
  CHECK((cov - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("model 2 with only A1 lives on the e1 axis") {
  Model2Spec spec;
  spec.a2 = 0.0;
  spec.sigma = 0.0;
  SeededRng rng(4);
  for (int n = 0; n < 100; ++n) CHECK(SampleModel2(spec, rng).tail(9).isZero());
}

TEST_CASE("model 2 default variances") {
  const Model2Spec spec;
  const Eigen::VectorXd var = EmpiricalVariance(spec, 5, 100000);
  const Eigen::VectorXd expected = spec.CovarianceDiagonal();
  CHECK(expected[0] == doctest::Approx(9.09));
  CHECK(expected[1] == doctest::Approx(4.09));
  CHECK(expected[5] == doctest::Approx(0.09));
  for (int i = 0; i < 10; ++i) {
    CHECK(std::abs(var[i] / expected[i] - 1.0) < 0.03);
  }
}

TEST_CASE("sampler coordinates pass a 5-sigma variance check") {
  const Model2Spec spec;
  const int n = 100000;
  const Eigen::VectorXd var = EmpiricalVariance(spec, 6, n);
  const Eigen::VectorXd expected = spec.CovarianceDiagonal();
  for (int i = 0; i < 10; ++i) {
    // n * s^2 / sigma^2 is chi-square with n degrees of freedom.
    const double z = (n * var[i] / expected[i] - n) / std::sqrt(2.0 * n);
    CHECK(std::abs(z) < 5.0);
  }
}

LabeledToySpec OrthogonalSpec(double noise) {
  LabeledToySpec spec;
  spec.templates = OrthogonalBinaryTemplates(4, 8, 8, 1, SeededRng(7));
  spec.noise = noise;
  return spec;
}

TEST_CASE("orthogonal templates are disjoint and binary") {
  const auto templates = OrthogonalBinaryTemplates(4, 8, 8, 1, SeededRng(1), 2.0);
  REQUIRE(templates.size() == 4);
  for (size_t a = 0; a < 4; ++a) {
    CHECK(templates[a].data.sum() == 2.0 * 16);
    for (double v : templates[a].data) CHECK((v == 0.0 || v == 2.0));
    for (size_t b = a + 1; b < 4; ++b) {
      CHECK(templates[a].data.dot(templates[b].data) == 0.0);
    }
  }
}

TEST_CASE("stripe templates are distinct") {
  const auto templates = StripeTemplates(8, 8, 0.25);
  REQUIRE(templates.size() == 4);
  for (size_t a = 0; a < 4; ++a) {
    for (size_t b = a + 1; b < 4; ++b) CHECK(templates[a].data != templates[b].data);
  }
}

TEST_CASE("labeled toy with zero noise reproduces templates") {
  const LabeledToySpec spec = OrthogonalSpec(0.0);
  const LabeledDataset data = MakeLabeledToy(spec, SeededRng(2));
  CHECK(data.train.size() == 4u * 64);
  CHECK(data.test.size() == 4u * 100);
  for (const auto& s : data.train) CHECK(s.image.data == spec.templates[s.label].data);
}

TEST_CASE("labeled toy is deterministic") {
  const LabeledToySpec spec = OrthogonalSpec(0.2);
  const LabeledDataset a = MakeLabeledToy(spec, SeededRng(3));
  const LabeledDataset b = MakeLabeledToy(spec, SeededRng(3));
  for (size_t k = 0; k < a.test.size(); ++k) {
    CHECK(a.test[k].image.data == b.test[k].image.data);
    CHECK(a.test[k].label == b.test[k].label);
  }
  CHECK(a.train[0].image.data != a.test[0].image.data);
}

TEST_CASE("nearest-template classifier exceeds 99% on the orthogonal toy set") {
  const LabeledToySpec spec = OrthogonalSpec(0.2);
  const LabeledDataset data = MakeLabeledToy(spec, SeededRng(4));
  int correct = 0;
  for (const auto& s : data.test) {
    int best = 0;
    double best_dist = 1e300;
    for (int k = 0; k < 4; ++k) {
      const double d = (s.image.data - spec.templates[k].data).squaredNorm();
      if (d < best_dist) {
        best_dist = d;
        best = k;
      }
    }
    correct += best == s.label;
  }
  CHECK(correct / static_cast<double>(data.test.size()) > 0.99);
}

TEST_CASE("invalid labeled specs are rejected") {
  LabeledToySpec spec = OrthogonalSpec(0.1);
  spec.templates[1] = spec.templates[0];
  CHECK_THROWS(spec.Validate());
  spec = OrthogonalSpec(0.1);
  spec.num_classes = 1;
  CHECK_THROWS(spec.Validate());
}

TEST_CASE("gaussian corruption") {
  SeededRng rng(5);
  ImageTensor image(4, 4, 2);
  image.data.setLinSpaced(-1.0, 1.0);
  CHECK(CorruptGaussian(image, 0.0, rng).data == image.data);

  const Vector<double> zero = Vector<double>::Zero(10);
  double sum = 0.0, sq = 0.0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const Vector<double> d = CorruptGaussian(zero, 0.1, rng);
    sum += d.sum();
    sq += d.squaredNorm();
  }
  const double mean = sum / (10.0 * n);
  const double std = std::sqrt(sq / (10.0 * n) - mean * mean);
  CHECK(std::abs(std / 0.1 - 1.0) < 0.02);
  CHECK_THROWS(CorruptGaussian(zero, -0.1, rng));
}

TEST_CASE("dataset csv round trip") {
  const LabeledToySpec spec = OrthogonalSpec(0.3);
  const LabeledDataset data = MakeLabeledToy(spec, SeededRng(6));
  const auto path = std::filesystem::temp_directory_path() / "texp_dataset_test.csv";
  const std::string hash = LabeledToySpecHash(spec);
  WriteDatasetCsv(data.test, hash, path.string());
  const std::vector<LabeledSample> back = ReadDatasetCsv(path.string());
  REQUIRE(back.size() == data.test.size());
  for (size_t k = 0; k < back.size(); ++k) {
    CHECK(back[k].label == data.test[k].label);
    CHECK(back[k].image.SameShape(data.test[k].image));
    CHECK(back[k].image.data == data.test[k].image.data);
  }
  CHECK(LabeledToySpecHash(OrthogonalSpec(0.31)) != hash);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace texp
