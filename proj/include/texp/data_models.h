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

#ifndef TEXP_DATA_MODELS_H_
#define TEXP_DATA_MODELS_H_

#include <string>
#include <vector>

#include "texp/rng.h"
#include "texp/tensor.h"

namespace texp {

// Equiprobable two-signal Gaussian mixture in R^d.
struct Model1Spec {
  int d = 10;
  Vector<double> s1;
  Vector<double> s2;
  double sigma = 0.1;

  // s1 = e1, s2 = (e1 + e2)/sqrt(2).
  static Model1Spec Defaults(int d = 10, double sigma = 0.1);
  void Validate() const;
};

// Zero-mean Gaussian with covariance diag(A1^2 + s^2, A2^2 + s^2, s^2, ...).
struct Model2Spec {
  int d = 10;
  double a1 = 3.0;
  double a2 = 2.0;
  double sigma = 0.3;

  void Validate() const;
  Vector<double> CovarianceDiagonal() const;
};

Vector<double> SampleModel1(const Model1Spec& spec, SeededRng& rng);
Vector<double> SampleModel2(const Model2Spec& spec, SeededRng& rng);

// Class templates plus isotropic noise.
struct LabeledToySpec {
  int num_classes = 4;
  std::vector<ImageTensor> templates;
  double noise = 0.2;
  int train_per_class = 64;
  int test_per_class = 100;

  void Validate() const;
};

struct LabeledSample {
  ImageTensor image;
  int label = 0;
};

struct LabeledDataset {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test;
};

// K disjoint-support binary templates of size h x w x channels, one per
// class; support positions are a seeded random partition of the pixels.
std::vector<ImageTensor> OrthogonalBinaryTemplates(int num_classes, int height,
                                                   int width, int channels,
                                                   SeededRng rng,
                                                   double amplitude = 1.0);

// K oriented stripe patterns with period 4 (horizontal, vertical, two
// diagonals), binary with the given amplitude.
std::vector<ImageTensor> StripeTemplates(int height, int width,
                                         double amplitude = 1.0);

LabeledDataset MakeLabeledToy(const LabeledToySpec& spec, const SeededRng& rng);

// x + nu * z without clipping.
ImageTensor CorruptGaussian(const ImageTensor& x, double nu, SeededRng& rng);
Vector<double> CorruptGaussian(const Vector<double>& x, double nu,
                               SeededRng& rng);

// One CSV per split: header "# shape=HxWxC spec=<hash>" then a column header
// p0..p{n-1},label, then one row per sample.
void WriteDatasetCsv(const std::vector<LabeledSample>& samples,
                     const std::string& spec_hash, const std::string& path);
std::vector<LabeledSample> ReadDatasetCsv(const std::string& path);

std::string LabeledToySpecHash(const LabeledToySpec& spec);

}  // namespace texp

#endif  // TEXP_DATA_MODELS_H_
