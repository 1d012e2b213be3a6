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

#ifndef TEXP_METRICS_H_
#define TEXP_METRICS_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "texp/classifier.h"
#include "texp/rng.h"
#include "texp/texp_math.h"

namespace texp {

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::int64_t> counts;
  double entropy = 0.0;  // natural-log Shannon entropy of counts / total

  double BinLo(size_t i) const;
  double BinHi(size_t i) const;
  std::int64_t Total() const;
};

// Uniform bins over [min, max] of the data. A constant input lands in the
// first bin. Throws on empty input or bins < 1.
Histogram ActivationHistogram(std::span<const double> values, int bins);
// Uniform bins over a fixed [lo, hi]; values are clamped into range.
Histogram FixedRangeHistogram(std::span<const double> values, int bins, double lo,
                              double hi);

// L0 views of one L x M layer output, counting entries > eps.
struct SparsityReport {
  double eps = 1e-8;
  double overall = 0.0;             // over all L * M entries
  Eigen::VectorXd channel_fraction;  // per location, normalized by M
  Eigen::VectorXd spatial_fraction;  // per filter, normalized by L
  Histogram channel_histogram;      // of channel_fraction over [0, 1]
  Histogram spatial_histogram;      // of spatial_fraction over [0, 1]
};

SparsityReport ComputeSparsity(const Eigen::MatrixXd& stage, double eps = 1e-8,
                               int histogram_bins = 10);

struct NeuronAlignment {
  double proj_e1 = 0.0;
  double proj_e2 = 0.0;
  double energy = 0.0;
  double orth_fraction = 0.0;
  std::vector<double> signal_cosines;
  bool useful = false;
};

struct AlignmentReport {
  double useful_cosine = 0.9;
  std::vector<NeuronAlignment> neurons;

  int NumUseful() const;
  // Largest cosine to signal `s` over all neurons.
  double MaxCosine(size_t s) const;
};

// Per-filter signal-plane projection, orthogonal energy fraction and cosine
// to each signal. A neuron is useful when some cosine reaches useful_cosine.
AlignmentReport ComputeAlignment(const FilterBank<double>& bank,
                                 const std::vector<Vector<double>>& signals,
                                 double useful_cosine = 0.9);

// Accuracy per corruption level; nu = 0 gives clean accuracy. Each level
// draws its noise from its own substream of `rng`.
std::vector<double> EvaluateAccuracy(const TinyClassifier& model,
                                     std::span<const LabeledSample> samples,
                                     std::span<const double> nus,
                                     const SeededRng& rng);

}  // namespace texp

#endif  // TEXP_METRICS_H_
