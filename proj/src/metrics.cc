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

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "texp/data_models.h"

namespace texp {
namespace {

double Entropy(const std::vector<std::int64_t>& counts) {
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double q = static_cast<double>(c) / static_cast<double>(total);
    h -= q * std::log(q);
  }
  return h;
}

Histogram Bin(std::span<const double> values, int bins, double lo, double hi) {
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bins, 0);
  const double width = (hi - lo) / bins;
  for (double v : values) {
    int bin = 0;
    if (width > 0.0) {
      bin = static_cast<int>(std::floor((v - lo) / width));
      bin = std::clamp(bin, 0, bins - 1);
    }
    ++h.counts[bin];
  }
  h.entropy = Entropy(h.counts);
  return h;
}

}  // namespace

double Histogram::BinLo(size_t i) const {
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(counts.size());
}

double Histogram::BinHi(size_t i) const { return BinLo(i + 1); }

std::int64_t Histogram::Total() const {
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  return total;
}

Histogram ActivationHistogram(std::span<const double> values, int bins) {
  if (values.empty()) throw std::invalid_argument("histogram of empty input");
  if (bins < 1) throw std::invalid_argument("bins must be >= 1");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return Bin(values, bins, *lo, *hi);
}

Histogram FixedRangeHistogram(std::span<const double> values, int bins, double lo,
                              double hi) {
  if (bins < 1) throw std::invalid_argument("bins must be >= 1");
  if (!(hi > lo)) throw std::invalid_argument("histogram range is empty");
  return Bin(values, bins, lo, hi);
}

SparsityReport ComputeSparsity(const Eigen::MatrixXd& stage, double eps,
                               int histogram_bins) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (stage.size() == 0) throw std::invalid_argument("empty layer output");
  SparsityReport report;
  report.eps = eps;
  const Eigen::MatrixXd active = (stage.array() > eps).cast<double>();
  report.overall = active.mean();
  report.channel_fraction = active.rowwise().mean();
  report.spatial_fraction = active.colwise().mean().transpose();
  report.channel_histogram = FixedRangeHistogram(
      {report.channel_fraction.data(),
       static_cast<size_t>(report.channel_fraction.size())},
      histogram_bins, 0.0, 1.0);
  report.spatial_histogram = FixedRangeHistogram(
      {report.spatial_fraction.data(),
       static_cast<size_t>(report.spatial_fraction.size())},
      histogram_bins, 0.0, 1.0);
  return report;
}

int AlignmentReport::NumUseful() const {
  return static_cast<int>(std::count_if(neurons.begin(), neurons.end(),
                                        [](const auto& n) { return n.useful; }));
}

double AlignmentReport::MaxCosine(size_t s) const {
  double best = -1.0;
  for (const auto& n : neurons) best = std::max(best, n.signal_cosines.at(s));
  return best;
}

AlignmentReport ComputeAlignment(const FilterBank<double>& bank,
                                 const std::vector<Vector<double>>& signals,
                                 double useful_cosine) {
  if (bank.cols() < 2) throw std::invalid_argument("need d >= 2");
  for (const auto& s : signals) {
    if (s.size() != bank.cols()) throw std::invalid_argument("signal length mismatch");
    if (!(s.norm() > 0.0)) throw std::invalid_argument("signal has zero norm");
  }
  AlignmentReport report;
  report.useful_cosine = useful_cosine;
  for (Eigen::Index i = 0; i < bank.rows(); ++i) {
    const auto w = bank.row(i);
    NeuronAlignment n;
    n.proj_e1 = w[0];
    n.proj_e2 = w[1];
    n.energy = w.squaredNorm();
    n.orth_fraction =
        n.energy > 0.0 ? w.tail(w.size() - 2).squaredNorm() / n.energy : 0.0;
    for (const auto& s : signals) {
      const double cosine = n.energy > 0.0 ? w.dot(s) / (std::sqrt(n.energy) * s.norm())
                                           : 0.0;
      n.signal_cosines.push_back(cosine);
      if (cosine >= useful_cosine) n.useful = true;
    }
    report.neurons.push_back(std::move(n));
  }
  return report;
}

std::vector<double> EvaluateAccuracy(const TinyClassifier& model,
                                     std::span<const LabeledSample> samples,
                                     std::span<const double> nus,
                                     const SeededRng& rng) {
  if (samples.empty()) throw std::invalid_argument("empty evaluation set");
  std::vector<double> accuracy;
  for (size_t level = 0; level < nus.size(); ++level) {
    SeededRng noise = rng.Substream(static_cast<std::uint64_t>(level));
    int correct = 0;
    for (const auto& s : samples) {
      const ImageTensor input =
          nus[level] > 0.0 ? CorruptGaussian(s.image, nus[level], noise) : s.image;
      if (model.Predict(input) == s.label) ++correct;
    }
    accuracy.push_back(static_cast<double>(correct) /
                       static_cast<double>(samples.size()));
  }
  return accuracy;
}

}  // namespace texp
