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
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "texp/csv.h"

namespace texp {

Model1Spec Model1Spec::Defaults(int d, double sigma) {
  Model1Spec spec;
  spec.d = d;
  spec.sigma = sigma;
  spec.s1 = Vector<double>::Zero(d);
  spec.s2 = Vector<double>::Zero(d);
  spec.s1[0] = 1.0;
  spec.s2[0] = spec.s2[1] = 1.0 / std::sqrt(2.0);
  return spec;
}

void Model1Spec::Validate() const {
  if (d < 2) throw std::invalid_argument("model1.d must be >= 2");
  if (s1.size() != d || s2.size() != d) {
    throw std::invalid_argument("model1 signals must have length d");
  }
  if (!(sigma >= 0.0)) throw std::invalid_argument("model1.sigma must be >= 0");
}

void Model2Spec::Validate() const {
  if (d < 2) throw std::invalid_argument("model2.d must be >= 2");
  if (!(a1 >= 0.0) || !(a2 >= 0.0)) {
    throw std::invalid_argument("model2 amplitudes must be >= 0");
  }
  if (!(sigma >= 0.0)) throw std::invalid_argument("model2.sigma must be >= 0");
}

Vector<double> Model2Spec::CovarianceDiagonal() const {
  Vector<double> diag = Vector<double>::Constant(d, sigma * sigma);
  diag[0] += a1 * a1;
  diag[1] += a2 * a2;
  return diag;
}

Vector<double> SampleModel1(const Model1Spec& spec, SeededRng& rng) {
  const Vector<double>& mean = rng.Bernoulli(0.5) ? spec.s1 : spec.s2;
  return GaussianVector(rng, mean, spec.sigma);
}

Vector<double> SampleModel2(const Model2Spec& spec, SeededRng& rng) {
  Vector<double> x = GaussianVector(rng, spec.d, spec.sigma);
  x[0] += spec.a1 * rng.Normal();
  x[1] += spec.a2 * rng.Normal();
  return x;
}

void LabeledToySpec::Validate() const {
  if (num_classes < 2) throw std::invalid_argument("need at least two classes");
  if (static_cast<int>(templates.size()) != num_classes) {
    throw std::invalid_argument("need one template per class");
  }
  for (int k = 0; k < num_classes; ++k) {
    if (!templates[k].SameShape(templates[0])) {
      throw std::invalid_argument("templates must share a shape");
    }
    for (int j = 0; j < k; ++j) {
      if (templates[k].data == templates[j].data) {
        throw std::invalid_argument("templates must be distinct");
      }
    }
  }
  if (!(noise >= 0.0)) throw std::invalid_argument("noise must be >= 0");
  if (train_per_class < 1 || test_per_class < 1) {
    throw std::invalid_argument("sample counts must be positive");
  }
}

std::vector<ImageTensor> OrthogonalBinaryTemplates(int num_classes, int height,
                                                   int width, int channels,
                                                   SeededRng rng,
                                                   double amplitude) {
  const int pixels = height * width * channels;
  if (num_classes < 1 || pixels < num_classes) {
    throw std::invalid_argument("not enough pixels for disjoint templates");
  }
  std::vector<int> order(pixels);
  std::iota(order.begin(), order.end(), 0);
  for (int i = pixels - 1; i > 0; --i) {
    std::swap(order[i], order[rng.UniformInt(static_cast<std::uint64_t>(i) + 1)]);
  }
  const int per_class = pixels / num_classes;
  std::vector<ImageTensor> templates;
  for (int k = 0; k < num_classes; ++k) {
    ImageTensor t(height, width, channels);
    for (int j = k * per_class; j < (k + 1) * per_class; ++j) {
      t.data[order[j]] = amplitude;
    }
    templates.push_back(std::move(t));
  }
  return templates;
}

std::vector<ImageTensor> StripeTemplates(int height, int width,
                                         double amplitude) {
  std::vector<ImageTensor> templates(4, ImageTensor(height, width, 1));
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      templates[0](0, r, c) = (r % 4 < 2) ? amplitude : 0.0;
      templates[1](0, r, c) = (c % 4 < 2) ? amplitude : 0.0;
      templates[2](0, r, c) = ((r + c) % 4 < 2) ? amplitude : 0.0;
      templates[3](0, r, c) = (((r - c) % 4 + 4) % 4 < 2) ? amplitude : 0.0;
    }
  }
  return templates;
}

LabeledDataset MakeLabeledToy(const LabeledToySpec& spec, const SeededRng& rng) {
  spec.Validate();
  LabeledDataset data;
  auto fill = [&](std::vector<LabeledSample>& split, int per_class,
                  SeededRng stream) {
    for (int k = 0; k < spec.num_classes; ++k) {
      for (int n = 0; n < per_class; ++n) {
        split.push_back({CorruptGaussian(spec.templates[k], spec.noise, stream), k});
      }
    }
  };
  fill(data.train, spec.train_per_class, rng.Substream("train"));
  fill(data.test, spec.test_per_class, rng.Substream("test"));
  return data;
}

ImageTensor CorruptGaussian(const ImageTensor& x, double nu, SeededRng& rng) {
  ImageTensor out = x;
  out.data = CorruptGaussian(x.data, nu, rng);
  return out;
}

Vector<double> CorruptGaussian(const Vector<double>& x, double nu,
                               SeededRng& rng) {
  if (!(nu >= 0.0)) throw std::invalid_argument("nu must be >= 0");
  return GaussianVector(rng, x, nu);
}

std::string LabeledToySpecHash(const LabeledToySpec& spec) {
  std::ostringstream text;
  text << spec.num_classes << ';' << FormatReal(spec.noise) << ';'
       << spec.train_per_class << ';' << spec.test_per_class;
  for (const auto& t : spec.templates) {
    text << ';' << t.height << 'x' << t.width << 'x' << t.channels;
    for (Eigen::Index i = 0; i < t.size(); ++i) text << ',' << FormatReal(t.data[i]);
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(text.str())));
  return hex;
}

void WriteDatasetCsv(const std::vector<LabeledSample>& samples,
                     const std::string& spec_hash, const std::string& path) {
  if (samples.empty()) throw std::invalid_argument("empty split");
  const ImageTensor& first = samples.front().image;
  std::vector<std::string> header;
  for (Eigen::Index i = 0; i < first.size(); ++i) {
    header.push_back("p" + std::to_string(i));
  }
  header.push_back("label");
  std::vector<CsvRecord> records;
  for (const auto& s : samples) {
    if (!s.image.SameShape(first)) throw std::invalid_argument("ragged split");
    CsvRecord r;
    for (Eigen::Index i = 0; i < s.image.size(); ++i) r.emplace_back(s.image.data[i]);
    r.emplace_back(std::int64_t{s.label});
    records.push_back(std::move(r));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# shape=" << first.height << 'x' << first.width << 'x' << first.channels
      << " spec=" << spec_hash << '\n'
      << RenderCsv(records, header);
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<LabeledSample> ReadDatasetCsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string first_line;
  std::getline(in, first_line);
  int h = 0, w = 0, c = 0;
  if (std::sscanf(first_line.c_str(), "# shape=%dx%dx%d", &h, &w, &c) != 3) {
    throw std::runtime_error("dataset CSV lacks a shape line: " + path);
  }
  const CsvTable table = ReadCsv(path);
  std::vector<LabeledSample> samples;
  for (const auto& row : table.rows) {
    if (row.size() != static_cast<size_t>(h) * w * c + 1) {
      throw std::runtime_error("dataset row width mismatch in " + path);
    }
    LabeledSample s{ImageTensor(h, w, c), std::stoi(row.back())};
    for (Eigen::Index i = 0; i < s.image.size(); ++i) s.image.data[i] = ParseReal(row[i]);
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace texp
