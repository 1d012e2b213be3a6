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

#include "texp/rng.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace texp {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

SeededRng::SeededRng(std::uint64_t seed) : key_(Mix64(seed + kGolden)) {}

SeededRng SeededRng::Substream(std::string_view name) const {
  return SeededRng(Mix64(key_ ^ Mix64(Fnv1a64(name))), 0);
}

SeededRng SeededRng::Substream(std::uint64_t index) const {
  return SeededRng(Mix64(key_ + Mix64(index ^ 0x5851F42D4C957F2DULL)), 0);
}

std::uint64_t SeededRng::NextU64() {
  // Two mixing rounds over (key, counter); one round leaves visible
  // correlation between adjacent counters.
  const std::uint64_t n = counter_++;
  return Mix64(Mix64(key_ ^ (n * kGolden)) + n);
}

double SeededRng::Uniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::UniformInt(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("UniformInt needs n > 0");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = NextU64();
  } while (v >= limit);
  return v % n;
}

double SeededRng::Normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; 1 - U keeps the log argument in (0, 1].
  const double u1 = 1.0 - Uniform();
  const double u2 = Uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Vector<double> GaussianVector(SeededRng& rng, const Vector<double>& mean,
                              double std) {
  if (!(std >= 0.0)) throw std::invalid_argument("std must be non-negative");
  Vector<double> out = mean;
  if (std == 0.0) return out;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += std * rng.Normal();
  return out;
}

}  // namespace texp
