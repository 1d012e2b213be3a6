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

#ifndef TEXP_RNG_H_
#define TEXP_RNG_H_

#include <cstdint>
#include <string_view>

#include "texp/tensor.h"

namespace texp {

// Counter-based generator: the n-th draw is a pure hash of (key, n), so a
// named substream yields the same values no matter what other streams were
// consumed before it. Instances are single-owner.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  // Independent child stream; does not advance this stream.
  SeededRng Substream(std::string_view name) const;
  SeededRng Substream(std::uint64_t index) const;

  std::uint64_t NextU64();
  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  // Uniform integer on [0, n).
  std::uint64_t UniformInt(std::uint64_t n);
  double Normal();
  bool Bernoulli(double p) { return Uniform() < p; }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  SeededRng(std::uint64_t key, std::uint64_t counter)
      : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t Fnv1a64(std::string_view bytes);

// mean + std * z with z i.i.d. standard normal drawn from `rng`.
Vector<double> GaussianVector(SeededRng& rng, const Vector<double>& mean,
                              double std);

inline Vector<double> GaussianVector(SeededRng& rng, int dim, double std) {
  return GaussianVector(rng, Vector<double>::Zero(dim), std);
}

}  // namespace texp

#endif  // TEXP_RNG_H_
