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

#ifndef TEXP_TEXP_MATH_H_
#define TEXP_TEXP_MATH_H_

// Closed-form pieces of the tilted-exponential model: implicitly normalized
// matched-filter activations, the tilted softmax, the (balanced) TEXP
// log-likelihood objectives and their analytic weight gradients.
//
// A filter bank is an M x D matrix whose rows are the templates w_i. All
// exponentials go through max-subtraction / log-sum-exp.

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "texp/tensor.h"

namespace texp {

template <typename Scalar>
using FilterBank = Matrix<Scalar>;
template <typename Scalar>
using GradientBank = Matrix<Scalar>;

namespace internal {

inline void RequirePositiveTilt(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("tilt must be positive and finite");
  }
}

template <typename Scalar>
Scalar RequireNonzeroNorm(Scalar norm) {
  if (!(norm > Scalar(0))) {
    throw std::domain_error("filter has zero norm");
  }
  return norm;
}

}  // namespace internal

template <typename Derived>
void ValidateFilterBank(const Eigen::MatrixBase<Derived>& bank) {
  if (bank.rows() < 1 || bank.cols() < 1) {
    throw std::invalid_argument("filter bank must have M >= 1, D >= 1");
  }
  if (!bank.allFinite()) throw std::domain_error("filter bank is not finite");
  for (Eigen::Index i = 0; i < bank.rows(); ++i) {
    internal::RequireNonzeroNorm(bank.row(i).norm());
  }
}

// x^T w / ||w||.
template <typename DerivedX, typename DerivedW>
typename DerivedX::Scalar NormalizedActivation(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedW>& w) {
  using Scalar = typename DerivedX::Scalar;
  if (x.size() != w.size()) throw std::invalid_argument("dimension mismatch");
  const Scalar norm = internal::RequireNonzeroNorm<Scalar>(w.norm());
  return x.reshaped().dot(w.reshaped()) / norm;
}

// One activation per filter row.
template <typename DerivedX, typename DerivedB>
Vector<typename DerivedX::Scalar> NormalizedActivations(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedB>& bank) {
  if (x.size() != bank.cols()) throw std::invalid_argument("dimension mismatch");
  ValidateFilterBank(bank);
  return (bank * x.reshaped()).cwiseQuotient(bank.rowwise().norm());
}

// log((1/n) sum exp(v_j)).
template <typename Derived>
typename Derived::Scalar LogMeanExp(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (v.size() == 0) throw std::invalid_argument("empty input");
  const Scalar peak = v.maxCoeff();
  const Scalar sum = (v.array() - peak).exp().sum();
  return peak + std::log(sum) - std::log(static_cast<Scalar>(v.size()));
}

// sigma(t a)_i = exp(t a_i) / sum_j exp(t a_j).
template <typename Derived>
Vector<typename Derived::Scalar> TiltedSoftmax(
    const Eigen::MatrixBase<Derived>& a, typename Derived::Scalar t) {
  using Scalar = typename Derived::Scalar;
  internal::RequirePositiveTilt(static_cast<double>(t));
  Vector<Scalar> z = t * a.reshaped();
  z.array() = (z.array() - z.maxCoeff()).exp();
  return z / z.sum();
}

// log((1/M) sum exp(t a_i)).
template <typename Derived>
typename Derived::Scalar TexpObjective(const Eigen::MatrixBase<Derived>& a,
                                       typename Derived::Scalar t) {
  internal::RequirePositiveTilt(static_cast<double>(t));
  return LogMeanExp((t * a).eval());
}

// (1/t) log((1/M) sum exp(t a_i)); tends to max_i a_i - log(M)/t for large t.
template <typename Derived>
typename Derived::Scalar TexpObjectiveScaled(const Eigen::MatrixBase<Derived>& a,
                                             typename Derived::Scalar t) {
  return TexpObjective(a, t) / t;
}

// TEXP objective on mean-centered activations. Non-negative, zero iff all a_i
// are equal.
template <typename Derived>
typename Derived::Scalar BalancedTexpObjective(
    const Eigen::MatrixBase<Derived>& a, typename Derived::Scalar t) {
  return TexpObjective((a.array() - a.mean()).matrix().eval(), t);
}

// x minus its component along w.
template <typename DerivedX, typename DerivedW>
Vector<typename DerivedX::Scalar> OrthProject(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedW>& w) {
  using Scalar = typename DerivedX::Scalar;
  if (x.size() != w.size()) throw std::invalid_argument("dimension mismatch");
  const Scalar norm = internal::RequireNonzeroNorm<Scalar>(w.norm());
  const Vector<Scalar> unit = w.reshaped() / norm;
  const Vector<Scalar> xv = x.reshaped();
  return xv - xv.dot(unit) * unit;
}

namespace internal {

// Row i = weight_i * P_perp(w_i) x / ||w_i||.
template <typename DerivedX, typename DerivedB, typename DerivedS>
GradientBank<typename DerivedX::Scalar> WeightedProjections(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedB>& bank,
    const Eigen::MatrixBase<DerivedS>& weights) {
  using Scalar = typename DerivedX::Scalar;
  GradientBank<Scalar> grad(bank.rows(), bank.cols());
  for (Eigen::Index i = 0; i < bank.rows(); ++i) {
    const Scalar norm = bank.row(i).norm();
    grad.row(i) = (weights[i] / norm) * OrthProject(x, bank.row(i)).transpose();
  }
  return grad;
}

}  // namespace internal

// Gradient of TexpObjective w.r.t. every filter:
//   grad_i = t * sigma_i(t a) * P_perp(w_i) x / ||w_i||.
template <typename DerivedX, typename DerivedB>
GradientBank<typename DerivedX::Scalar> TexpGrad(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedB>& bank,
    typename DerivedX::Scalar t) {
  const auto a = NormalizedActivations(x, bank);
  const auto p = TiltedSoftmax(a, t);
  return internal::WeightedProjections(x, bank, (t * p).eval());
}

// Gradient of BalancedTexpObjective: the softmax weight becomes
// sigma_i - 1/M, so below-average filters rotate away from x.
template <typename DerivedX, typename DerivedB>
GradientBank<typename DerivedX::Scalar> BalancedTexpGrad(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedB>& bank,
    typename DerivedX::Scalar t) {
  using Scalar = typename DerivedX::Scalar;
  const auto a = NormalizedActivations(x, bank);
  const auto p = TiltedSoftmax(a, t);
  const Scalar uniform = Scalar(1) / static_cast<Scalar>(bank.rows());
  return internal::WeightedProjections(
      x, bank, (t * (p.array() - uniform)).matrix().eval());
}

// |d sigma_1 / d(delta_a)| for a two-neuron softmax:
// t f(t delta) f(-t delta) with f the logistic function, written as
// t / (2 + 2 cosh(t delta)) so it never forms an inf/inf ratio.
template <typename Scalar>
Scalar SigmoidSensitivity(Scalar delta_a, Scalar t) {
  internal::RequirePositiveTilt(static_cast<double>(t));
  using std::cosh;
  return t / (Scalar(2) + Scalar(2) * cosh(t * delta_a));
}

}  // namespace texp

#endif  // TEXP_TEXP_MATH_H_
