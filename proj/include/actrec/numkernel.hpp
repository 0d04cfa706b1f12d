// Copyright 2026 The actrec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "actrec/errors.hpp"
#include "actrec/rng.hpp"

namespace actrec {

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

template <class Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.derived().array().isFinite().all();
}

template <class MatDerived, class VecDerived>
auto matvec(const Eigen::MatrixBase<MatDerived>& w,
            const Eigen::MatrixBase<VecDerived>& x) {
  using Scalar = typename MatDerived::Scalar;
  require(w.cols() == x.size(),
          "matvec: matrix has " + std::to_string(w.cols()) +
              " columns but vector has " + std::to_string(x.size()) +
              " entries");
  return Vector<Scalar>(w * x);
}

/// Max-subtracted softmax. Throws NumericError on a non-finite logit.
template <class Derived>
auto softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  if (!all_finite(logits)) throw NumericError("softmax: non-finite logit");
  Vector<Scalar> p = (logits.array() - logits.maxCoeff()).exp().matrix();
  p /= p.sum();
  return p;
}

/// log(sum(exp(x))) with max subtraction.
template <class Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& x) {
  const auto m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

/// Indices of the K largest scores, descending; equal scores are ordered by
/// ascending index.
template <class Derived>
std::vector<Index> topk(const Eigen::MatrixBase<Derived>& scores, Index k) {
  require(k >= 0 && k <= scores.size(),
          "topk: K=" + std::to_string(k) + " exceeds vector length " +
              std::to_string(scores.size()));
  std::vector<Index> idx(static_cast<std::size_t>(scores.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  const auto& s = scores.derived();
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                    [&s](Index a, Index b) {
                      return s(a) > s(b) || (s(a) == s(b) && a < b);
                    });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

/// Whether `target` is among the K best scores under the topk ordering,
/// without materializing the list.
template <class Derived>
bool in_topk(const Eigen::MatrixBase<Derived>& scores, Index target,
             Index k) {
  const auto& s = scores.derived();
  const auto st = s(target);
  Index ahead = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > st || (s(i) == st && i < target)) {
      if (++ahead >= k) return false;
    }
  }
  return true;
}

/// Uniform Glorot initialization in [-s, s], s = sqrt(6 / (rows + cols)).
/// Entries are drawn in row-major order.
template <class Scalar = double>
Matrix<Scalar> glorot_init(Rng& rng, Index rows, Index cols) {
  require(rows >= 1 && cols >= 1, "glorot_init: empty shape");
  const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix<Scalar> w(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) w(i, j) = Scalar(rng.uniform(-s, s));
  return w;
}

template <class Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

}  // namespace actrec
