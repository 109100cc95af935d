// Copyright 2026 The MS-UNIQUE Authors. All Rights Reserved.
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

#ifndef MSUNIQUE_STATS_HPP_
#define MSUNIQUE_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "msunique/error.hpp"

namespace msunique::stats {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {

template <typename DerivedA, typename DerivedB>
void require_same_length(const Eigen::DenseBase<DerivedA>& a,
                         const Eigen::DenseBase<DerivedB>& b,
                         Eigen::Index minimum) {
  if (a.size() != b.size()) throw DataError("length mismatch");
  if (a.size() < minimum) throw DataError("too few samples");
}

}  // namespace detail

// Pearson product-moment correlation, clamped to [-1, 1].
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar pearson(const Eigen::DenseBase<DerivedA>& a,
                                  const Eigen::DenseBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  detail::require_same_length(a, b, 2);
  const Vector<Scalar> x = a.derived().template cast<Scalar>();
  const Vector<Scalar> y = b.derived().template cast<Scalar>();
  const Vector<Scalar> dx = x.array() - x.mean();
  const Vector<Scalar> dy = y.array() - y.mean();
  const Scalar sxx = dx.squaredNorm();
  const Scalar syy = dy.squaredNorm();
  if (!(sxx > 0) || !(syy > 0)) throw DataError("zero variance");
  const Scalar r = dx.dot(dy) / (std::sqrt(sxx) * std::sqrt(syy));
  return std::clamp(r, Scalar(-1), Scalar(1));
}

// 1-based ranks; tied values share the average of the ranks they span.
template <typename Derived>
Vector<typename Derived::Scalar> average_ranks(
    const Eigen::DenseBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto& v = values.derived();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return v(i) < v(j); });
  Vector<Scalar> ranks(n);
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && v(order[std::size_t(end)]) == v(order[std::size_t(start)])) {
      ++end;
    }
    // Ranks start+1 .. end, averaged.
    const Scalar avg = Scalar(start + 1 + end) / Scalar(2);
    for (Eigen::Index k = start; k < end; ++k) ranks(order[std::size_t(k)]) = avg;
    start = end;
  }
  return ranks;
}

// Spearman rank-order correlation: Pearson on average-tie ranks.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar spearman(const Eigen::DenseBase<DerivedA>& a,
                                   const Eigen::DenseBase<DerivedB>& b) {
  detail::require_same_length(a, b, 2);
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  try {
    return pearson(ra, rb);
  } catch (const DataError&) {
    throw DataError("zero rank variance");
  }
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar rmse(const Eigen::DenseBase<DerivedA>& a,
                               const Eigen::DenseBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  detail::require_same_length(a, b, 1);
  const Scalar ss =
      (a.derived().template cast<Scalar>() - b.derived().template cast<Scalar>())
          .squaredNorm();
  return std::sqrt(ss / Scalar(a.size()));
}

// Sample kurtosis m4/m2^2 with the finite-sample bias correction; a normal
// population yields 3.
template <typename Derived>
typename Derived::Scalar kurtosis_bias_corrected(
    const Eigen::DenseBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  if (n < 4) throw DataError("too few samples");
  const Vector<Scalar> d = x.derived().array() - x.derived().mean();
  const Scalar m2 = d.squaredNorm() / Scalar(n);
  if (!(m2 > 0)) throw DataError("zero variance");
  const Scalar m4 = d.array().square().square().sum() / Scalar(n);
  const Scalar k1 = m4 / (m2 * m2);
  const Scalar nn = Scalar(n);
  return ((nn + 1) * k1 - 3 * (nn - 1)) * (nn - 1) / ((nn - 2) * (nn - 3)) + 3;
}

}  // namespace msunique::stats

#endif  // MSUNIQUE_STATS_HPP_
