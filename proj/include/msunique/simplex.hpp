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

#ifndef MSUNIQUE_SIMPLEX_HPP_
#define MSUNIQUE_SIMPLEX_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace msunique {

struct SimplexOptions {
  int max_iterations = 5000;
  // Converged when every vertex value is within this (relative) spread of
  // the best one.
  double value_tolerance = 1e-10;
  // Also require the vertices to have collapsed; equal values alone can
  // straddle a minimum.
  double point_tolerance = 1e-10;
};

struct SimplexResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Nelder-Mead downhill simplex (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2). The initial simplex perturbs each coordinate of x0 by 5%, or
// by `zero_step` when that coordinate is zero.
template <typename Fn>
SimplexResult minimize_nelder_mead(Fn&& f, const Eigen::VectorXd& x0,
                                   const SimplexOptions& opt = {},
                                   double zero_step = 2.5e-4) {
  const Eigen::Index n = x0.size();
  std::vector<Eigen::VectorXd> v(std::size_t(n + 1), x0);
  std::vector<double> fv(std::size_t(n + 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    double& c = v[std::size_t(i + 1)](i);
    c = c != 0.0 ? 1.05 * c : zero_step;
  }
  auto eval = [&](const Eigen::VectorXd& x) {
    const double y = f(x);
    return std::isnan(y) ? std::numeric_limits<double>::infinity() : y;
  };
  for (std::size_t i = 0; i < v.size(); ++i) fv[i] = eval(v[i]);

  std::vector<std::size_t> order(v.size());
  SimplexResult r;
  for (r.iterations = 0; r.iterations < opt.max_iterations; ++r.iterations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back();
    const std::size_t second = order[order.size() - 2];
    double spread = 0.0;
    for (const auto& vi : v) spread = std::max(spread, (vi - v[best]).lpNorm<Eigen::Infinity>());
    if (std::abs(fv[worst] - fv[best]) <=
            opt.value_tolerance * std::max(1.0, std::abs(fv[best])) &&
        spread <= opt.point_tolerance * std::max(1.0, v[best].lpNorm<Eigen::Infinity>())) {
      r.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += v[order[i]];
    centroid /= double(n);

    const Eigen::VectorXd xr = centroid + (centroid - v[worst]);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - v[worst]);
      const double fe = eval(xe);
      if (fe < fr) {
        v[worst] = xe;
        fv[worst] = fe;
      } else {
        v[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      v[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                       : Eigen::VectorXd(centroid + 0.5 * (v[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[worst])) {
      v[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i == best) continue;
      v[i] = v[best] + 0.5 * (v[i] - v[best]);
      fv[i] = eval(v[i]);
    }
  }
  const auto best = std::size_t(std::min_element(fv.begin(), fv.end()) - fv.begin());
  r.x = v[best];
  r.f = fv[best];
  return r;
}

}  // namespace msunique

#endif  // MSUNIQUE_SIMPLEX_HPP_
