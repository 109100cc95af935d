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

#ifndef MSUNIQUE_LBFGS_HPP_
#define MSUNIQUE_LBFGS_HPP_

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace msunique {

struct LbfgsOptions {
  int max_iterations = 100;
  int memory = 10;
  // Strong Wolfe constants: sufficient decrease and curvature.
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search_evaluations = 30;
  // Stop when ||g||_inf falls below this.
  double gradient_tolerance = 1e-12;
};

enum class LbfgsStatus {
  kMaxIterations,
  kGradientConverged,
  kLineSearchFailed,
  kNonFiniteStart,
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  // f at the start point, then after every accepted iteration.
  std::vector<double> trace;
  int iterations = 0;
  LbfgsStatus status = LbfgsStatus::kMaxIterations;
};

namespace detail {

struct LineSearchPoint {
  double alpha = 0.0;
  double f = 0.0;
  double slope = 0.0;  // directional derivative g(x + alpha d) . d
  Eigen::VectorXd g;
};

// Minimizer of the cubic matching f and slope at both ends, or the midpoint
// when that cubic is degenerate or lands too close to an end.
inline double cubic_step(const LineSearchPoint& lo, const LineSearchPoint& hi) {
  const double a = lo.alpha, b = hi.alpha;
  const double mid = 0.5 * (a + b);
  const double d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (a - b);
  const double disc = d1 * d1 - lo.slope * hi.slope;
  if (!(disc >= 0.0) || !std::isfinite(d1)) return mid;
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double denom = hi.slope - lo.slope + 2.0 * d2;
  if (denom == 0.0) return mid;
  const double t = b - (b - a) * (hi.slope + d2 - d1) / denom;
  const double lo_edge = std::min(a, b) + 0.1 * std::abs(b - a);
  const double hi_edge = std::max(a, b) - 0.1 * std::abs(b - a);
  if (!std::isfinite(t) || t < lo_edge || t > hi_edge) return mid;
  return t;
}

}  // namespace detail

// Limited-memory BFGS with a strong-Wolfe bracketing/zoom line search.
// `fg(x, g)` returns f(x) and writes the gradient into g. Every accepted
// step satisfies sufficient decrease, so the recorded trace never increases.
template <typename ObjectiveFn>
LbfgsResult minimize_lbfgs(ObjectiveFn&& fg, Eigen::VectorXd x0,
                           const LbfgsOptions& opt) {
  using detail::LineSearchPoint;
  LbfgsResult result;
  result.x = std::move(x0);
  Eigen::VectorXd g(result.x.size());
  result.f = fg(result.x, g);
  result.trace.push_back(result.f);
  if (!std::isfinite(result.f) || !g.allFinite()) {
    result.status = LbfgsStatus::kNonFiniteStart;
    return result;
  }

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd trial_x(result.x.size());

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() <= opt.gradient_tolerance) {
      result.status = LbfgsStatus::kGradientConverged;
      return result;
    }

    // Two-loop recursion.
    Eigen::VectorXd d = -g;
    std::vector<double> alphas(s_hist.size());
    for (int i = int(s_hist.size()) - 1; i >= 0; --i) {
      alphas[std::size_t(i)] = rho_hist[std::size_t(i)] * s_hist[std::size_t(i)].dot(d);
      d -= alphas[std::size_t(i)] * y_hist[std::size_t(i)];
    }
    if (!s_hist.empty()) {
      d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alphas[i] - beta) * s_hist[i];
    }
    double slope0 = g.dot(d);
    if (!(slope0 < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      slope0 = -g.squaredNorm();
    }

    const double f0 = result.f;
    auto evaluate = [&](double alpha) {
      LineSearchPoint p;
      p.alpha = alpha;
      p.g.resize(g.size());
      trial_x = result.x + alpha * d;
      p.f = fg(trial_x, p.g);
      p.slope = p.g.dot(d);
      return p;
    };
    auto finite = [](const LineSearchPoint& p) {
      return std::isfinite(p.f) && std::isfinite(p.slope);
    };
    auto armijo = [&](const LineSearchPoint& p) {
      return p.f <= f0 + opt.c1 * p.alpha * slope0;
    };
    auto curvature = [&](const LineSearchPoint& p) {
      return std::abs(p.slope) <= -opt.c2 * slope0;
    };

    int evals = 0;
    bool found = false;
    LineSearchPoint accepted;

    // Zoom inside [lo, hi]; lo always satisfies sufficient decrease.
    auto zoom = [&](LineSearchPoint lo, LineSearchPoint hi) {
      while (evals < opt.max_line_search_evaluations) {
        const double alpha = finite(hi) ? detail::cubic_step(lo, hi)
                                        : 0.5 * (lo.alpha + hi.alpha);
        LineSearchPoint p = evaluate(alpha);
        ++evals;
        if (!finite(p) || !armijo(p) || p.f >= lo.f) {
          hi = std::move(p);
        } else {
          if (curvature(p)) {
            accepted = std::move(p);
            found = true;
            return;
          }
          if (p.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
          lo = std::move(p);
        }
        if (std::abs(hi.alpha - lo.alpha) <=
            std::numeric_limits<double>::epsilon() * std::max(1.0, lo.alpha)) {
          break;
        }
      }
      // Fall back to the best sufficient-decrease point seen.
      if (lo.alpha > 0.0) {
        accepted = std::move(lo);
        found = true;
      }
    };

    LineSearchPoint prev;
    prev.alpha = 0.0;
    prev.f = f0;
    prev.slope = slope0;
    prev.g = g;
    double alpha = s_hist.empty() ? std::min(1.0, 1.0 / d.norm()) : 1.0;
    while (evals < opt.max_line_search_evaluations) {
      LineSearchPoint p = evaluate(alpha);
      ++evals;
      if (!finite(p)) {
        // Step overshot into overflow; shrink toward the last good point.
        alpha = prev.alpha + 0.5 * (alpha - prev.alpha);
        continue;
      }
      if (!armijo(p) || (prev.alpha > 0.0 && p.f >= prev.f)) {
        zoom(prev, std::move(p));
        break;
      }
      if (curvature(p)) {
        accepted = std::move(p);
        found = true;
        break;
      }
      if (p.slope >= 0.0) {
        zoom(std::move(p), prev);
        break;
      }
      prev = std::move(p);
      alpha *= 2.0;
    }
    if (!found && prev.alpha > 0.0) {
      accepted = std::move(prev);
      found = true;
    }
    if (!found || !(accepted.f < f0)) {
      result.status = LbfgsStatus::kLineSearchFailed;
      return result;
    }

    Eigen::VectorXd s = accepted.alpha * d;
    Eigen::VectorXd y = accepted.g - g;
    result.x += s;
    result.f = accepted.f;
    g = std::move(accepted.g);
    result.trace.push_back(result.f);
    result.iterations = iter + 1;

    const double sy = s.dot(y);
    if (sy > 1e-10 * y.squaredNorm()) {
      if (int(s_hist.size()) == opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
  }
  result.status = LbfgsStatus::kMaxIterations;
  return result;
}

}  // namespace msunique

#endif  // MSUNIQUE_LBFGS_HPP_
