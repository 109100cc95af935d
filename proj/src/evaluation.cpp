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

#include "msunique/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "msunique/error.hpp"
#include "msunique/simplex.hpp"
#include "msunique/stats.hpp"

namespace msunique {

namespace {

constexpr double kKlFloor = 1e-10;

Eigen::VectorXd normalized_histogram(const Eigen::VectorXd& v, double lo,
                                     double width, int bins) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(bins);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    auto k = static_cast<Eigen::Index>(std::floor((v(i) - lo) / width));
    h(std::clamp<Eigen::Index>(k, 0, bins - 1)) += 1.0;
  }
  return h / double(v.size());
}

Eigen::VectorXd floored(const Eigen::VectorXd& h) {
  Eigen::VectorXd f = h.cwiseMax(kKlFloor);
  return f / f.sum();
}

double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  return (p.array() * (p.array() / q.array()).log()).sum();
}

}  // namespace

double logistic_map(const LogisticParams& b, double x) {
  return b[0] * (0.5 - 1.0 / (1.0 + std::exp(b[1] * (x - b[2])))) + b[3] * x +
         b[4];
}

Eigen::VectorXd logistic_map(const LogisticParams& b, const Eigen::VectorXd& x) {
  return x.unaryExpr([&](double v) { return logistic_map(b, v); });
}

RegressionFit fit_logistic(const Eigen::VectorXd& objective,
                           const Eigen::VectorXd& subjective) {
  if (objective.size() != subjective.size()) throw DataError("length mismatch");
  if (objective.size() < 5) throw DataError("too few points for logistic fit");
  if (!objective.allFinite() || !subjective.allFinite()) {
    throw DataError("non-finite scores");
  }
  const double n = double(objective.size());
  const double mean_x = objective.mean();
  const double var_x = (objective.array() - mean_x).square().sum() / n;
  if (!(var_x > 0.0)) throw DataError("constant objective scores");
  const double mean_y = subjective.mean();

  auto sse = [&](const Eigen::VectorXd& b) {
    const LogisticParams p{b(0), b(1), b(2), b(3), b(4)};
    return (logistic_map(p, objective) - subjective).squaredNorm();
  };
  auto run = [&](const Eigen::VectorXd& start) {
    SimplexResult r = minimize_nelder_mead(sse, start);
    // One restart from the best vertex re-expands a collapsed simplex.
    SimplexResult again = minimize_nelder_mead(sse, r.x);
    return again.f <= r.f ? again : r;
  };

  Eigen::VectorXd from_default(5);
  from_default << subjective.maxCoeff() - subjective.minCoeff(),
      1.0 / std::sqrt(var_x), mean_x, 0.0, mean_y;

  // Ordinary least-squares line, embedded with b1 = 0.
  const double slope =
      ((objective.array() - mean_x) * (subjective.array() - mean_y)).sum() /
      (var_x * n);
  Eigen::VectorXd from_line(5);
  from_line << 0.0, 1.0 / std::sqrt(var_x), mean_x, slope,
      mean_y - slope * mean_x;

  SimplexResult best = run(from_default);
  SimplexResult linear = run(from_line);
  if (linear.f < best.f) best = linear;

  RegressionFit fit;
  for (int i = 0; i < 5; ++i) fit.params[std::size_t(i)] = best.x(i);
  fit.regressed = logistic_map(fit.params, objective);
  fit.residual_sse = (fit.regressed - subjective).squaredNorm();
  return fit;
}

double pcc(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return stats::pearson(a, b);
}

double srocc(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return spearman(a, b);
}

double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return stats::rmse(a, b);
}

double outlier_ratio(const Eigen::VectorXd& regressed,
                     const std::vector<SubjectiveEntry>& entries) {
  if (Eigen::Index(entries.size()) != regressed.size()) {
    throw DataError("length mismatch");
  }
  if (entries.empty()) throw DataError("outlier ratio unavailable: no entries");
  std::size_t outliers = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].score_std) {
      throw DataError("outlier ratio unavailable: missing subjective std");
    }
    const double diff = std::abs(regressed(Eigen::Index(i)) - entries[i].subjective_score);
    if (diff > 2.0 * *entries[i].score_std) ++outliers;
  }
  return double(outliers) / double(entries.size());
}

HistogramDistances histogram_distances(const Eigen::VectorXd& a,
                                       const Eigen::VectorXd& b, int bins) {
  if (a.size() == 0 || b.size() == 0) throw DataError("empty sample");
  if (bins < 1) throw DataError("bin count must be positive");
  if (!a.allFinite() || !b.allFinite()) throw DataError("non-finite sample");
  const double lo = std::min(a.minCoeff(), b.minCoeff());
  const double hi = std::max(a.maxCoeff(), b.maxCoeff());
  HistogramDistances d;
  if (!(hi > lo)) return d;

  const double width = (hi - lo) / bins;
  const Eigen::VectorXd ha = normalized_histogram(a, lo, width, bins);
  const Eigen::VectorXd hb = normalized_histogram(b, lo, width, bins);

  double cum_a = 0.0, cum_b = 0.0;
  for (int k = 0; k < bins; ++k) {
    cum_a += ha(k);
    cum_b += hb(k);
    d.emd += std::abs(cum_a - cum_b);
  }
  d.emd /= bins;
  const Eigen::VectorXd pa = floored(ha), pb = floored(hb);
  d.kl = kl_divergence(pa, pb);
  const Eigen::VectorXd m = 0.5 * (pa + pb);
  d.js = 0.5 * kl_divergence(pa, m) + 0.5 * kl_divergence(pb, m);
  d.hi = 1.0 - ha.cwiseMin(hb).sum();
  d.l2 = (ha - hb).norm();
  // Rounding can leave tiny negatives where the histograms agree.
  d.kl = std::max(d.kl, 0.0);
  d.js = std::max(d.js, 0.0);
  d.hi = std::max(d.hi, 0.0);
  return d;
}

EvaluationReport evaluate(const Eigen::VectorXd& objective,
                          const std::vector<SubjectiveEntry>& entries,
                          int bins) {
  if (Eigen::Index(entries.size()) != objective.size()) {
    throw DataError("scores and manifest differ in length");
  }
  Eigen::VectorXd subjective(objective.size());
  bool all_std = !entries.empty();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    subjective(Eigen::Index(i)) = entries[i].subjective_score;
    all_std = all_std && entries[i].score_std.has_value();
  }
  EvaluationReport r;
  r.n = objective.size();
  r.bins = bins;
  r.fit = fit_logistic(objective, subjective);
  r.pcc = pcc(r.fit.regressed, subjective);
  r.srocc = srocc(r.fit.regressed, subjective);
  r.rmse = rmse(r.fit.regressed, subjective);
  if (all_std) r.outlier_ratio = outlier_ratio(r.fit.regressed, entries);
  r.hist = histogram_distances(r.fit.regressed, subjective, bins);
  return r;
}

EvaluationReport evaluate(const std::vector<QualityRecord>& records,
                          const std::vector<SubjectiveEntry>& entries,
                          int bins) {
  Eigen::VectorXd objective(Eigen::Index(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    objective(Eigen::Index(i)) = records[i].score;
  }
  return evaluate(objective, entries, bins);
}

std::string format_report_text(
    const EvaluationReport& report,
    const std::vector<std::pair<std::string, std::string>>& config) {
  std::ostringstream out;
  for (const auto& [k, v] : config) out << "config." << k << '=' << v << '\n';
  out << "n=" << report.n << '\n';
  out << "pcc=" << format_double(report.pcc) << '\n';
  out << "srocc=" << format_double(report.srocc) << '\n';
  out << "rmse=" << format_double(report.rmse) << '\n';
  if (report.outlier_ratio) {
    out << "outlier_ratio=" << format_double(*report.outlier_ratio) << '\n';
  } else {
    out << "outlier_ratio=unavailable\n";
  }
  out << "bins=" << report.bins << '\n';
  out << "emd=" << format_double(report.hist.emd) << '\n';
  out << "kl=" << format_double(report.hist.kl) << '\n';
  out << "js=" << format_double(report.hist.js) << '\n';
  out << "hi=" << format_double(report.hist.hi) << '\n';
  out << "l2=" << format_double(report.hist.l2) << '\n';
  for (std::size_t i = 0; i < report.fit.params.size(); ++i) {
    out << "beta" << i + 1 << '=' << format_double(report.fit.params[i]) << '\n';
  }
  out << "residual_sse=" << format_double(report.fit.residual_sse) << '\n';
  return out.str();
}

std::string format_report_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "n,pcc,srocc,rmse,outlier_ratio,bins,emd,kl,js,hi,l2\n";
  out << report.n << ',' << format_double(report.pcc) << ','
      << format_double(report.srocc) << ',' << format_double(report.rmse) << ',';
  if (report.outlier_ratio) out << format_double(*report.outlier_ratio);
  out << ',' << report.bins << ',' << format_double(report.hist.emd) << ','
      << format_double(report.hist.kl) << ',' << format_double(report.hist.js)
      << ',' << format_double(report.hist.hi) << ','
      << format_double(report.hist.l2) << '\n';
  return out.str();
}

void export_scatter(const Eigen::VectorXd& objective,
                    const Eigen::VectorXd& regressed,
                    const Eigen::VectorXd& subjective,
                    const std::filesystem::path& path) {
  if (objective.size() != regressed.size() ||
      objective.size() != subjective.size()) {
    throw DataError("length mismatch");
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path.string());
  out << "objective,regressed,subjective\n";
  for (Eigen::Index i = 0; i < objective.size(); ++i) {
    out << format_double(objective(i)) << ',' << format_double(regressed(i))
        << ',' << format_double(subjective(i)) << '\n';
  }
}

}  // namespace msunique
