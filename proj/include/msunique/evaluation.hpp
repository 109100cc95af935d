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

#ifndef MSUNIQUE_EVALUATION_HPP_
#define MSUNIQUE_EVALUATION_HPP_

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "msunique/imageio.hpp"
#include "msunique/scoring.hpp"

namespace msunique {

// Q(x) = b1 * (1/2 - 1/(1 + exp(b2 (x - b3)))) + b4 x + b5
using LogisticParams = std::array<double, 5>;

double logistic_map(const LogisticParams& b, double x);
Eigen::VectorXd logistic_map(const LogisticParams& b, const Eigen::VectorXd& x);

struct RegressionFit {
  LogisticParams params{};
  Eigen::VectorXd regressed;
  double residual_sse = 0.0;
};

// Least-squares fit of the five-parameter logistic by Nelder-Mead; never
// worse than the best straight-line fit, which is the b1 = 0 subfamily.
RegressionFit fit_logistic(const Eigen::VectorXd& objective,
                           const Eigen::VectorXd& subjective);

double pcc(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double srocc(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Fraction of predictions more than two subjective standard deviations away
// from the subjective score. Every entry must carry a std.
double outlier_ratio(const Eigen::VectorXd& regressed,
                     const std::vector<SubjectiveEntry>& entries);

struct HistogramDistances {
  double emd = 0.0;
  double kl = 0.0;
  double js = 0.0;
  double hi = 0.0;  // 1 - intersection
  double l2 = 0.0;
};

inline constexpr int kDefaultHistogramBins = 10;

// Both samples binned on `bins` equal bins spanning their union range.
HistogramDistances histogram_distances(const Eigen::VectorXd& a,
                                       const Eigen::VectorXd& b, int bins);

struct EvaluationReport {
  RegressionFit fit;
  double pcc = 0.0;
  double srocc = 0.0;
  double rmse = 0.0;
  std::optional<double> outlier_ratio;
  HistogramDistances hist;
  Eigen::Index n = 0;
  int bins = kDefaultHistogramBins;
};

EvaluationReport evaluate(const Eigen::VectorXd& objective,
                          const std::vector<SubjectiveEntry>& entries,
                          int bins = kDefaultHistogramBins);
EvaluationReport evaluate(const std::vector<QualityRecord>& records,
                          const std::vector<SubjectiveEntry>& entries,
                          int bins = kDefaultHistogramBins);

// `key=value` lines; `config` entries are echoed first with a "config."
// prefix.
std::string format_report_text(
    const EvaluationReport& report,
    const std::vector<std::pair<std::string, std::string>>& config = {});
// One header row and one value row.
std::string format_report_csv(const EvaluationReport& report);

// CSV `objective,regressed,subjective`, 17 significant digits.
void export_scatter(const Eigen::VectorXd& objective,
                    const Eigen::VectorXd& regressed,
                    const Eigen::VectorXd& subjective,
                    const std::filesystem::path& path);

}  // namespace msunique

#endif  // MSUNIQUE_EVALUATION_HPP_
