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

#ifndef MSUNIQUE_SCORING_HPP_
#define MSUNIQUE_SCORING_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "msunique/colorspace.hpp"
#include "msunique/filterbank.hpp"
#include "msunique/imageio.hpp"

namespace msunique {

// Weighted responses of every filter of every model over all tiles of one
// image. Layout is patch-major, then model order, then filter index, so entry
// i belongs to filter i % filter_weights.size().
struct FeatureVector {
  Eigen::VectorXd values;
  Eigen::VectorXd filter_weights;
  bool suppressed = false;
};

// Zeroes every entry whose unweighted response (value / weight) is below tau.
FeatureVector suppress(FeatureVector v, double tau);

// Weighted, suppressed features under the bank's frozen whitening.
FeatureVector image_features(const FilterBank& bank, const YgcrImage& img);

// Features before suppression; image_features == suppress(this, bank tau).
FeatureVector weighted_responses(const FilterBank& bank, const YgcrImage& img);

// Spearman rank correlation with average ranks for ties.
double spearman(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct QualityRecord {
  std::string reference_id;
  std::string distorted_id;
  double spearman_rho = 0.0;
  double score = 0.0;  // spearman_rho^10
};

double score_from_rho(double rho);

QualityRecord quality_score(const FilterBank& bank, const RgbImage& reference,
                            const RgbImage& distorted);

// Scores every manifest pair on `workers` threads; output is in input order.
struct ScorePair {
  std::filesystem::path distorted_path;
  std::filesystem::path reference_path;
};
std::vector<QualityRecord> score_batch(const FilterBank& bank,
                                       const std::vector<ScorePair>& pairs,
                                       unsigned workers = 0);

// CSV `dist_path,ref_path,rho,score`, 17 significant digits.
void write_scores_csv(const std::vector<QualityRecord>& records,
                      const std::filesystem::path& path);

}  // namespace msunique

#endif  // MSUNIQUE_SCORING_HPP_
