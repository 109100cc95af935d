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

#ifndef MSUNIQUE_FILTERBANK_HPP_
#define MSUNIQUE_FILTERBANK_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "msunique/decoder.hpp"
#include "msunique/patchpipe.hpp"

namespace msunique {

// Stored as a byte in the bank file.
enum class FilterKind : std::uint8_t { kColor = 0, kNeutral = 1, kEdge = 2 };

struct FilterLabel {
  FilterKind kind = FilterKind::kNeutral;
  double kurtosis = 0.0;
  double weight = 1.0;
};

inline constexpr double kEdgeKurtosisThreshold = 5.0;
inline constexpr double kColorKurtosisThreshold = 2.0;
inline constexpr double kDefaultSuppressionTau = 0.025;
inline constexpr double kDefaultWhiteningEpsilon = 0.1;

// Edge (> edge_threshold) weighs 2, Color (< color_threshold) weighs 0.5,
// anything between is Neutral with weight 1.
FilterLabel label_for_kurtosis(double kurtosis,
                               double edge_threshold = kEdgeKurtosisThreshold,
                               double color_threshold = kColorKurtosisThreshold);
double weight_for(FilterKind kind);
const char* to_string(FilterKind kind);

// Labels each column of W1 after centering it and scaling it to unit L2 norm.
// A column that is constant (zero after centering) is Neutral with kurtosis 0.
std::vector<FilterLabel> classify_filters(
    const DecoderModel& m, double edge_threshold = kEdgeKurtosisThreshold,
    double color_threshold = kColorKurtosisThreshold);

struct FilterBank {
  int patch_side = 8;
  WhiteningTransform whitening;
  std::vector<DecoderModel> models;  // ascending hidden width
  std::vector<std::vector<FilterLabel>> labels;
  TrainingConfig config;
  double suppression_tau = kDefaultSuppressionTau;

  Eigen::Index total_filters() const;
};

// Throws DataError when the bank's invariants do not hold.
void validate(const FilterBank& bank);

inline const std::vector<int> kDefaultBankSizes = {81, 121, 169, 400, 625};

struct BankTrainingOptions {
  double epsilon = kDefaultWhiteningEpsilon;
  double suppression_tau = kDefaultSuppressionTau;
  // Train the models concurrently; each run is deterministic on its own.
  bool parallel = true;
};

// Fits whitening on the raw patches, then trains one decoder per size on the
// whitened matrix with seed cfg.seed + model index (ascending size order).
// `objective_traces`, when given, receives one J trace per model.
FilterBank train_bank(const PatchMatrix& patches, std::vector<int> sizes,
                      const TrainingConfig& cfg,
                      const BankTrainingOptions& options = {},
                      std::vector<std::vector<double>>* objective_traces = nullptr);

// Little-endian container: "MSUB", version 1, header, whitening, models,
// CRC-32 trailer.
std::string serialize_bank(const FilterBank& bank);
FilterBank deserialize_bank(const std::string& bytes);
void save_bank(const FilterBank& bank, const std::filesystem::path& path);
FilterBank load_bank(const std::filesystem::path& path);

enum class MosaicSelection { kAll, kEdge, kColor };

struct MosaicLayout {
  int tiles = 0;
  int columns = 0;
  int rows = 0;
};

struct FilterMosaic {
  RgbImage image;
  MosaicLayout layout;
};

// Grid of the selected filters of one model as p x p tiles (1 px black
// separators), ceil(sqrt(tiles)) per row, in filter order. Each tile maps the
// Y/G/Cr planes back to RGB and is min-max normalized to [0,1]; a flat tile
// renders mid-gray.
FilterMosaic render_filter_mosaic(const FilterBank& bank, std::size_t model_index,
                                  MosaicSelection selection = MosaicSelection::kAll);

// render_filter_mosaic written as PPM.
MosaicLayout export_filter_mosaic(const FilterBank& bank, std::size_t model_index,
                                  const std::filesystem::path& path,
                                  MosaicSelection selection = MosaicSelection::kAll);

}  // namespace msunique

#endif  // MSUNIQUE_FILTERBANK_HPP_
