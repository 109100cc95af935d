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


#include "msunique/filterbank.hpp"

#include <fstream>

#include "gtest/gtest.h"
#include "msunique/error.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

namespace msunique {
namespace {

FilterBank untrained_bank(int patch_side, const std::vector<int>& sizes) {
  FilterBank bank;
  bank.patch_side = patch_side;
  const Eigen::Index d = 3 * patch_side * patch_side;
  bank.whitening.mean = Eigen::VectorXd::Zero(d);
  bank.whitening.zca = Eigen::MatrixXd::Identity(d, d);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    bank.models.push_back(init_model(d, sizes[i], std::int64_t(i)));
    bank.labels.push_back(classify_filters(bank.models.back()));
  }
  return bank;
}

std::string expect_corrupt(const std::string& bytes) {
  try {
    deserialize_bank(bytes);
  } catch (const CorruptArtifact& e) {
    return e.what();
  }
  ADD_FAILURE() << "corruption not detected";
  return {};
}

TEST(Labels, Thresholds) {
  const FilterLabel edge = label_for_kurtosis(6.2);
  EXPECT_EQ(edge.kind, FilterKind::kEdge);
  EXPECT_EQ(edge.weight, 2.0);
  const FilterLabel color = label_for_kurtosis(1.4);
  EXPECT_EQ(color.kind, FilterKind::kColor);
  EXPECT_EQ(color.weight, 0.5);
  const FilterLabel neutral = label_for_kurtosis(3.0);
  EXPECT_EQ(neutral.kind, FilterKind::kNeutral);
  EXPECT_EQ(neutral.weight, 1.0);
  // Boundaries are exclusive.
  EXPECT_EQ(label_for_kurtosis(5.0).kind, FilterKind::kNeutral);
  EXPECT_EQ(label_for_kurtosis(2.0).kind, FilterKind::kNeutral);
  EXPECT_EQ(label_for_kurtosis(3.0, 2.5, 1.0).kind, FilterKind::kEdge);
  EXPECT_STREQ(to_string(FilterKind::kEdge), "edge");
  EXPECT_STREQ(to_string(FilterKind::kColor), "color");
}

TEST(ClassifyFilters, KurtosisMatchesOracleOnRawWeights) {
  const DecoderModel m = init_model(48, 16, 3);
  const auto labels = classify_filters(m);
  ASSERT_EQ(labels.size(), 16u);
  for (Eigen::Index j = 0; j < 16; ++j) {
    const long double want = oracle::kurtosis(oracle::to_std(m.w1.col(j)));
    EXPECT_NEAR(labels[std::size_t(j)].kurtosis, double(want), 1e-10 * double(want));
    EXPECT_EQ(labels[std::size_t(j)].kind, label_for_kurtosis(double(want)).kind);
  }
}

TEST(ClassifyFilters, InvariantToScaleAndOffset) {
  DecoderModel m = init_model(48, 10, 4);
  const auto a = classify_filters(m);
  m.w1 = (m.w1.array() * 7.5 + 0.2).matrix();
  const auto b = classify_filters(m);
  for (std::size_t j = 0; j < a.size(); ++j) {
    EXPECT_EQ(a[j].kind, b[j].kind);
    EXPECT_NEAR(a[j].kurtosis, b[j].kurtosis, 1e-9);
  }
}

TEST(ClassifyFilters, SpikeIsEdgeAndConstantIsNeutral) {
  DecoderModel m = init_model(48, 2, 0);
  m.w1.col(0).setZero();
  m.w1(10, 0) = 1.0;
  m.w1.col(1).setConstant(0.3);
  const auto labels = classify_filters(m);
  EXPECT_EQ(labels[0].kind, FilterKind::kEdge);
  EXPECT_EQ(labels[1].kind, FilterKind::kNeutral);
  EXPECT_EQ(labels[1].weight, 1.0);
}

TEST(TrainBank, SingleSizeComposition) {
  const FilterBank bank = testing::toy_bank({4}, 2, 10, 1);
  ASSERT_EQ(bank.models.size(), 1u);
  EXPECT_EQ(bank.labels[0].size(), 4u);
  EXPECT_EQ(bank.patch_side, 2);
  EXPECT_EQ(bank.whitening.dim(), 12);
  EXPECT_NO_THROW(validate(bank));
}

TEST(TrainBank, DefaultSizesTotal) {
  const FilterBank bank = untrained_bank(8, kDefaultBankSizes);
  EXPECT_EQ(bank.models.size(), 5u);
  EXPECT_EQ(bank.total_filters(), 1396);
}

TEST(TrainBank, SortsSizesAndRejectsDuplicates) {
  const PatchMatrix p = testing::toy_patches(2, 200, 2, 3);
  TrainingConfig cfg;
  cfg.epochs = 2;
  const FilterBank bank = train_bank(p, {5, 3}, cfg);
  EXPECT_EQ(bank.models[0].hidden(), 3);
  EXPECT_EQ(bank.models[1].hidden(), 5);
  EXPECT_THROW(train_bank(p, {3, 3}, cfg), DataError);
  EXPECT_THROW(train_bank(p, {}, cfg), DataError);
  EXPECT_THROW(train_bank(PatchMatrix::Random(13, 40), {3}, cfg), DataError);
}

TEST(TrainBank, DeterministicBytesAndParallelAgreement) {
  const PatchMatrix p = testing::toy_patches(3, 400, 2, 5);
  TrainingConfig cfg;
  cfg.epochs = 15;
  cfg.seed = 9;
  BankTrainingOptions serial;
  serial.parallel = false;
  const std::string a = serialize_bank(train_bank(p, {3, 6}, cfg));
  const std::string b = serialize_bank(train_bank(p, {3, 6}, cfg));
  const std::string c = serialize_bank(train_bank(p, {3, 6}, cfg, serial));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(Persistence, SaveLoadSaveIsByteIdentical) {
  const FilterBank bank = testing::toy_bank({3, 5}, 2, 10, 2);
  const auto dir = testing::make_temp_dir("bank");
  save_bank(bank, dir / "a.msub");
  const FilterBank back = load_bank(dir / "a.msub");
  save_bank(back, dir / "b.msub");
  std::ifstream fa(dir / "a.msub", std::ios::binary), fb(dir / "b.msub", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(fa)), {});
  const std::string sb((std::istreambuf_iterator<char>(fb)), {});
  EXPECT_EQ(sa, sb);
  EXPECT_EQ(back.models[1].w1, bank.models[1].w1);
  EXPECT_EQ(back.whitening.zca, bank.whitening.zca);
  EXPECT_EQ(back.labels[0][2].kind, bank.labels[0][2].kind);
  EXPECT_EQ(back.labels[0][2].weight, bank.labels[0][2].weight);
  EXPECT_EQ(back.config.seed, bank.config.seed);
  EXPECT_EQ(back.suppression_tau, bank.suppression_tau);
}

TEST(Persistence, DetectsCorruption) {
  const std::string good = serialize_bank(untrained_bank(2, {3}));
  std::string bad = good;
  bad[0] = 'X';
  EXPECT_NE(expect_corrupt(bad).find("not a model bank"), std::string::npos);

  EXPECT_NE(expect_corrupt(good.substr(0, good.size() - 1)).find("truncated"), std::string::npos);
  EXPECT_NE(expect_corrupt(good.substr(0, 20)).find("truncated"), std::string::npos);
  EXPECT_NE(expect_corrupt(good + "x").find("trailing"), std::string::npos);

  bad = good;
  bad[good.size() / 2] ^= 0x01;
  EXPECT_NE(expect_corrupt(bad).find("checksum"), std::string::npos);

  bad = good;
  bad[4] = 7;
  EXPECT_NE(expect_corrupt(bad).find("version"), std::string::npos);
  EXPECT_THROW(load_bank("/nonexistent/bank.msub"), DataError);
}

TEST(Mosaic, SquareGridForEightyOne) {
  const FilterBank bank = untrained_bank(8, {81});
  const FilterMosaic mosaic = render_filter_mosaic(bank, 0);
  EXPECT_EQ(mosaic.layout.tiles, 81);
  EXPECT_EQ(mosaic.layout.columns, 9);
  EXPECT_EQ(mosaic.layout.rows, 9);
  EXPECT_EQ(mosaic.image.width(), 9 * 9 + 1);
  EXPECT_EQ(mosaic.image.height(), 9 * 9 + 1);
  // Separators stay black.
  EXPECT_EQ(mosaic.image.r.row(0).maxCoeff(), 0.0);
  EXPECT_EQ(mosaic.image.g.col(9).maxCoeff(), 0.0);
  EXPECT_GE(mosaic.image.b.minCoeff(), 0.0);
  EXPECT_LE(mosaic.image.b.maxCoeff(), 1.0);
}

TEST(Mosaic, ConstantFilterIsMidGray) {
  FilterBank bank = untrained_bank(2, {2});
  bank.models[0].w1.col(1).setConstant(0.7);
  const FilterMosaic mosaic = render_filter_mosaic(bank, 0);
  ASSERT_EQ(mosaic.layout.columns, 2);
  for (int y = 1; y <= 2; ++y) {
    for (int x = 4; x <= 5; ++x) {
      EXPECT_EQ(mosaic.image.r(y, x), 0.5);
      EXPECT_EQ(mosaic.image.g(y, x), 0.5);
      EXPECT_EQ(mosaic.image.b(y, x), 0.5);
    }
  }
  // Min-max normalization spans the full range on a varying tile.
  const auto tile = mosaic.image.g.block(1, 1, 2, 2);
  EXPECT_LE(std::min(tile.minCoeff(), std::min(mosaic.image.r.block(1, 1, 2, 2).minCoeff(),
                                               mosaic.image.b.block(1, 1, 2, 2).minCoeff())),
            1e-12);
}

TEST(Mosaic, SelectionCountsMatchLabels) {
  const FilterBank bank = testing::toy_bank({25}, 2, 40, 6);
  int edges = 0, colors = 0;
  for (const auto& l : bank.labels[0]) {
    edges += l.kind == FilterKind::kEdge;
    colors += l.kind == FilterKind::kColor;
  }
  EXPECT_EQ(render_filter_mosaic(bank, 0, MosaicSelection::kEdge).layout.tiles, edges);
  EXPECT_EQ(render_filter_mosaic(bank, 0, MosaicSelection::kColor).layout.tiles, colors);
  EXPECT_THROW(render_filter_mosaic(bank, 1), DataError);

  const auto dir = testing::make_temp_dir("mosaic");
  const MosaicLayout layout = export_filter_mosaic(bank, 0, dir / "all.ppm");
  EXPECT_EQ(layout.tiles, 25);
  const RgbImage back = load_image(dir / "all.ppm");
  EXPECT_EQ(back.width(), 5 * 3 + 1);
}

}  // namespace
}  // namespace msunique
