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

#include "msunique/decoder.hpp"

#include <random>

#include "gtest/gtest.h"
#include "msunique/error.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

namespace msunique {
namespace {

TrainingConfig default_config() {
  TrainingConfig cfg;
  cfg.rho = 0.035;
  cfg.beta = 5.0;
  cfg.lambda = 3e-3;
  return cfg;
}

TEST(InitModel, DeterministicBoundedZeroBias) {
  const DecoderModel a = init_model(192, 81, 9);
  const DecoderModel b = init_model(192, 81, 9);
  EXPECT_EQ(a.w1, b.w1);
  EXPECT_EQ(a.w2, b.w2);
  EXPECT_EQ(a.b1, Eigen::VectorXd::Zero(81));
  EXPECT_EQ(a.b2, Eigen::VectorXd::Zero(192));
  const double r = std::sqrt(6.0 / (192 + 81 + 1));
  EXPECT_LE(a.w1.cwiseAbs().maxCoeff(), r);
  EXPECT_LE(a.w2.cwiseAbs().maxCoeff(), r);
  // Uses most of the range.
  EXPECT_GT(a.w1.cwiseAbs().maxCoeff(), 0.95 * r);
  EXPECT_NE(init_model(192, 81, 10).w1, a.w1);
}

TEST(ForwardResponses, ZeroModelGivesHalf) {
  DecoderModel m = init_model(12, 5, 0);
  m.w1.setZero();
  const Eigen::MatrixXd s = forward_responses(m, Eigen::MatrixXd::Random(12, 7));
  EXPECT_TRUE((s.array() == 0.5).all());
}

TEST(ForwardResponses, SaturatesWithoutOverflow) {
  DecoderModel m = init_model(3, 4, 0);
  m.w1.setZero();
  m.b1 << 40.0, 1e6, -1e6, -40.0;
  const Eigen::MatrixXd s = forward_responses(m, Eigen::MatrixXd::Ones(3, 1));
  EXPECT_EQ(s(0, 0), 1.0);
  EXPECT_EQ(s(1, 0), 1.0);
  EXPECT_EQ(s(2, 0), 0.0);
  EXPECT_GT(s(3, 0), 0.0);
  EXPECT_TRUE(s.allFinite());
}

TEST(ForwardResponses, MatchesScalarLoop) {
  const auto inst = testing::random_instance(12, 5, 20, 3);
  const Eigen::MatrixXd s = forward_responses(inst.model, inst.patches);
  for (Eigen::Index c = 0; c < 20; ++c) {
    for (Eigen::Index j = 0; j < 5; ++j) {
      double z = inst.model.b1(j);
      for (Eigen::Index i = 0; i < 12; ++i) z += inst.model.w1(i, j) * inst.patches(i, c);
      EXPECT_NEAR(s(j, c), 1.0 / (1.0 + std::exp(-z)), 1e-14);
    }
  }
  EXPECT_GT(s.minCoeff(), 0.0);
  EXPECT_LT(s.maxCoeff(), 1.0);
  EXPECT_THROW(forward_responses(inst.model, Eigen::MatrixXd::Zero(11, 2)), DataError);
}

TEST(Reconstruct, AffineCases) {
  DecoderModel m = init_model(6, 3, 1);
  m.w2.setZero();
  m.b2 = Eigen::VectorXd::LinSpaced(6, -1, 1);
  const Eigen::MatrixXd out = reconstruct(m, Eigen::MatrixXd::Random(3, 4));
  for (Eigen::Index c = 0; c < 4; ++c) EXPECT_EQ(out.col(c), m.b2);

  DecoderModel z = init_model(6, 3, 1);
  EXPECT_EQ(reconstruct(z, Eigen::MatrixXd::Zero(3, 2)), Eigen::MatrixXd::Zero(6, 2));
  EXPECT_THROW(reconstruct(z, Eigen::MatrixXd::Zero(4, 2)), DataError);
}

TEST(Objective, PerfectReconstructionWithoutPenaltiesIsZero) {
  Eigen::MatrixXd patch(12, 1);
  patch.col(0) = Eigen::VectorXd::LinSpaced(12, -2, 3);
  DecoderModel m = init_model(12, 5, 0);
  m.w1.setZero();
  m.w2.setZero();
  m.b2 = patch.col(0);
  TrainingConfig cfg = default_config();
  cfg.beta = 0.0;
  cfg.lambda = 0.0;
  EXPECT_EQ(objective_and_gradient(m, patch, cfg).objective, 0.0);
}

TEST(Objective, SparsityVanishesAtTargetActivation) {
  const auto inst = testing::random_instance(12, 5, 20, 4);
  DecoderModel m = inst.model;
  m.w1.setZero();
  m.b1.setConstant(std::log(0.035 / (1 - 0.035)));
  TrainingConfig with = default_config(), without = default_config();
  without.beta = 0.0;
  EXPECT_NEAR(objective_and_gradient(m, inst.patches, with).objective,
              objective_and_gradient(m, inst.patches, without).objective, 1e-12);
}

TEST(Objective, MatchesElementwiseOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = testing::random_instance(12, 5, 20, seed);
    for (LossScale scale : {LossScale::kMean, LossScale::kSum}) {
      TrainingConfig cfg = default_config();
      cfg.loss_scale = scale;
      const long double expected = oracle::objective(inst.model, inst.patches, cfg);
      const double got = objective_and_gradient(inst.model, inst.patches, cfg).objective;
      EXPECT_LT(std::fabs(double(expected) - got) / double(expected), 1e-12);
      EXPECT_GE(got, 0.0);
    }
  }
}

TEST(Objective, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    const auto inst = testing::random_instance(12, 5, 20, seed);
    const auto check = testing::check_gradient(inst.model, inst.patches, default_config());
    EXPECT_LT(check.max_relative_error, 1e-6) << "seed " << seed;
    EXPECT_EQ(check.coordinates, 2 * 12 * 5 + 5 + 12);
  }
}

TEST(Objective, GradientSpansChunkBoundaries) {
  // More columns than one evaluation chunk.
  const auto inst = testing::random_instance(3, 2, 4500, 7);
  TrainingConfig cfg = default_config();
  cfg.loss_scale = LossScale::kSum;
  const auto check = testing::check_gradient(inst.model, inst.patches, cfg);
  EXPECT_LT(check.max_relative_error, 1e-6);
}

TEST(TrainDecoder, ObjectiveDecreasesAndIsDeterministic) {
  const auto inst = testing::random_instance(12, 4, 50, 11);
  TrainingConfig cfg = default_config();
  cfg.epochs = 25;
  cfg.seed = 5;
  std::vector<double> trace;
  const DecoderModel a = train_decoder(inst.patches, 4, cfg, &trace);
  ASSERT_EQ(trace.size(), 26u);
  EXPECT_LT(trace.back(), trace.front());
  for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] + 1e-12);
  EXPECT_NEAR(objective_and_gradient(a, inst.patches, cfg).objective, trace.back(), 1e-12);

  const DecoderModel b = train_decoder(inst.patches, 4, cfg);
  EXPECT_EQ(a.w1, b.w1);
  EXPECT_EQ(a.b1, b.b1);
  EXPECT_EQ(a.w2, b.w2);
  EXPECT_EQ(a.b2, b.b2);
}

TEST(TrainDecoder, ZeroEpochsReturnsInitialization) {
  const auto inst = testing::random_instance(12, 4, 10, 2);
  TrainingConfig cfg = default_config();
  cfg.epochs = 0;
  cfg.seed = 8;
  const DecoderModel m = train_decoder(inst.patches, 4, cfg);
  const DecoderModel init = init_model(12, 4, 8);
  EXPECT_EQ(m.w1, init.w1);
  EXPECT_EQ(m.w2, init.w2);
  EXPECT_EQ(m.b1, init.b1);
}

TEST(TrainDecoder, NonFiniteDataDiverges) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Ones(12, 5);
  p(3, 2) = std::numeric_limits<double>::infinity();
  TrainingConfig cfg = default_config();
  cfg.epochs = 3;
  try {
    train_decoder(p, 3, cfg);
    FAIL() << "expected divergence";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("training diverged"), std::string::npos);
  }
}

TEST(PackUnpack, InverseOfEachOther) {
  const auto inst = testing::random_instance(6, 3, 1, 1);
  const DecoderModel back = unpack(pack(inst.model), 6, 3);
  EXPECT_EQ(back.w1, inst.model.w1);
  EXPECT_EQ(back.b1, inst.model.b1);
  EXPECT_EQ(back.w2, inst.model.w2);
  EXPECT_EQ(back.b2, inst.model.b2);
}

}  // namespace
}  // namespace msunique
