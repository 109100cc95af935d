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

#include "msunique/colorspace.hpp"

#include <random>

#include "gtest/gtest.h"
#include "msunique/error.hpp"
#include "support/synthetic.hpp"

namespace msunique {
namespace {

RgbImage pixel(double r, double g, double b) {
  return RgbImage{Plane::Constant(1, 1, r), Plane::Constant(1, 1, g),
                  Plane::Constant(1, 1, b)};
}

TEST(ToYgcr, ReferencePixels) {
  YgcrImage gray = to_ygcr(pixel(0.5, 0.5, 0.5));
  EXPECT_NEAR(gray.y(0, 0), 0.5, 1e-15);
  EXPECT_EQ(gray.g(0, 0), 0.5);
  EXPECT_NEAR(gray.cr(0, 0), 0.5, 1e-15);

  YgcrImage white = to_ygcr(pixel(1, 1, 1));
  EXPECT_NEAR(white.y(0, 0), 1.0, 1e-15);
  EXPECT_EQ(white.g(0, 0), 1.0);
  EXPECT_NEAR(white.cr(0, 0), 0.5, 1e-15);

  // y = 0.299, cr = 0.5 + 0.5 = 1.
  YgcrImage red = to_ygcr(pixel(1, 0, 0));
  EXPECT_NEAR(red.y(0, 0), 0.299, 1e-15);
  EXPECT_EQ(red.g(0, 0), 0.0);
  EXPECT_NEAR(red.cr(0, 0), 1.0, 1e-15);
}

TEST(ToYgcr, GrayImagesHaveNeutralChroma) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Plane p(6, 9);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
  const YgcrImage out = to_ygcr(RgbImage{p, p, p});
  EXPECT_LT((out.y - p).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((out.cr.array() - 0.5).abs().maxCoeff(), 1e-15);
  EXPECT_EQ(out.g, p);
}

TEST(ToYgcr, PixelwiseCommutesWithPermutation) {
  const RgbImage img = testing::synthetic_natural_image(12, 10, 5);
  const YgcrImage a = to_ygcr(img);
  // Transposing every plane is a pixel permutation.
  const RgbImage t{img.r.transpose(), img.g.transpose(), img.b.transpose()};
  const YgcrImage b = to_ygcr(t);
  EXPECT_EQ(Plane(a.y.transpose()), b.y);
  EXPECT_EQ(Plane(a.cr.transpose()), b.cr);
  EXPECT_GE(a.cr.minCoeff(), 0.0);
  EXPECT_LE(a.cr.maxCoeff(), 1.0);
}

TEST(ChannelCrossCorrelation, Basics) {
  const RgbImage img = testing::synthetic_natural_image(16, 16, 2);
  EXPECT_NEAR(channel_cross_correlation(img, Channel::R, Channel::R), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(channel_cross_correlation(img, Channel::R, Channel::B),
                   channel_cross_correlation(img, Channel::B, Channel::R));
  EXPECT_LE(std::abs(channel_cross_correlation(img, Channel::G, Channel::B)), 1.0);

  RgbImage two{Plane(1, 2), Plane(1, 2), Plane(1, 2)};
  two.r << 0, 1;
  two.g << 1, 0;
  two.b << 0.2, 0.7;
  EXPECT_NEAR(channel_cross_correlation(two, Channel::R, Channel::G), -1.0, 1e-15);

  two.b << 0.3, 0.3;
  EXPECT_THROW(channel_cross_correlation(two, Channel::R, Channel::B), DataError);
}

}  // namespace
}  // namespace msunique
