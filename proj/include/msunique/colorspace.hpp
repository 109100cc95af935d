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

#ifndef MSUNIQUE_COLORSPACE_HPP_
#define MSUNIQUE_COLORSPACE_HPP_

#include "msunique/imageio.hpp"

namespace msunique {

// BT.601 full-range luma, the untouched RGB green plane, and Cr offset to 0.5.
struct YgcrImage {
  Plane y;
  Plane g;
  Plane cr;

  Eigen::Index width() const { return y.cols(); }
  Eigen::Index height() const { return y.rows(); }
};

YgcrImage to_ygcr(const RgbImage& img);

enum class Channel { R, G, B };

// Pearson correlation of two flattened RGB planes.
double channel_cross_correlation(const RgbImage& img, Channel a, Channel b);

}  // namespace msunique

#endif  // MSUNIQUE_COLORSPACE_HPP_
