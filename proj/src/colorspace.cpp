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

#include "msunique/error.hpp"
#include "msunique/stats.hpp"

namespace msunique {

YgcrImage to_ygcr(const RgbImage& img) {
  validate(img);
  YgcrImage out;
  out.y = 0.299 * img.r + 0.587 * img.g + 0.114 * img.b;
  out.y = out.y.cwiseMax(0.0).cwiseMin(1.0);
  out.g = img.g;
  out.cr = (0.5 + (0.5 * img.r - 0.418688 * img.g - 0.081312 * img.b).array())
               .cwiseMax(0.0)
               .cwiseMin(1.0)
               .matrix();
  return out;
}

double channel_cross_correlation(const RgbImage& img, Channel a, Channel b) {
  validate(img);
  if (img.r.size() < 2) throw DataError("need at least 2 pixels");
  auto plane = [&](Channel c) -> const Plane& {
    switch (c) {
      case Channel::R: return img.r;
      case Channel::G: return img.g;
      default: return img.b;
    }
  };
  const Plane& pa = plane(a);
  const Plane& pb = plane(b);
  return stats::pearson(pa.reshaped<Eigen::RowMajor>(),
                        pb.reshaped<Eigen::RowMajor>());
}

}  // namespace msunique
