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

#ifndef MSUNIQUE_PATCHPIPE_HPP_
#define MSUNIQUE_PATCHPIPE_HPP_

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "msunique/colorspace.hpp"

namespace msunique {

// One vectorized patch per column. For patch side p the column has 3*p*p
// entries: the Y plane in row-major order, then G, then Cr.
using PatchMatrix = Eigen::MatrixXd;

// Seeded source with platform-independent mappings to indices and reals
// (the <random> distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, n).
  std::uint64_t index(std::uint64_t n);
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);

 private:
  std::mt19937_64 engine_;
};

PatchMatrix extract_random_patches(const YgcrImage& img, Eigen::Index count,
                                   int patch_side, Rng& rng);

// Non-overlapping tiles in raster order over the image cropped to whole tiles.
PatchMatrix extract_tiled_patches(const YgcrImage& img, int patch_side);

struct WhiteningTransform {
  Eigen::VectorXd mean;
  Eigen::MatrixXd zca;
  double epsilon = 0.0;

  Eigen::Index dim() const { return mean.size(); }
};

// ZCA fit: zca = U (L + eps I)^{-1/2} U^T for the eigendecomposition of the
// centered covariance (normalized by the column count). Eigenvalues below
// 1e-12 count as zero; with eps == 0 such a covariance is an error.
WhiteningTransform fit_whitening(const PatchMatrix& patches, double epsilon);

PatchMatrix apply_whitening(const WhiteningTransform& w,
                            const PatchMatrix& patches);

}  // namespace msunique

#endif  // MSUNIQUE_PATCHPIPE_HPP_
