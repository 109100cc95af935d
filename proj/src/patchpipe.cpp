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

#include "msunique/patchpipe.hpp"

#include <string>

#include "msunique/error.hpp"

namespace msunique {

namespace {

void require_fits(const YgcrImage& img, int p) {
  if (p <= 0) throw DataError("patch side must be positive");
  if (img.height() < p || img.width() < p) {
    throw DataError("image smaller than " + std::to_string(p) + "x" +
                    std::to_string(p));
  }
}

void copy_patch(const YgcrImage& img, Eigen::Index top, Eigen::Index left,
                int p, Eigen::Ref<Eigen::VectorXd> column) {
  const Plane* planes[3] = {&img.y, &img.g, &img.cr};
  Eigen::Index k = 0;
  for (const Plane* plane : planes) {
    for (Eigen::Index r = 0; r < p; ++r) {
      for (Eigen::Index c = 0; c < p; ++c) column(k++) = (*plane)(top + r, left + c);
    }
  }
}

}  // namespace

std::uint64_t Rng::index(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

double Rng::uniform(double lo, double hi) {
  const double unit = double(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

PatchMatrix extract_random_patches(const YgcrImage& img, Eigen::Index count,
                                   int patch_side, Rng& rng) {
  require_fits(img, patch_side);
  if (count <= 0) throw DataError("patch count must be positive");
  const Eigen::Index p = patch_side;
  PatchMatrix out(3 * p * p, count);
  const auto rows = std::uint64_t(img.height() - p + 1);
  const auto cols = std::uint64_t(img.width() - p + 1);
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto top = Eigen::Index(rng.index(rows));
    const auto left = Eigen::Index(rng.index(cols));
    copy_patch(img, top, left, patch_side, out.col(i));
  }
  return out;
}

PatchMatrix extract_tiled_patches(const YgcrImage& img, int patch_side) {
  require_fits(img, patch_side);
  const Eigen::Index p = patch_side;
  const Eigen::Index tiles_down = img.height() / p;
  const Eigen::Index tiles_across = img.width() / p;
  PatchMatrix out(3 * p * p, tiles_down * tiles_across);
  Eigen::Index i = 0;
  for (Eigen::Index ty = 0; ty < tiles_down; ++ty) {
    for (Eigen::Index tx = 0; tx < tiles_across; ++tx) {
      copy_patch(img, ty * p, tx * p, patch_side, out.col(i++));
    }
  }
  return out;
}

WhiteningTransform fit_whitening(const PatchMatrix& patches, double epsilon) {
  if (patches.cols() < 2) throw DataError("whitening needs at least 2 patches");
  if (!(epsilon >= 0.0)) throw DataError("epsilon must be non-negative");
  if (!patches.allFinite()) throw DataError("non-finite patch data");

  WhiteningTransform w;
  w.epsilon = epsilon;
  w.mean = patches.rowwise().mean();
  const Eigen::MatrixXd centered = patches.colwise() - w.mean;
  Eigen::MatrixXd cov = centered * centered.transpose() / double(patches.cols());
  cov = 0.5 * (cov + cov.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw DataError("covariance eigendecomposition failed");
  }
  Eigen::VectorXd lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < 1e-12) lambda(i) = 0.0;
  }
  if (epsilon == 0.0 && lambda.minCoeff() == 0.0) {
    throw DataError("rank-deficient covariance requires epsilon > 0");
  }
  const Eigen::VectorXd scale = (lambda.array() + epsilon).rsqrt();
  const Eigen::MatrixXd& u = eig.eigenvectors();
  w.zca = u * scale.asDiagonal() * u.transpose();
  w.zca = 0.5 * (w.zca + w.zca.transpose()).eval();
  return w;
}

PatchMatrix apply_whitening(const WhiteningTransform& w,
                            const PatchMatrix& patches) {
  if (patches.rows() != w.dim()) {
    throw DataError("dimension mismatch: patches have " +
                    std::to_string(patches.rows()) + " rows, transform expects " +
                    std::to_string(w.dim()));
  }
  return w.zca * (patches.colwise() - w.mean);
}

}  // namespace msunique
