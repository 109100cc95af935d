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

#include "msunique/scoring.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "msunique/error.hpp"
#include "msunique/stats.hpp"

namespace msunique {

FeatureVector suppress(FeatureVector v, double tau) {
  if (!(tau >= 0.0)) throw DataError("suppression threshold must be non-negative");
  const Eigen::Index filters = v.filter_weights.size();
  if (filters == 0 || v.values.size() % filters != 0) {
    throw DataError("feature vector layout does not match its filter weights");
  }
  const Eigen::Index patches = v.values.size() / filters;
  auto grid = v.values.reshaped(filters, patches);
  for (Eigen::Index p = 0; p < patches; ++p) {
    for (Eigen::Index f = 0; f < filters; ++f) {
      if (grid(f, p) / v.filter_weights(f) < tau) grid(f, p) = 0.0;
    }
  }
  v.suppressed = true;
  return v;
}

FeatureVector weighted_responses(const FilterBank& bank, const YgcrImage& img) {
  const PatchMatrix tiles = extract_tiled_patches(img, bank.patch_side);
  const PatchMatrix white = apply_whitening(bank.whitening, tiles);
  const Eigen::Index filters = bank.total_filters();

  FeatureVector out;
  out.filter_weights.resize(filters);
  Eigen::MatrixXd grid(filters, white.cols());
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < bank.models.size(); ++i) {
    const Eigen::Index h = bank.models[i].hidden();
    Eigen::VectorXd w(h);
    for (Eigen::Index j = 0; j < h; ++j) w(j) = bank.labels[i][std::size_t(j)].weight;
    out.filter_weights.segment(row, h) = w;
    grid.middleRows(row, h) = w.asDiagonal() * forward_responses(bank.models[i], white);
    row += h;
  }
  out.values = grid.reshaped();
  return out;
}

FeatureVector image_features(const FilterBank& bank, const YgcrImage& img) {
  return suppress(weighted_responses(bank, img), bank.suppression_tau);
}

double spearman(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return stats::spearman(x, y);
}

double score_from_rho(double rho) {
  return std::pow(rho, 10);
}

QualityRecord quality_score(const FilterBank& bank, const RgbImage& reference,
                            const RgbImage& distorted) {
  if (reference.width() != distorted.width() ||
      reference.height() != distorted.height()) {
    throw DataError("dimension mismatch between reference and distorted image");
  }
  const FeatureVector fr = image_features(bank, to_ygcr(reference));
  const FeatureVector fd = image_features(bank, to_ygcr(distorted));
  QualityRecord rec;
  rec.spearman_rho = spearman(fr.values, fd.values);
  rec.score = score_from_rho(rec.spearman_rho);
  return rec;
}

std::vector<QualityRecord> score_batch(const FilterBank& bank,
                                       const std::vector<ScorePair>& pairs,
                                       unsigned workers) {
  std::vector<QualityRecord> out(pairs.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = unsigned(std::min<std::size_t>(workers, std::max<std::size_t>(pairs.size(), 1)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      try {
        const RgbImage ref = load_image(pairs[i].reference_path);
        const RgbImage dist = load_image(pairs[i].distorted_path);
        QualityRecord rec = quality_score(bank, ref, dist);
        rec.reference_id = pairs[i].reference_path.string();
        rec.distorted_id = pairs[i].distorted_path.string();
        out[i] = std::move(rec);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = pairs.size();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

void write_scores_csv(const std::vector<QualityRecord>& records,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path.string());
  out << "dist_path,ref_path,rho,score\n";
  for (const auto& r : records) {
    out << r.distorted_id << ',' << r.reference_id << ','
        << format_double(r.spearman_rho) << ',' << format_double(r.score) << '\n';
  }
}

}  // namespace msunique
