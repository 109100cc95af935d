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

#ifndef MSUNIQUE_IMAGEIO_HPP_
#define MSUNIQUE_IMAGEIO_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace msunique {

using Plane = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Three normalized planes, rows = height, cols = width, samples in [0,1].
struct RgbImage {
  Plane r;
  Plane g;
  Plane b;

  Eigen::Index width() const { return r.cols(); }
  Eigen::Index height() const { return r.rows(); }
};

// Throws DataError unless the planes agree in shape and lie in [0,1].
void validate(const RgbImage& img);

// Reads a binary (P6) or ASCII (P3) PPM with maxval <= 255. Samples map to v/255.
RgbImage load_image(const std::filesystem::path& path);

// Decodes PPM bytes already in memory.
RgbImage decode_ppm(const std::string& bytes);

// Quantizes to 8 bits (round to nearest, clamped) and writes binary P6.
void save_ppm(const RgbImage& img, const std::filesystem::path& path);
std::string encode_ppm(const RgbImage& img);

struct SubjectiveEntry {
  std::filesystem::path distorted_path;
  std::filesystem::path reference_path;
  double subjective_score = 0.0;
  std::optional<double> score_std;
};

// CSV with header `dist_path,ref_path,score,std`. Relative paths are
// resolved against the manifest's directory.
std::vector<SubjectiveEntry> parse_manifest(const std::filesystem::path& path);

// Writes entries with paths expressed relative to the output file's
// directory, so that parse_manifest on the result reproduces `entries`.
void write_manifest(const std::vector<SubjectiveEntry>& entries,
                    const std::filesystem::path& path);

// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

}  // namespace msunique

#endif  // MSUNIQUE_IMAGEIO_HPP_
