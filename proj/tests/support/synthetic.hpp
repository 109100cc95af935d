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

#ifndef MSUNIQUE_TESTS_SUPPORT_SYNTHETIC_HPP_
#define MSUNIQUE_TESTS_SUPPORT_SYNTHETIC_HPP_

#include <cstdint>
#include <filesystem>

#include <vector>

#include "msunique/filterbank.hpp"
#include "msunique/imageio.hpp"

namespace msunique::testing {

// Smooth color gradient, hard-edged shapes, oriented sinusoidal texture and
// low-pass noise; enough structure for decoders to learn edge filters.
RgbImage synthetic_natural_image(int width, int height, std::uint64_t seed);

// Separable Gaussian blur with mirrored borders, kernel radius ceil(3 sigma).
RgbImage gaussian_blur(const RgbImage& img, double sigma);

// Additive white Gaussian noise per channel, clamped to [0,1].
RgbImage add_gaussian_noise(const RgbImage& img, double sigma, std::uint64_t seed);

// Fresh empty directory under the system temp dir.
std::filesystem::path make_temp_dir(const std::string& tag);

// Random patches pooled from `images` synthetic images of size 48x48.
PatchMatrix toy_patches(int images, Eigen::Index count, int patch_side,
                        std::uint64_t seed);

FilterBank toy_bank(const std::vector<int>& sizes, int patch_side, int epochs,
                    std::uint64_t seed);

}  // namespace msunique::testing

#endif  // MSUNIQUE_TESTS_SUPPORT_SYNTHETIC_HPP_
