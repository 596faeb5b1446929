// Copyright 2026 The stackkd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "stackkd/common.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace stackkd {

// Grayscale raster, row-major, intensities in [0, 1]. Ink is bright (1) on a
// dark (0) background for both glyph crops and word images.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int height, int width, double fill = 0.0);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  bool empty() const noexcept { return pixels_.empty(); }

  double& at(int y, int x) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int y, int x) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  // Bilinear sample; coordinates outside the raster read as 0.
  double sample(double y, double x) const;

  std::span<double> pixels() noexcept { return pixels_; }
  std::span<const double> pixels() const noexcept { return pixels_; }

  double max_value() const;
  void clamp01();

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> pixels_;
};

// 8-bit grayscale PNG. Values are quantized to round(v * 255).
void write_png(const std::filesystem::path& path, const GrayImage& image);
GrayImage read_png(const std::filesystem::path& path);

GrayImage resize_bilinear(const GrayImage& src, int height, int width);

// Scales to fit inside height x width keeping the aspect ratio, then pads the
// right and bottom with background.
GrayImage fit_and_pad(const GrayImage& src, int height, int width);

// Maps each destination pixel through the inverse of: rotate by `degrees` and
// scale by `scale` about the center, then translate by (dx, dy) pixels.
GrayImage affine_warp(const GrayImage& src, double degrees, double scale, double dx, double dy);

}  // namespace stackkd
