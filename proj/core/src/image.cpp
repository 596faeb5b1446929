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

#include "stackkd/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>

namespace stackkd {

GrayImage::GrayImage(int height, int width, double fill)
    : height_(height), width_(width),
      pixels_(static_cast<std::size_t>(std::max(height, 0)) * std::max(width, 0), fill) {
  if (height < 0 || width < 0) throw Error("negative image size");
}

double GrayImage::sample(double y, double x) const {
  const int y0 = static_cast<int>(std::floor(y));
  const int x0 = static_cast<int>(std::floor(x));
  const double fy = y - y0;
  const double fx = x - x0;
  auto px = [&](int yy, int xx) {
    if (yy < 0 || xx < 0 || yy >= height_ || xx >= width_) return 0.0;
    return at(yy, xx);
  };
  return (1 - fy) * ((1 - fx) * px(y0, x0) + fx * px(y0, x0 + 1)) +
         fy * ((1 - fx) * px(y0 + 1, x0) + fx * px(y0 + 1, x0 + 1));
}

double GrayImage::max_value() const {
  return pixels_.empty() ? 0.0 : *std::max_element(pixels_.begin(), pixels_.end());
}

void GrayImage::clamp01() {
  for (auto& v : pixels_) v = std::clamp(v, 0.0, 1.0);
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng init failed");
  }
  std::vector<png_byte> row(static_cast<std::size_t>(image.width()));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng write failed for " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, image.width(), image.height(), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x)
      row[x] = static_cast<png_byte>(std::lround(std::clamp(image.at(y, x), 0.0, 1.0) * 255.0));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

GrayImage read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("libpng init failed");
  }
  GrayImage image;
  std::vector<png_byte> row;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("not a readable PNG: " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const auto color = png_get_color_type(png, info);
  const auto depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  image = GrayImage(h, w);
  row.resize(png_get_rowbytes(png, info));
  for (int y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < w; ++x) image.at(y, x) = row[x] / 255.0;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

GrayImage resize_bilinear(const GrayImage& src, int height, int width) {
  if (height <= 0 || width <= 0) throw Error("resize to empty image");
  if (src.height() == height && src.width() == width) return src;
  GrayImage out(height, width);
  const double sy = static_cast<double>(src.height()) / height;
  const double sx = static_cast<double>(src.width()) / width;
  for (int y = 0; y < height; ++y) {
    const double yy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height() - 1.0);
    for (int x = 0; x < width; ++x) {
      const double xx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width() - 1.0);
      out.at(y, x) = src.sample(yy, xx);
    }
  }
  return out;
}

GrayImage fit_and_pad(const GrayImage& src, int height, int width) {
  if (src.empty()) throw Error("cannot resize an empty image");
  const double scale = std::min(static_cast<double>(height) / src.height(),
                                static_cast<double>(width) / src.width());
  const int h = std::clamp(static_cast<int>(std::lround(src.height() * scale)), 1, height);
  const int w = std::clamp(static_cast<int>(std::lround(src.width() * scale)), 1, width);
  GrayImage scaled = resize_bilinear(src, h, w);
  GrayImage out(height, width);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(y, x) = scaled.at(y, x);
  return out;
}

GrayImage affine_warp(const GrayImage& src, double degrees, double scale, double dx, double dy) {
  GrayImage out(src.height(), src.width());
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad) / scale;
  const double s = std::sin(rad) / scale;
  const double cy = (src.height() - 1) / 2.0;
  const double cx = (src.width() - 1) / 2.0;
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const double ux = x - dx - cx;
      const double uy = y - dy - cy;
      // Inverse rotation and scale.
      const double sxp = c * ux + s * uy + cx;
      const double syp = -s * ux + c * uy + cy;
      out.at(y, x) = src.sample(syp, sxp);
    }
  }
  return out;
}

}  // namespace stackkd
