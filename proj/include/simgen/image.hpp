#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "simgen/cfl_codec.hpp"

namespace simgen {

// RGB image, row-major, channel-interleaved, values nominally in [-1, 1].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  RgbImage() = default;
  RgbImage(int w, int h, float fill = 0.0f) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

  float& at(int x, int y, int ch) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + ch]; }
  float at(int x, int y, int ch) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + ch]; }

  bool operator==(const RgbImage&) const = default;
};

// 8-bit mapping: -1 -> 0, +1 -> 255 (rounded, clamped).
std::uint8_t to_byte(float v);
float from_byte(std::uint8_t b);

// Half-pixel-centre bilinear resampling with edge clamping.
RgbImage resize_bilinear(const RgbImage& img, int width, int height);
ClassMask resize_nearest(const ClassMask& mask, int width, int height);

void save_png(const std::filesystem::path& path, const RgbImage& img);
// Class ids written as raw 8-bit grey values; ids must be < 256.
void save_mask_png(const std::filesystem::path& path, const ClassMask& mask);
void save_png_rgb8(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& rgb);

RgbImage load_png(const std::filesystem::path& path);
ClassMask load_mask_png(const std::filesystem::path& path);

// Mask coloured with each class's palette vector (display mapping).
RgbImage colorize_mask(const ClassMask& mask, const ClassPalette& palette);

}  // namespace simgen
