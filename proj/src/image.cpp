#include "simgen/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <png.h>

#include "simgen/errors.hpp"

namespace simgen {

std::uint8_t to_byte(float v) {
  const double x = std::clamp((static_cast<double>(v) + 1.0) * 127.5, 0.0, 255.0);
  return static_cast<std::uint8_t>(std::lround(x));
}

float from_byte(std::uint8_t b) { return static_cast<float>(b / 127.5 - 1.0); }

RgbImage resize_bilinear(const RgbImage& img, int width, int height) {
  if (img.width == width && img.height == height) return img;
  RgbImage out(width, height);
  if (img.width == 0 || img.height == 0) return out;
  const double sx = static_cast<double>(img.width) / width;
  const double sy = static_cast<double>(img.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = img.at(x0, y0, ch) * (1 - wx) + img.at(x1, y0, ch) * wx;
        const double bot = img.at(x0, y1, ch) * (1 - wx) + img.at(x1, y1, ch) * wx;
        out.at(x, y, ch) = static_cast<float>(top * (1 - wy) + bot * wy);
      }
    }
  }
  return out;
}

ClassMask resize_nearest(const ClassMask& mask, int width, int height) {
  if (mask.width == width && mask.height == height) return mask;
  ClassMask out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(mask.height - 1, static_cast<int>((y + 0.5) * mask.height / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(mask.width - 1, static_cast<int>((x + 0.5) * mask.width / width));
      out.at(x, y) = mask.at(sx, sy);
    }
  }
  return out;
}

namespace {

void write_png(const std::filesystem::path& path, int width, int height, png_uint_32 format, const void* pixels) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels, 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot write PNG " + path.string() + ": " + msg);
  }
}

std::vector<std::uint8_t> read_png(const std::filesystem::path& path, png_uint_32 format, int& width, int& height) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = format;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  width = static_cast<int>(image.width);
  height = static_cast<int>(image.height);
  return buf;
}

}  // namespace

void save_png_rgb8(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& rgb) {
  write_png(path, width, height, PNG_FORMAT_RGB, rgb.data());
}

void save_png(const std::filesystem::path& path, const RgbImage& img) {
  std::vector<std::uint8_t> bytes(img.data.size());
  std::transform(img.data.begin(), img.data.end(), bytes.begin(), to_byte);
  save_png_rgb8(path, img.width, img.height, bytes);
}

void save_mask_png(const std::filesystem::path& path, const ClassMask& mask) {
  std::vector<std::uint8_t> bytes(mask.labels.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const int v = mask.labels[i];
    if (v < 0 || v > 255) throw DomainError("save_mask_png: class id " + std::to_string(v) + " does not fit 8 bits");
    bytes[i] = static_cast<std::uint8_t>(v);
  }
  write_png(path, mask.width, mask.height, PNG_FORMAT_GRAY, bytes.data());
}

RgbImage load_png(const std::filesystem::path& path) {
  int w = 0, h = 0;
  const auto bytes = read_png(path, PNG_FORMAT_RGB, w, h);
  RgbImage img(w, h);
  std::transform(bytes.begin(), bytes.end(), img.data.begin(), from_byte);
  return img;
}

ClassMask load_mask_png(const std::filesystem::path& path) {
  // Read the raw channel values; colour conversion would alter class ids.
  png_image probe;
  std::memset(&probe, 0, sizeof probe);
  probe.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&probe, path.c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + probe.message);
  }
  const bool grey = (probe.format & PNG_FORMAT_FLAG_COLOR) == 0;
  png_image_free(&probe);
  if (!grey) throw IoError("mask " + path.string() + " is not a single-channel PNG");
  int w = 0, h = 0;
  const auto bytes = read_png(path, PNG_FORMAT_GRAY, w, h);
  ClassMask mask(w, h);
  std::copy(bytes.begin(), bytes.end(), mask.labels.begin());
  return mask;
}

RgbImage colorize_mask(const ClassMask& mask, const ClassPalette& palette) {
  RgbImage out(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.labels.size(); ++i) {
    const auto rgb = display_rgb(palette[mask.labels[i]]);
    for (std::size_t k = 0; k < 3; ++k) out.data[3 * i + k] = from_byte(rgb[k]);
  }
  return out;
}

}  // namespace simgen
