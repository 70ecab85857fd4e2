#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace simgen {

using Vec3 = std::array<double, 3>;

// Per-pixel class ids, row-major.
struct ClassMask {
  int width = 0;
  int height = 0;
  std::vector<int> labels;

  ClassMask() = default;
  ClassMask(int w, int h, int fill = 0) : width(w), height(h), labels(static_cast<std::size_t>(w) * h, fill) {}

  int& at(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }
  int at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return labels.size(); }

  bool operator==(const ClassMask&) const = default;
};

// Three real channels per pixel, pixel-interleaved, row-major.
struct EncodedMask {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  EncodedMask() = default;
  EncodedMask(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h * 3, 0.0) {}

  Vec3 pixel(std::size_t i) const { return {values[3 * i], values[3 * i + 1], values[3 * i + 2]}; }
  std::size_t pixel_count() const { return values.size() / 3; }
};

enum class MaskEncoding { cfl, random_rgb };

std::string to_string(MaskEncoding e);
MaskEncoding parse_mask_encoding(const std::string& s);

// One 3-vector per class, index = class id. CFL palettes lie on the unit
// sphere; random_rgb palettes lie in the cube [-1, 1]^3.
class ClassPalette {
 public:
  ClassPalette(std::vector<Vec3> points, MaskEncoding encoding);

  int num_classes() const { return static_cast<int>(points_.size()); }
  const std::vector<Vec3>& points() const { return points_; }
  const Vec3& operator[](int i) const { return points_[static_cast<std::size_t>(i)]; }
  MaskEncoding encoding() const { return encoding_; }

 private:
  std::vector<Vec3> points_;
  MaskEncoding encoding_;
};

// Point i of the canonical Fibonacci lattice with num_classes points.
Vec3 cfl_point(int num_classes, int i);

ClassPalette build_palette(int num_classes);

// Seeded uniform triples in [-1, 1]^3 (seed = num_classes), each at least
// 0.05 away from all earlier triples.
ClassPalette build_random_palette(int num_classes);

ClassPalette make_palette(int num_classes, MaskEncoding encoding);

EncodedMask encode_mask(const ClassMask& mask, const ClassPalette& palette);
EncodedMask encode_mask_nocfl(const ClassMask& mask, int num_classes);

// Class whose palette vector has the highest cosine similarity with v.
// Ties go to the lowest id; the zero vector maps to class 0.
int decode_pixel(const Vec3& v, const ClassPalette& palette);

ClassMask decode_mask(const EncodedMask& encoded, const ClassPalette& palette);

// Smallest angle (radians) between any two palette directions.
double min_pairwise_angle(const ClassPalette& palette);

// Display colour of a palette vector: (v + 1) / 2 * 255, rounded.
std::array<std::uint8_t, 3> display_rgb(const Vec3& v);

void save_palette_json(const ClassPalette& palette, const std::filesystem::path& path);
ClassPalette load_palette_json(const std::filesystem::path& path);

}  // namespace simgen
