#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "simgen/cfl_codec.hpp"
#include "simgen/data_io.hpp"
#include "simgen/field.hpp"
#include "simgen/generation.hpp"
#include "simgen/rng.hpp"

namespace simgen::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

// Uniform labels in [0, num_classes).
ClassMask random_mask(int width, int height, int num_classes, Rng& rng);
// A few random filled rectangles on background, so components are sizeable.
ClassMask blocky_mask(int width, int height, int num_classes, Rng& rng);

FieldBatch normal_field(int n, int c, int h, int w, Rng& rng, double scale = 1.0);

// Reference component extraction: explicit-stack flood fill, 4-connectivity.
std::vector<BoundingBox> flood_fill_boxes(const ClassMask& mask, int min_area);

// Grows every foreground class region by `radius` pixels (Chebyshev), in
// increasing class order, overwriting background only.
ClassMask dilate_foreground(const ClassMask& mask, int radius);

// Exchanges two class ids in a mask.
ClassMask swap_classes(const ClassMask& mask, int a, int b);

std::string read_file(const std::filesystem::path& p);

}  // namespace simgen::testing
