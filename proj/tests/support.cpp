#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <tuple>
#include <unistd.h>

namespace fs = std::filesystem;

namespace simgen::testing {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("simgen-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

ClassMask random_mask(int width, int height, int num_classes, Rng& rng) {
  ClassMask m(width, height);
  for (int& l : m.labels) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_classes)));
  return m;
}

ClassMask blocky_mask(int width, int height, int num_classes, Rng& rng) {
  ClassMask m(width, height);
  const int rects = 1 + static_cast<int>(rng.below(6));
  for (int r = 0; r < rects; ++r) {
    const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_classes)));
    const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(width)));
    const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(height)));
    const int x1 = std::min(width - 1, x0 + static_cast<int>(rng.below(static_cast<std::uint64_t>(width / 2 + 1))));
    const int y1 = std::min(height - 1, y0 + static_cast<int>(rng.below(static_cast<std::uint64_t>(height / 2 + 1))));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) m.at(x, y) = c;
    }
  }
  return m;
}

FieldBatch normal_field(int n, int c, int h, int w, Rng& rng, double scale) {
  FieldBatch f(n, c, h, w);
  for (float& v : f.data) v = static_cast<float>(scale * rng.normal());
  return f;
}

std::vector<BoundingBox> flood_fill_boxes(const ClassMask& mask, int min_area) {
  std::vector<char> seen(mask.size(), 0);
  std::vector<BoundingBox> out;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const int c = mask.at(x, y);
      if (c == 0 || seen[static_cast<std::size_t>(y) * mask.width + x]) continue;
      BoundingBox b{c, x, y, x, y};
      int area = 0;
      std::vector<std::pair<int, int>> stack{{x, y}};
      seen[static_cast<std::size_t>(y) * mask.width + x] = 1;
      while (!stack.empty()) {
        const auto [px, py] = stack.back();
        stack.pop_back();
        ++area;
        b.x_min = std::min(b.x_min, px);
        b.x_max = std::max(b.x_max, px);
        b.y_min = std::min(b.y_min, py);
        b.y_max = std::max(b.y_max, py);
        const int nx[4] = {px - 1, px + 1, px, px};
        const int ny[4] = {py, py, py - 1, py + 1};
        for (int k = 0; k < 4; ++k) {
          if (nx[k] < 0 || ny[k] < 0 || nx[k] >= mask.width || ny[k] >= mask.height) continue;
          const std::size_t j = static_cast<std::size_t>(ny[k]) * mask.width + nx[k];
          if (!seen[j] && mask.labels[j] == c) {
            seen[j] = 1;
            stack.emplace_back(nx[k], ny[k]);
          }
        }
      }
      if (area >= min_area) out.push_back(b);
    }
  }
  std::sort(out.begin(), out.end(), [](const BoundingBox& a, const BoundingBox& b) {
    return std::tie(a.class_id, a.y_min, a.x_min) < std::tie(b.class_id, b.y_min, b.x_min);
  });
  return out;
}

ClassMask dilate_foreground(const ClassMask& mask, int radius) {
  ClassMask out = mask;
  int max_class = 0;
  for (int l : mask.labels) max_class = std::max(max_class, l);
  for (int c = 1; c <= max_class; ++c) {
    for (int y = 0; y < mask.height; ++y) {
      for (int x = 0; x < mask.width; ++x) {
        if (mask.at(x, y) != c) continue;
        for (int dy = -radius; dy <= radius; ++dy) {
          for (int dx = -radius; dx <= radius; ++dx) {
            const int qx = x + dx, qy = y + dy;
            if (qx < 0 || qy < 0 || qx >= mask.width || qy >= mask.height) continue;
            if (out.at(qx, qy) == 0) out.at(qx, qy) = c;
          }
        }
      }
    }
  }
  return out;
}

ClassMask swap_classes(const ClassMask& mask, int a, int b) {
  ClassMask out = mask;
  for (int& l : out.labels) {
    if (l == a) {
      l = b;
    } else if (l == b) {
      l = a;
    }
  }
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace simgen::testing
