#pragma once

#include <cstddef>
#include <vector>

namespace simgen {

// Batch of multi-channel real fields in NCHW order. A six-channel field
// carries image RGB in channels 0-2 and the encoded mask in channels 3-5.
struct FieldBatch {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<float> data;

  FieldBatch() = default;
  FieldBatch(int n_, int c_, int h_, int w_, float fill = 0.0f)
      : n(n_), c(c_), h(h_), w(w_), data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

  std::size_t index(int b, int ch, int y, int x) const {
    return ((static_cast<std::size_t>(b) * c + ch) * h + y) * w + x;
  }
  float& at(int b, int ch, int y, int x) { return data[index(b, ch, y, x)]; }
  float at(int b, int ch, int y, int x) const { return data[index(b, ch, y, x)]; }

  std::size_t sample_size() const { return static_cast<std::size_t>(c) * h * w; }
  std::size_t size() const { return data.size(); }
  bool same_shape(const FieldBatch& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }

  bool operator==(const FieldBatch&) const = default;
};

inline constexpr int kSixChannels = 6;

}  // namespace simgen
