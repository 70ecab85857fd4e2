#include "simgen/cfl_codec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "simgen/errors.hpp"
#include "simgen/rng.hpp"

namespace simgen {

std::string to_string(MaskEncoding e) { return e == MaskEncoding::cfl ? "cfl" : "random_rgb"; }

MaskEncoding parse_mask_encoding(const std::string& s) {
  if (s == "cfl") return MaskEncoding::cfl;
  if (s == "random_rgb" || s == "nocfl") return MaskEncoding::random_rgb;
  throw DomainError("unknown mask encoding '" + s + "' (expected cfl or nocfl)");
}

ClassPalette::ClassPalette(std::vector<Vec3> points, MaskEncoding encoding)
    : points_(std::move(points)), encoding_(encoding) {
  if (points_.empty()) throw DomainError("palette must contain at least one class");
}

Vec3 cfl_point(int num_classes, int i) {
  if (num_classes < 1) throw DomainError("cfl_point: num_classes must be >= 1");
  if (i < 0 || i >= num_classes) {
    throw DomainError("cfl_point: index " + std::to_string(i) + " outside [0, " + std::to_string(num_classes) + ")");
  }
  const double golden_ratio = (1.0 + std::sqrt(5.0)) / 2.0;
  const double theta = 2.0 * std::numbers::pi * i / golden_ratio;
  const double phi = std::acos(1.0 - 2.0 * (i + 0.5) / num_classes);
  return {std::cos(theta) * std::sin(phi), std::sin(theta) * std::sin(phi), std::cos(phi)};
}

ClassPalette build_palette(int num_classes) {
  if (num_classes < 1) throw DomainError("build_palette: num_classes must be >= 1");
  std::vector<Vec3> points;
  points.reserve(static_cast<std::size_t>(num_classes));
  for (int i = 0; i < num_classes; ++i) points.push_back(cfl_point(num_classes, i));
  return ClassPalette(std::move(points), MaskEncoding::cfl);
}

ClassPalette build_random_palette(int num_classes) {
  if (num_classes < 1) throw DomainError("build_random_palette: num_classes must be >= 1");
  constexpr double kMinSeparation = 0.05;
  Rng rng(static_cast<std::uint64_t>(num_classes));
  std::vector<Vec3> points;
  while (static_cast<int>(points.size()) < num_classes) {
    const Vec3 p{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const bool clash = std::any_of(points.begin(), points.end(), [&](const Vec3& q) {
      const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
      return std::sqrt(dx * dx + dy * dy + dz * dz) < kMinSeparation;
    });
    if (!clash) points.push_back(p);
  }
  return ClassPalette(std::move(points), MaskEncoding::random_rgb);
}

ClassPalette make_palette(int num_classes, MaskEncoding encoding) {
  return encoding == MaskEncoding::cfl ? build_palette(num_classes) : build_random_palette(num_classes);
}

EncodedMask encode_mask(const ClassMask& mask, const ClassPalette& palette) {
  EncodedMask out(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.labels.size(); ++i) {
    const int label = mask.labels[i];
    if (label < 0 || label >= palette.num_classes()) {
      throw DomainError("encode_mask: label " + std::to_string(label) + " at pixel " + std::to_string(i) +
                        " outside [0, " + std::to_string(palette.num_classes()) + ")");
    }
    const Vec3& p = palette[label];
    std::copy(p.begin(), p.end(), out.values.begin() + static_cast<std::ptrdiff_t>(3 * i));
  }
  return out;
}

EncodedMask encode_mask_nocfl(const ClassMask& mask, int num_classes) {
  return encode_mask(mask, build_random_palette(num_classes));
}

int decode_pixel(const Vec3& v, const ClassPalette& palette) {
  const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (norm == 0.0 || !std::isfinite(norm)) return 0;
  int best = 0;
  double best_cos = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < palette.num_classes(); ++c) {
    const Vec3& p = palette[c];
    const double pn = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    if (pn == 0.0) continue;
    const double cos = (v[0] * p[0] + v[1] * p[1] + v[2] * p[2]) / (norm * pn);
    if (cos > best_cos) {
      best_cos = cos;
      best = c;
    }
  }
  return best;
}

ClassMask decode_mask(const EncodedMask& encoded, const ClassPalette& palette) {
  ClassMask out(encoded.width, encoded.height);
  for (std::size_t i = 0; i < out.labels.size(); ++i) out.labels[i] = decode_pixel(encoded.pixel(i), palette);
  return out;
}

double min_pairwise_angle(const ClassPalette& palette) {
  if (palette.num_classes() < 2) throw DomainError("min_pairwise_angle: needs at least 2 classes");
  double best = std::numbers::pi;
  const auto& pts = palette.points();
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      const double na = std::hypot(pts[a][0], pts[a][1], pts[a][2]);
      const double nb = std::hypot(pts[b][0], pts[b][1], pts[b][2]);
      double c = (pts[a][0] * pts[b][0] + pts[a][1] * pts[b][1] + pts[a][2] * pts[b][2]) / (na * nb);
      c = std::clamp(c, -1.0, 1.0);
      best = std::min(best, std::acos(c));
    }
  }
  return best;
}

std::array<std::uint8_t, 3> display_rgb(const Vec3& v) {
  std::array<std::uint8_t, 3> rgb{};
  for (int k = 0; k < 3; ++k) {
    const double x = std::clamp((v[static_cast<std::size_t>(k)] + 1.0) / 2.0 * 255.0, 0.0, 255.0);
    rgb[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(std::lround(x));
  }
  return rgb;
}

void save_palette_json(const ClassPalette& palette, const std::filesystem::path& path) {
  nlohmann::json j;
  j["num_classes"] = palette.num_classes();
  j["encoding"] = to_string(palette.encoding());
  j["points"] = palette.points();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write palette file " + path.string());
  out << std::setprecision(17) << j.dump(2) << '\n';
}

ClassPalette load_palette_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read palette file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    auto points = j.at("points").get<std::vector<Vec3>>();
    if (static_cast<int>(points.size()) != j.at("num_classes").get<int>()) {
      throw FormatError(path.string() + ": num_classes does not match point count", 0);
    }
    const auto enc = j.contains("encoding") ? parse_mask_encoding(j["encoding"].get<std::string>()) : MaskEncoding::cfl;
    return ClassPalette(std::move(points), enc);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what(), 0);
  }
}

}  // namespace simgen
