#include "simgen/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "simgen/errors.hpp"
#include "simgen/parallel.hpp"
#include "simgen/rng.hpp"

namespace fs = std::filesystem;

namespace simgen {

std::string sample_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", index);
  return buf;
}

std::vector<std::string> DatasetManifest::train_ids() const { return splits.at("train"); }

namespace {

std::set<std::string> png_stems(const fs::path& dir) {
  std::set<std::string> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") out.insert(e.path().stem().string());
  }
  return out;
}

}  // namespace

DatasetManifest ingest(const fs::path& root, int num_classes) {
  if (num_classes < 1 || num_classes > 256) throw DomainError("ingest: num_classes must be in [1, 256]");
  std::vector<std::string> problems;
  if (!fs::is_directory(root / "images")) problems.push_back(root.string() + ": missing images/ directory");
  if (!fs::is_directory(root / "masks")) problems.push_back(root.string() + ": missing masks/ directory");
  if (!problems.empty()) throw ValidationError(problems);

  const auto images = png_stems(root / "images");
  const auto masks = png_stems(root / "masks");
  for (const auto& s : images) {
    if (!masks.contains(s)) problems.push_back("images/" + s + ".png has no matching mask");
  }
  for (const auto& s : masks) {
    if (!images.contains(s)) problems.push_back("masks/" + s + ".png has no matching image");
  }
  std::vector<std::string> ids;
  std::set_intersection(images.begin(), images.end(), masks.begin(), masks.end(), std::back_inserter(ids));
  if (ids.empty() && problems.empty()) problems.push_back(root.string() + ": no image/mask pairs found");

  struct Check {
    int w = 0, h = 0;
    std::vector<std::uint64_t> counts;
    std::vector<std::string> problems;
  };
  std::vector<Check> checks(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) {
    Check& c = checks[i];
    c.counts.assign(static_cast<std::size_t>(num_classes), 0);
    try {
      const RgbImage img = load_png(root / "images" / (ids[i] + ".png"));
      const ClassMask mask = load_mask_png(root / "masks" / (ids[i] + ".png"));
      c.w = img.width;
      c.h = img.height;
      if (img.width != mask.width || img.height != mask.height) {
        c.problems.push_back(ids[i] + ": size mismatch, image " + std::to_string(img.width) + "x" +
                             std::to_string(img.height) + " vs mask " + std::to_string(mask.width) + "x" +
                             std::to_string(mask.height));
      }
      int bad = -1;
      for (int l : mask.labels) {
        if (l >= num_classes) {
          bad = std::max(bad, l);
        } else {
          ++c.counts[static_cast<std::size_t>(l)];
        }
      }
      if (bad >= 0) {
        c.problems.push_back("masks/" + ids[i] + ".png: label " + std::to_string(bad) + " >= num_classes " +
                             std::to_string(num_classes));
      }
    } catch (const std::exception& e) {
      c.problems.push_back(e.what());
    }
  });

  DatasetManifest m;
  m.root = root;
  m.num_classes = num_classes;
  m.ids = ids;
  m.class_pixel_counts.assign(static_cast<std::size_t>(num_classes), 0);
  for (const auto& c : checks) {
    problems.insert(problems.end(), c.problems.begin(), c.problems.end());
    for (std::size_t k = 0; k < c.counts.size(); ++k) m.class_pixel_counts[k] += c.counts[k];
    if (m.width == 0 && c.w > 0) {
      m.width = c.w;
      m.height = c.h;
    }
  }
  if (!problems.empty()) throw ValidationError(problems);
  m.splits["train"] = ids;

  if (fs::exists(root / "manifest.json")) {
    const DatasetManifest stored = load_manifest(root);
    std::set<std::string> known(ids.begin(), ids.end());
    for (const auto& [name, list] : stored.splits) {
      for (const auto& id : list) {
        if (!known.contains(id)) problems.push_back("manifest.json lists unknown id " + id + " in " + name);
      }
    }
    if (!problems.empty()) throw ValidationError(problems);
    m.splits = stored.splits;
  }
  return m;
}

PairedSample load_sample(const DatasetManifest& manifest, const std::string& id) {
  PairedSample s;
  s.id = id;
  s.image = load_png(manifest.root / "images" / (id + ".png"));
  s.mask = load_mask_png(manifest.root / "masks" / (id + ".png"));
  if (manifest.width > 0 && (s.image.width != manifest.width || s.image.height != manifest.height)) {
    s.image = resize_bilinear(s.image, manifest.width, manifest.height);
    s.mask = resize_nearest(s.mask, manifest.width, manifest.height);
  }
  return s;
}

std::vector<PairedSample> load_samples(const DatasetManifest& manifest, const std::vector<std::string>& ids) {
  std::vector<PairedSample> out(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) { out[i] = load_sample(manifest, ids[i]); });
  return out;
}

DatasetManifest split(const DatasetManifest& manifest, std::array<double, 3> fractions, std::uint64_t seed) {
  for (double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw DomainError("split: fractions must lie in [0, 1]");
  }
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9) {
    throw DomainError("split: fractions must sum to 1");
  }
  std::vector<std::string> ids = manifest.ids;
  Rng rng(seed);
  shuffle(ids.begin(), ids.end(), rng);
  const auto n = ids.size();
  const auto n_train = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(fractions[0] * n)));
  const auto n_val = std::min<std::size_t>(n - n_train, static_cast<std::size_t>(std::llround(fractions[1] * n)));
  const auto n_test = fractions[2] == 0.0 ? 0 : n - n_train - n_val;
  DatasetManifest out = manifest;
  auto first = ids.begin();
  out.splits["train"].assign(first, first + static_cast<std::ptrdiff_t>(n_train));
  out.splits["val"].assign(first + static_cast<std::ptrdiff_t>(n_train),
                           first + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.splits["test"].assign(first + static_cast<std::ptrdiff_t>(n_train + n_val),
                            first + static_cast<std::ptrdiff_t>(n_train + n_val + n_test));
  if (n_test == 0 && n_train + n_val < n) {
    // Rounding leftovers go to train when no test split was requested.
    out.splits["train"].insert(out.splits["train"].end(), first + static_cast<std::ptrdiff_t>(n_train + n_val),
                               ids.end());
  }
  return out;
}

void save_manifest(const DatasetManifest& m) {
  nlohmann::json j;
  j["num_classes"] = m.num_classes;
  j["resolution"] = {m.width, m.height};
  j["splits"] = m.splits;
  j["class_pixel_counts"] = m.class_pixel_counts;
  std::ofstream out(m.root / "manifest.json");
  if (!out) throw IoError("cannot write " + (m.root / "manifest.json").string());
  out << j.dump(2) << '\n';
}

DatasetManifest load_manifest(const fs::path& root) {
  std::ifstream in(root / "manifest.json");
  if (!in) throw IoError("cannot read " + (root / "manifest.json").string());
  try {
    const auto j = nlohmann::json::parse(in);
    DatasetManifest m;
    m.root = root;
    m.num_classes = j.at("num_classes").get<int>();
    const auto res = j.at("resolution").get<std::array<int, 2>>();
    m.width = res[0];
    m.height = res[1];
    m.splits = j.at("splits").get<std::map<std::string, std::vector<std::string>>>();
    if (j.contains("class_pixel_counts")) m.class_pixel_counts = j["class_pixel_counts"].get<std::vector<std::uint64_t>>();
    std::set<std::string> all;
    for (const auto& [name, list] : m.splits) {
      for (const auto& id : list) {
        if (!all.insert(id).second) throw FormatError("manifest.json: id " + id + " appears in two splits", 0);
      }
    }
    m.ids.assign(all.begin(), all.end());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError((root / "manifest.json").string() + ": " + e.what(), 0);
  }
}

// ---------------------------------------------------------------- toy data

ShapeKind toy_shape_kind(int class_id) { return static_cast<ShapeKind>((class_id - 1) % 3); }

std::array<float, 3> toy_class_color(int class_id, int num_classes) {
  // Evenly spaced hues at full saturation; value alternates to separate
  // neighbouring hues further.
  const double hue = 6.0 * (class_id - 1) / std::max(1, num_classes - 1);
  const double value = (class_id % 2 == 0) ? 0.75 : 1.0;
  const int sector = static_cast<int>(hue) % 6;
  const double f = hue - std::floor(hue);
  double r = 0, g = 0, b = 0;
  switch (sector) {
    case 0: r = 1; g = f; b = 0; break;
    case 1: r = 1 - f; g = 1; b = 0; break;
    case 2: r = 0; g = 1; b = f; break;
    case 3: r = 0; g = 1 - f; b = 1; break;
    case 4: r = f; g = 0; b = 1; break;
    default: r = 1; g = 0; b = 1 - f; break;
  }
  auto to_field = [&](double c) { return static_cast<float>(2.0 * (0.1 + 0.9 * c * value) - 1.0); };
  return {to_field(r), to_field(g), to_field(b)};
}

namespace {

double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

bool shape_contains(const ToyShape& s, double px, double py) {
  const auto& g = s.geom;
  switch (s.kind) {
    case ShapeKind::circle: {
      const double dx = px - g[0], dy = py - g[1];
      return dx * dx + dy * dy <= g[2] * g[2];
    }
    case ShapeKind::rectangle:
      return px >= g[0] && px < g[2] && py >= g[1] && py < g[3];
    case ShapeKind::triangle: {
      const double e0 = edge(g[0], g[1], g[2], g[3], px, py);
      const double e1 = edge(g[2], g[3], g[4], g[5], px, py);
      const double e2 = edge(g[4], g[5], g[0], g[1], px, py);
      return (e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0);
    }
  }
  return false;
}

// Bilinearly interpolated lattice noise in [-1, 1].
std::vector<double> value_noise(int size, int cells, Rng& rng) {
  std::vector<double> lattice(static_cast<std::size_t>((cells + 1) * (cells + 1)));
  for (auto& v : lattice) v = rng.uniform(-1.0, 1.0);
  std::vector<double> out(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < size; ++y) {
    const double fy = (y + 0.5) * cells / size;
    const int y0 = std::min(static_cast<int>(fy), cells - 1);
    const double wy = fy - y0;
    for (int x = 0; x < size; ++x) {
      const double fx = (x + 0.5) * cells / size;
      const int x0 = std::min(static_cast<int>(fx), cells - 1);
      const double wx = fx - x0;
      auto L = [&](int i, int j) { return lattice[static_cast<std::size_t>(j * (cells + 1) + i)]; };
      out[static_cast<std::size_t>(y) * size + x] =
          (L(x0, y0) * (1 - wx) + L(x0 + 1, y0) * wx) * (1 - wy) + (L(x0, y0 + 1) * (1 - wx) + L(x0 + 1, y0 + 1) * wx) * wy;
    }
  }
  return out;
}

}  // namespace

ToySample render_toy_sample(int size, int num_classes, std::uint64_t seed, int index) {
  if (num_classes < 2) throw DomainError("toy dataset: num_classes must be >= 2");
  if (size < 16) throw DomainError("toy dataset: size must be >= 16");
  Rng rng(derive_seed(seed, 0x70790000ULL, static_cast<std::uint64_t>(index)));
  ToySample out;
  out.pair.id = sample_id(index);
  out.pair.image = RgbImage(size, size);
  out.pair.mask = ClassMask(size, size, 0);

  const double base[3] = {0.32, 0.26, 0.24};
  const auto noise = value_noise(size, 4, rng);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double n = 0.08 * noise[static_cast<std::size_t>(y) * size + x];
      for (int ch = 0; ch < 3; ++ch) out.pair.image.at(x, y, ch) = static_cast<float>(2.0 * (base[ch] + n) - 1.0);
    }
  }

  const int shape_count = 1 + static_cast<int>(rng.below(3));
  const double s = size;
  for (int k = 0; k < shape_count; ++k) {
    ToyShape shape;
    shape.class_id = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(num_classes - 1)));
    shape.kind = toy_shape_kind(shape.class_id);
    const double extent = rng.uniform(0.16, 0.3) * s;  // half-size
    const double cx = rng.uniform(extent, s - extent);
    const double cy = rng.uniform(extent, s - extent);
    switch (shape.kind) {
      case ShapeKind::circle:
        shape.geom = {cx, cy, extent, 0, 0, 0};
        break;
      case ShapeKind::rectangle: {
        const double aspect = rng.uniform(0.6, 1.0);
        const bool wide = rng.below(2) == 0;
        const double hw = wide ? extent : extent * aspect;
        const double hh = wide ? extent * aspect : extent;
        shape.geom = {cx - hw, cy - hh, cx + hw, cy + hh, 0, 0};
        break;
      }
      case ShapeKind::triangle: {
        const double rot = rng.uniform(0.0, 2.0 * 3.141592653589793);
        for (int v = 0; v < 3; ++v) {
          const double a = rot + v * 2.0 * 3.141592653589793 / 3.0;
          shape.geom[static_cast<std::size_t>(2 * v)] = cx + 1.15 * extent * std::cos(a);
          shape.geom[static_cast<std::size_t>(2 * v + 1)] = cy + 1.15 * extent * std::sin(a);
        }
        break;
      }
    }
    const auto color = toy_class_color(shape.class_id, num_classes);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        if (!shape_contains(shape, x + 0.5, y + 0.5)) continue;
        out.pair.mask.at(x, y) = shape.class_id;
        for (int ch = 0; ch < 3; ++ch) out.pair.image.at(x, y, ch) = color[static_cast<std::size_t>(ch)];
      }
    }
    out.shapes.push_back(shape);
  }
  // Quantize through 8 bits so in-memory samples equal their PNG round trip.
  for (auto& v : out.pair.image.data) v = from_byte(to_byte(v));
  return out;
}

std::vector<PairedSample> toy_samples(int count, int size, int num_classes, std::uint64_t seed) {
  if (count < 1) throw DomainError("toy dataset: count must be >= 1");
  std::vector<PairedSample> out(static_cast<std::size_t>(count));
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = render_toy_sample(size, num_classes, seed, static_cast<int>(i)).pair;
  });
  return out;
}

void write_pairs(const fs::path& root, const std::vector<PairedSample>& pairs) {
  fs::create_directories(root / "images");
  fs::create_directories(root / "masks");
  parallel_for(pairs.size(), [&](std::size_t i) {
    save_png(root / "images" / (pairs[i].id + ".png"), pairs[i].image);
    save_mask_png(root / "masks" / (pairs[i].id + ".png"), pairs[i].mask);
  });
}

DatasetManifest make_toy_dataset(const fs::path& out_dir, int count, int size, int num_classes, std::uint64_t seed) {
  const auto pairs = toy_samples(count, size, num_classes, seed);
  write_pairs(out_dir, pairs);
  DatasetManifest m;
  m.root = out_dir;
  m.num_classes = num_classes;
  m.width = size;
  m.height = size;
  m.class_pixel_counts.assign(static_cast<std::size_t>(num_classes), 0);
  for (const auto& p : pairs) {
    m.ids.push_back(p.id);
    for (int l : p.mask.labels) ++m.class_pixel_counts[static_cast<std::size_t>(l)];
  }
  m.splits["train"] = m.ids;
  save_manifest(m);
  return m;
}

}  // namespace simgen
