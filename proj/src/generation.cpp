#include "simgen/generation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <tuple>

#include <json.hpp>

#include "simgen/data_io.hpp"
#include "simgen/errors.hpp"
#include "simgen/parallel.hpp"
#include "simgen/rng.hpp"

namespace fs = std::filesystem;

namespace simgen {

std::uint64_t item_stream_seed(std::uint64_t seed, int index) {
  return mix64(seed ^ static_cast<std::uint64_t>(index));
}

void split_field(const FieldBatch& x0, const ClassPalette& palette, GenerationBatch& out) {
  for (int b = 0; b < x0.n; ++b) {
    RgbImage img(x0.w, x0.h);
    EncodedMask raw(x0.w, x0.h);
    for (int y = 0; y < x0.h; ++y) {
      for (int x = 0; x < x0.w; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * x0.w + x;
        for (int ch = 0; ch < 3; ++ch) {
          img.at(x, y, ch) = std::clamp(x0.at(b, ch, y, x), -1.0f, 1.0f);
          raw.values[3 * p + static_cast<std::size_t>(ch)] = x0.at(b, 3 + ch, y, x);
        }
      }
    }
    out.decoded_masks.push_back(decode_mask(raw, palette));
    out.images.push_back(std::move(img));
    out.raw_masks.push_back(std::move(raw));
  }
}

GenerationBatch sample_pairs(const DenoiserNet& net, const NoiseSchedule& schedule, const ClassPalette& palette,
                             int count, int size, std::uint64_t seed, int chunk, const SampleProgress& progress) {
  if (count < 0) throw DomainError("sample_pairs: count must be non-negative");
  const int m = net.config().size_multiple();
  if (size < 1 || size % m != 0) {
    throw DomainError("sample_pairs: size " + std::to_string(size) + " must be a positive multiple of " +
                      std::to_string(m));
  }
  chunk = std::max(1, chunk);
  GenerationBatch out;
  out.seed = seed;
  out.num_steps = schedule.num_steps();
  const std::size_t per_item = static_cast<std::size_t>(kSixChannels) * size * size;

  for (int first = 0; first < count; first += chunk) {
    const int n = std::min(chunk, count - first);
    std::vector<Rng> streams;
    for (int i = 0; i < n; ++i) streams.emplace_back(item_stream_seed(seed, first + i));
    FieldBatch x(n, kSixChannels, size, size);
    for (int i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < per_item; ++k) {
        x.data[static_cast<std::size_t>(i) * per_item + k] = static_cast<float>(streams[static_cast<std::size_t>(i)].normal());
      }
    }
    FieldBatch z(n, kSixChannels, size, size);
    std::vector<int> ts(static_cast<std::size_t>(n));
    for (int t = schedule.num_steps(); t >= 1; --t) {
      std::fill(ts.begin(), ts.end(), t);
      const FieldBatch eps = net.predict_noise(x, ts);
      if (t > 1) {
        for (int i = 0; i < n; ++i) {
          for (std::size_t k = 0; k < per_item; ++k) {
            z.data[static_cast<std::size_t>(i) * per_item + k] =
                static_cast<float>(streams[static_cast<std::size_t>(i)].normal());
          }
        }
      } else {
        std::fill(z.data.begin(), z.data.end(), 0.0f);
      }
      x = p_sample_step(x, t, eps, schedule, z);
      if (progress) progress(t);
    }
    split_field(x, palette, out);
  }
  return out;
}

namespace {

// Union-find over provisional labels of a two-pass raster scan.
struct DisjointSet {
  std::vector<int> parent;
  int make() {
    parent.push_back(static_cast<int>(parent.size()));
    return parent.back();
  }
  int find(int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace

std::vector<BoundingBox> masks_to_boxes(const ClassMask& mask, int min_area) {
  const int w = mask.width, h = mask.height;
  std::vector<int> label(mask.labels.size(), -1);
  DisjointSet ds;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int c = mask.at(x, y);
      if (c <= 0) continue;
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const int left = (x > 0 && mask.at(x - 1, y) == c) ? label[i - 1] : -1;
      const int up = (y > 0 && mask.at(x, y - 1) == c) ? label[i - static_cast<std::size_t>(w)] : -1;
      if (left < 0 && up < 0) {
        label[i] = ds.make();
      } else if (left >= 0 && up >= 0) {
        ds.unite(left, up);
        label[i] = std::min(ds.find(left), ds.find(up));
      } else {
        label[i] = std::max(left, up);
      }
    }
  }
  struct Acc {
    BoundingBox box;
    int area = 0;
  };
  std::vector<Acc> acc(ds.parent.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (label[i] < 0) continue;
      Acc& a = acc[static_cast<std::size_t>(ds.find(label[i]))];
      if (a.area == 0) {
        a.box = {mask.at(x, y), x, y, x, y};
      } else {
        a.box.x_min = std::min(a.box.x_min, x);
        a.box.y_min = std::min(a.box.y_min, y);
        a.box.x_max = std::max(a.box.x_max, x);
        a.box.y_max = std::max(a.box.y_max, y);
      }
      ++a.area;
    }
  }
  std::vector<BoundingBox> boxes;
  for (const auto& a : acc) {
    if (a.area > 0 && a.area >= min_area) boxes.push_back(a.box);
  }
  std::sort(boxes.begin(), boxes.end(), [](const BoundingBox& a, const BoundingBox& b) {
    return std::tie(a.class_id, a.y_min, a.x_min) < std::tie(b.class_id, b.y_min, b.x_min);
  });
  return boxes;
}

int default_min_area(int width, int height) {
  return std::max(1, static_cast<int>(std::lround(8.0 * width * height / (32.0 * 32.0))));
}

void write_boxes_json(const fs::path& path, const std::vector<std::string>& ids,
                      const std::vector<std::vector<BoundingBox>>& boxes) {
  auto j = nlohmann::json::array();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (const auto& b : boxes[i]) {
      j.push_back({{"image", ids[i]}, {"class", b.class_id}, {"bbox", {b.x_min, b.y_min, b.x_max, b.y_max}}});
    }
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<std::uint8_t> make_grid(const GenerationBatch& batch, const ClassPalette& palette, int& width,
                                    int& height) {
  const int count = static_cast<int>(batch.size());
  if (count == 0) {
    width = height = 0;
    return {};
  }
  const int tw = batch.images[0].width * 2, th = batch.images[0].height;
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
  const int rows = (count + cols - 1) / cols;
  width = cols * tw;
  height = rows * th;
  std::vector<std::uint8_t> grid(static_cast<std::size_t>(width) * height * 3, 0);
  for (int i = 0; i < count; ++i) {
    const RgbImage& img = batch.images[static_cast<std::size_t>(i)];
    const RgbImage colored = colorize_mask(batch.decoded_masks[static_cast<std::size_t>(i)], palette);
    const int ox = (i % cols) * tw, oy = (i / cols) * th;
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        for (int ch = 0; ch < 3; ++ch) {
          grid[(static_cast<std::size_t>(oy + y) * width + ox + x) * 3 + ch] = to_byte(img.at(x, y, ch));
          grid[(static_cast<std::size_t>(oy + y) * width + ox + img.width + x) * 3 + ch] =
              to_byte(colored.at(x, y, ch));
        }
      }
    }
  }
  return grid;
}

void export_batch(const GenerationBatch& batch, const ClassPalette& palette, const fs::path& out_dir,
                  const ExportOptions& options) {
  try {
    for (const char* sub : {"images", "masks", "masks_rgb"}) fs::create_directories(out_dir / sub);
  } catch (const fs::filesystem_error& e) {
    throw IoError("cannot create output directories under " + out_dir.string() + ": " + e.what());
  }
  std::vector<std::string> ids(batch.size());
  std::vector<std::vector<BoundingBox>> boxes(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) {
    ids[i] = sample_id(static_cast<int>(i));
    const ClassMask& mask = batch.decoded_masks[i];
    save_png(out_dir / "images" / (ids[i] + ".png"), batch.images[i]);
    save_mask_png(out_dir / "masks" / (ids[i] + ".png"), mask);
    save_png(out_dir / "masks_rgb" / (ids[i] + ".png"), colorize_mask(mask, palette));
    if (options.boxes) {
      const int min_area = options.min_area >= 0 ? options.min_area : default_min_area(mask.width, mask.height);
      boxes[i] = masks_to_boxes(mask, min_area);
    }
  });
  if (options.boxes) write_boxes_json(out_dir / "boxes.json", ids, boxes);
  int gw = 0, gh = 0;
  const auto grid = make_grid(batch, palette, gw, gh);
  if (!grid.empty()) save_png_rgb8(out_dir / "grid.png", gw, gh, grid);
}

}  // namespace simgen
