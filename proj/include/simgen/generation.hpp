#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "simgen/cfl_codec.hpp"
#include "simgen/denoiser.hpp"
#include "simgen/diffusion_schedule.hpp"
#include "simgen/image.hpp"

namespace simgen {

struct GenerationBatch {
  std::vector<RgbImage> images;        // clamped to [-1, 1]
  std::vector<EncodedMask> raw_masks;  // unclamped mask channels
  std::vector<ClassMask> decoded_masks;
  std::uint64_t seed = 0;
  int num_steps = 0;

  std::size_t size() const { return images.size(); }
};

struct BoundingBox {
  int class_id = 0;
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;  // inclusive
  int y_max = 0;  // inclusive

  bool operator==(const BoundingBox&) const = default;
};

// Seed of the private random stream of batch item `index`.
std::uint64_t item_stream_seed(std::uint64_t seed, int index);

using SampleProgress = std::function<void(int t)>;

// Ancestral sampling from x_T ~ N(0, I) down to t = 1 (z = 0 on the final
// step). Every item draws from its own stream, so results do not depend on
// how items are grouped into forward passes.
GenerationBatch sample_pairs(const DenoiserNet& net, const NoiseSchedule& schedule, const ClassPalette& palette,
                             int count, int size, std::uint64_t seed, int chunk = 16,
                             const SampleProgress& progress = {});

// Splits a six-channel field into image (clamped) and raw mask parts and
// decodes the mask.
void split_field(const FieldBatch& x0, const ClassPalette& palette, GenerationBatch& out);

// Tight boxes of the 4-connected components of every class > 0 with at
// least min_area pixels, ordered by class id, then (y_min, x_min).
std::vector<BoundingBox> masks_to_boxes(const ClassMask& mask, int min_area);

// Default min_area: 8 pixels at 32x32, scaled with the pixel count.
int default_min_area(int width, int height);

struct ExportOptions {
  bool boxes = true;
  int min_area = -1;  // -1: default_min_area
};

// images/NNNN.png, masks/NNNN.png, masks_rgb/NNNN.png, grid.png and
// (optionally) boxes.json.
void export_batch(const GenerationBatch& batch, const ClassPalette& palette, const std::filesystem::path& out_dir,
                  const ExportOptions& options = {});

// [{"image": "NNNN", "class": c, "bbox": [x_min, y_min, x_max, y_max]}, ...]
void write_boxes_json(const std::filesystem::path& path, const std::vector<std::string>& ids,
                      const std::vector<std::vector<BoundingBox>>& boxes);

// Tiles of (image | coloured mask) in row-major order, ceil(sqrt(count)) per row.
std::vector<std::uint8_t> make_grid(const GenerationBatch& batch, const ClassPalette& palette, int& width, int& height);

}  // namespace simgen
