#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "simgen/cfl_codec.hpp"
#include "simgen/image.hpp"

namespace simgen {

struct PairedSample {
  RgbImage image;  // scaled to [-1, 1]
  ClassMask mask;
  std::string id;
};

// Layout on disk: root/images/<id>.png, root/masks/<id>.png, root/manifest.json.
struct DatasetManifest {
  std::filesystem::path root;
  int num_classes = 0;
  int width = 0;
  int height = 0;
  std::vector<std::string> ids;  // sorted
  std::map<std::string, std::vector<std::string>> splits{{"train", {}}, {"val", {}}, {"test", {}}};
  std::vector<std::uint64_t> class_pixel_counts;

  std::vector<std::string> train_ids() const;
};

// Validates every image/mask pair under root. Problems are collected and
// thrown together as a ValidationError. All ids start in the train split.
// If root/manifest.json exists its splits are honoured.
DatasetManifest ingest(const std::filesystem::path& root, int num_classes);

PairedSample load_sample(const DatasetManifest& manifest, const std::string& id);
std::vector<PairedSample> load_samples(const DatasetManifest& manifest, const std::vector<std::string>& ids);

// Seeded shuffle of ids, then partition into train/val/test by fractions.
DatasetManifest split(const DatasetManifest& manifest, std::array<double, 3> fractions, std::uint64_t seed);

void save_manifest(const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& root);

// ---------------------------------------------------------------- toy data

enum class ShapeKind { circle, rectangle, triangle };

struct ToyShape {
  ShapeKind kind;
  int class_id;
  // circle: cx, cy, r; rectangle: x0, y0, x1, y1; triangle: 3 vertices (x, y).
  std::array<double, 6> geom{};
};

struct ToySample {
  PairedSample pair;
  std::vector<ToyShape> shapes;  // in painting order
};

// Class c > 0 maps to shape kind (c - 1) % 3 and a fixed, class-unique colour.
ShapeKind toy_shape_kind(int class_id);
std::array<float, 3> toy_class_color(int class_id, int num_classes);

// Sample `index` of the toy set; independent of every other index.
ToySample render_toy_sample(int size, int num_classes, std::uint64_t seed, int index);

// Writes count toy pairs plus manifest.json into out_dir.
DatasetManifest make_toy_dataset(const std::filesystem::path& out_dir, int count, int size, int num_classes,
                                 std::uint64_t seed);

// In-memory equivalent of make_toy_dataset.
std::vector<PairedSample> toy_samples(int count, int size, int num_classes, std::uint64_t seed);

// Writes pairs in the ingest layout.
void write_pairs(const std::filesystem::path& root, const std::vector<PairedSample>& pairs);

std::string sample_id(int index);

}  // namespace simgen
