#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "simgen/data_io.hpp"
#include "simgen/image.hpp"

namespace simgen {

// Rows are samples.
using FeatureSet = Eigen::MatrixXd;

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::string name() const = 0;
  virtual int output_dim() const = 0;
  virtual Eigen::VectorXd extract(const RgbImage& image) const = 0;
};

// 16x16 bilinear thumbnail -> 768-vector -> fixed random orthonormal
// projection -> tanh.
class RandomProjectionExtractor final : public FeatureExtractor {
 public:
  RandomProjectionExtractor(std::uint64_t seed, int output_dim);
  std::string name() const override;
  int output_dim() const override { return static_cast<int>(projection_.rows()); }
  Eigen::VectorXd extract(const RgbImage& image) const override;
  const Eigen::MatrixXd& projection() const { return projection_; }

  static constexpr int kThumb = 16;
  static constexpr int kInputDim = kThumb * kThumb * 3;

 private:
  std::uint64_t seed_;
  Eigen::MatrixXd projection_;  // output_dim x 768, orthonormal rows
};

std::unique_ptr<FeatureExtractor> default_extractor(std::uint64_t seed = 0, int output_dim = 64);

FeatureSet extract_features(const FeatureExtractor& extractor, const std::vector<RgbImage>& images);

struct FeatureStats {
  std::size_t n = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // unbiased (n - 1)

  static FeatureStats from_features(const FeatureSet& features);
  // Pooled statistics of two disjoint sample sets.
  static FeatureStats merge(const FeatureStats& a, const FeatureStats& b);
  // Welford accumulation of a single sample.
  static FeatureStats single(const Eigen::VectorXd& x);
};

// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2), clipped at 0.
double frechet_distance(const FeatureStats& a, const FeatureStats& b);

// (x.y / d + 1)^3
double polynomial_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Unbiased MMD^2 averaged over aligned, non-overlapping blocks.
double kid(const FeatureSet& a, const FeatureSet& b, int block_size = 100);

inline constexpr double kCovarianceRegularization = 1e-6;

// Images come from DIR/images/*.png when that exists, else DIR/*.png, in
// sorted filename order.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);
std::vector<RgbImage> load_images(const std::filesystem::path& dir);

double fid_from_features(const FeatureSet& real, const FeatureSet& gen);
double fid_folders(const std::filesystem::path& real_dir, const std::filesystem::path& gen_dir,
                   const FeatureExtractor& extractor);
double kid_folders(const std::filesystem::path& real_dir, const std::filesystem::path& gen_dir,
                   const FeatureExtractor& extractor, int block_size = 100);

// ------------------------------------------------------------------- SID

struct SidClassResult {
  double sfid = 0.0;
  double skid = 0.0;
  int n_real = 0;
  int n_gen = 0;
  bool skipped = false;
  std::string reason;
};

struct SidReport {
  std::map<int, SidClassResult> per_class;
  double mean_sfid = 0.0;
  double mean_skid = 0.0;
  int evaluated_classes = 0;
};

struct SidOptions {
  int crop_size = 64;
  int min_pixels = 32;
  int kid_block_size = 100;
};

// Region isolation for class c: tight box over every class-c pixel, other
// pixels inside the box set to black (-1), resized to crop x crop.
RgbImage isolate_region(const RgbImage& image, const ClassMask& mask, int class_id, int crop_size);

SidReport sid(const std::vector<PairedSample>& real, const std::vector<PairedSample>& gen,
              const FeatureExtractor& extractor, const SidOptions& options = {});
SidReport sid(const std::filesystem::path& real_pairs_dir, const std::filesystem::path& gen_pairs_dir,
              const FeatureExtractor& extractor, const SidOptions& options = {});

nlohmann::json to_json(const SidReport& report);

// Pairs under DIR/images + DIR/masks, matched by file stem.
std::vector<PairedSample> load_pairs(const std::filesystem::path& dir);

// ------------------------------------------------------ feature files (.sgft)
// "SGFT" u32 version u32 count u32 dim, then count * dim little-endian f32.

inline constexpr std::uint32_t kFeatureFileVersion = 1;

void export_features(const std::filesystem::path& path, const FeatureSet& features);
FeatureSet import_features(const std::filesystem::path& path);

}  // namespace simgen
