#include "simgen/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "simgen/errors.hpp"
#include "simgen/parallel.hpp"
#include "simgen/rng.hpp"

namespace fs = std::filesystem;

namespace simgen {

// ------------------------------------------------------------- extractor

RandomProjectionExtractor::RandomProjectionExtractor(std::uint64_t seed, int output_dim) : seed_(seed) {
  if (output_dim < 8 || output_dim > kInputDim) {
    throw DomainError("feature extractor: output_dim must be in [8, " + std::to_string(kInputDim) + "]");
  }
  Rng rng(derive_seed(seed, 0x46454154ULL));
  Eigen::MatrixXd gauss(kInputDim, output_dim);
  for (Eigen::Index c = 0; c < gauss.cols(); ++c) {
    for (Eigen::Index r = 0; r < gauss.rows(); ++r) gauss(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(kInputDim, output_dim);
  projection_ = q.transpose();
}

std::string RandomProjectionExtractor::name() const {
  return "random-projection-" + std::to_string(output_dim()) + "-seed" + std::to_string(seed_);
}

Eigen::VectorXd RandomProjectionExtractor::extract(const RgbImage& image) const {
  const RgbImage thumb = resize_bilinear(image, kThumb, kThumb);
  Eigen::VectorXd x(kInputDim);
  for (int i = 0; i < kInputDim; ++i) x[i] = thumb.data[static_cast<std::size_t>(i)];
  return (projection_ * x).array().tanh().matrix();
}

std::unique_ptr<FeatureExtractor> default_extractor(std::uint64_t seed, int output_dim) {
  return std::make_unique<RandomProjectionExtractor>(seed, output_dim);
}

FeatureSet extract_features(const FeatureExtractor& extractor, const std::vector<RgbImage>& images) {
  FeatureSet out(static_cast<Eigen::Index>(images.size()), extractor.output_dim());
  parallel_for(images.size(), [&](std::size_t i) {
    out.row(static_cast<Eigen::Index>(i)) = extractor.extract(images[i]).transpose();
  });
  return out;
}

// ------------------------------------------------------------ statistics

FeatureStats FeatureStats::single(const Eigen::VectorXd& x) {
  return FeatureStats{1, x, Eigen::MatrixXd::Zero(x.size(), x.size())};
}

FeatureStats FeatureStats::merge(const FeatureStats& a, const FeatureStats& b) {
  if (a.n == 0) return b;
  if (b.n == 0) return a;
  if (a.mean.size() != b.mean.size()) throw DomainError("FeatureStats::merge: dimension mismatch");
  const double na = static_cast<double>(a.n), nb = static_cast<double>(b.n), n = na + nb;
  const Eigen::VectorXd delta = b.mean - a.mean;
  // Scatter matrices (sum of squared deviations) add with a between-set term.
  const Eigen::MatrixXd scatter_a = a.n > 1 ? Eigen::MatrixXd(a.cov * (na - 1)) : Eigen::MatrixXd::Zero(a.cov.rows(), a.cov.cols());
  const Eigen::MatrixXd scatter_b = b.n > 1 ? Eigen::MatrixXd(b.cov * (nb - 1)) : Eigen::MatrixXd::Zero(b.cov.rows(), b.cov.cols());
  const Eigen::MatrixXd scatter = scatter_a + scatter_b + delta * delta.transpose() * (na * nb / n);
  FeatureStats out;
  out.n = a.n + b.n;
  out.mean = a.mean + delta * (nb / n);
  out.cov = scatter / (n - 1);
  return out;
}

FeatureStats FeatureStats::from_features(const FeatureSet& f) {
  if (f.rows() < 2) throw DomainError("FeatureStats: need at least 2 samples for an unbiased covariance");
  FeatureStats s;
  s.n = static_cast<std::size_t>(f.rows());
  s.mean = f.colwise().mean().transpose();
  const Eigen::MatrixXd centered = f.rowwise() - s.mean.transpose();
  s.cov = (centered.transpose() * centered) / static_cast<double>(f.rows() - 1);
  return s;
}

namespace {

void require_symmetric(const Eigen::MatrixXd& m, const char* which) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DomainError(std::string("frechet_distance: covariance ") + which + " is not symmetric");
  }
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double frechet_distance(const FeatureStats& a, const FeatureStats& b) {
  if (a.mean.size() != b.mean.size() || a.cov.rows() != b.cov.rows() || a.cov.rows() != a.mean.size() ||
      a.cov.rows() != a.cov.cols() || b.cov.rows() != b.cov.cols()) {
    throw DomainError("frechet_distance: dimension mismatch");
  }
  require_symmetric(a.cov, "a");
  require_symmetric(b.cov, "b");
  const Eigen::MatrixXd sa = psd_sqrt(a.cov);
  Eigen::MatrixXd inner = sa * b.cov * sa;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner, Eigen::EigenvaluesOnly);
  const double trace_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double d = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * trace_sqrt;
  return std::max(0.0, d);
}

double polynomial_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double k = x.dot(y) / static_cast<double>(x.size()) + 1.0;
  return k * k * k;
}

namespace {

double mmd2_unbiased(const FeatureSet& a, const FeatureSet& b) {
  const double d = static_cast<double>(a.cols());
  const Eigen::ArrayXXd kaa = ((a * a.transpose()).array() / d + 1.0).cube();
  const Eigen::ArrayXXd kbb = ((b * b.transpose()).array() / d + 1.0).cube();
  const Eigen::ArrayXXd kab = ((a * b.transpose()).array() / d + 1.0).cube();
  const double m = static_cast<double>(a.rows()), n = static_cast<double>(b.rows());
  const double saa = kaa.sum() - kaa.matrix().trace();
  const double sbb = kbb.sum() - kbb.matrix().trace();
  return saa / (m * (m - 1)) + sbb / (n * (n - 1)) - 2.0 * kab.sum() / (m * n);
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks(Eigen::Index n, Eigen::Index size) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  for (Eigen::Index start = 0; start < n; start += size) {
    const Eigen::Index len = std::min(size, n - start);
    if (len >= 2) out.emplace_back(start, len);
  }
  return out;
}

}  // namespace

double kid(const FeatureSet& a, const FeatureSet& b, int block_size) {
  if (a.rows() < 2 || b.rows() < 2) throw DomainError("kid: each feature set needs at least 2 samples");
  if (a.cols() != b.cols()) throw DomainError("kid: dimension mismatch");
  if (block_size < 2) throw DomainError("kid: block_size must be >= 2");
  const auto ba = blocks(a.rows(), block_size);
  const auto bb = blocks(b.rows(), block_size);
  const std::size_t count = std::min(ba.size(), bb.size());
  double total = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    total += mmd2_unbiased(a.middleRows(ba[k].first, ba[k].second), b.middleRows(bb[k].first, bb[k].second));
  }
  return total / static_cast<double>(count);
}

// ----------------------------------------------------------------- files

std::vector<fs::path> list_images(const fs::path& dir) {
  const fs::path src = fs::is_directory(dir / "images") ? dir / "images" : dir;
  if (!fs::is_directory(src)) throw IoError("image directory " + dir.string() + " does not exist");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(src)) {
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<RgbImage> load_images(const fs::path& dir) {
  const auto paths = list_images(dir);
  if (paths.empty()) throw ValidationError({dir.string() + ": no PNG images found"});
  std::vector<RgbImage> images(paths.size());
  std::vector<std::string> failures(paths.size());
  parallel_for(paths.size(), [&](std::size_t i) {
    try {
      images[i] = load_png(paths[i]);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  std::vector<std::string> problems;
  for (const auto& f : failures) {
    if (!f.empty()) problems.push_back(f);
  }
  if (!problems.empty()) throw ValidationError(problems);
  return images;
}

double fid_from_features(const FeatureSet& real, const FeatureSet& gen) {
  FeatureStats a = FeatureStats::from_features(real);
  FeatureStats b = FeatureStats::from_features(gen);
  const auto reg = kCovarianceRegularization * Eigen::MatrixXd::Identity(a.cov.rows(), a.cov.cols());
  a.cov += reg;
  b.cov += reg;
  return frechet_distance(a, b);
}

double fid_folders(const fs::path& real_dir, const fs::path& gen_dir, const FeatureExtractor& extractor) {
  return fid_from_features(extract_features(extractor, load_images(real_dir)),
                           extract_features(extractor, load_images(gen_dir)));
}

double kid_folders(const fs::path& real_dir, const fs::path& gen_dir, const FeatureExtractor& extractor,
                   int block_size) {
  return kid(extract_features(extractor, load_images(real_dir)), extract_features(extractor, load_images(gen_dir)),
             block_size);
}

// ------------------------------------------------------------------- SID

RgbImage isolate_region(const RgbImage& image, const ClassMask& mask, int class_id, int crop_size) {
  int x0 = mask.width, y0 = mask.height, x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y) != class_id) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) throw DomainError("isolate_region: class " + std::to_string(class_id) + " absent from mask");
  RgbImage crop(x1 - x0 + 1, y1 - y0 + 1, -1.0f);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (mask.at(x, y) != class_id) continue;
      for (int ch = 0; ch < 3; ++ch) crop.at(x - x0, y - y0, ch) = image.at(x, y, ch);
    }
  }
  return resize_bilinear(crop, crop_size, crop_size);
}

namespace {

// Features of every usable class region, keyed by class id, in sample order.
std::map<int, std::vector<Eigen::VectorXd>> region_features(const std::vector<PairedSample>& pairs,
                                                            const FeatureExtractor& extractor,
                                                            const SidOptions& options) {
  std::vector<std::map<int, Eigen::VectorXd>> per_image(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const auto& p = pairs[i];
    if (p.image.width != p.mask.width || p.image.height != p.mask.height) {
      throw ValidationError({p.id + ": image and mask sizes differ"});
    }
    std::map<int, int> counts;
    for (int l : p.mask.labels) {
      if (l > 0) ++counts[l];
    }
    for (const auto& [c, n] : counts) {
      if (n >= options.min_pixels) {
        per_image[i][c] = extractor.extract(isolate_region(p.image, p.mask, c, options.crop_size));
      }
    }
  });
  std::map<int, std::vector<Eigen::VectorXd>> out;
  for (const auto& m : per_image) {
    for (const auto& [c, f] : m) out[c].push_back(f);
  }
  return out;
}

FeatureSet stack(const std::vector<Eigen::VectorXd>& rows, int dim) {
  FeatureSet f(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) f.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return f;
}

std::set<int> classes_present(const std::vector<PairedSample>& pairs) {
  std::set<int> out;
  for (const auto& p : pairs) {
    for (int l : p.mask.labels) {
      if (l > 0) out.insert(l);
    }
  }
  return out;
}

}  // namespace

SidReport sid(const std::vector<PairedSample>& real, const std::vector<PairedSample>& gen,
              const FeatureExtractor& extractor, const SidOptions& options) {
  if (options.crop_size < 1 || options.min_pixels < 1) throw DomainError("sid: crop_size and min_pixels must be positive");
  const auto real_features = region_features(real, extractor, options);
  const auto gen_features = region_features(gen, extractor, options);
  std::set<int> classes = classes_present(real);
  classes.merge(classes_present(gen));

  SidReport report;
  double sum_fid = 0.0, sum_kid = 0.0;
  for (int c : classes) {
    SidClassResult r;
    const auto rit = real_features.find(c);
    const auto git = gen_features.find(c);
    r.n_real = rit == real_features.end() ? 0 : static_cast<int>(rit->second.size());
    r.n_gen = git == gen_features.end() ? 0 : static_cast<int>(git->second.size());
    if (r.n_real < 2 || r.n_gen < 2) {
      r.skipped = true;
      r.reason = "fewer than 2 regions with >= " + std::to_string(options.min_pixels) + " pixels (real " +
                 std::to_string(r.n_real) + ", generated " + std::to_string(r.n_gen) + ")";
    } else {
      const FeatureSet fr = stack(rit->second, extractor.output_dim());
      const FeatureSet fg = stack(git->second, extractor.output_dim());
      r.sfid = fid_from_features(fr, fg);
      r.skid = kid(fr, fg, options.kid_block_size);
      sum_fid += r.sfid;
      sum_kid += r.skid;
      ++report.evaluated_classes;
    }
    report.per_class[c] = r;
  }
  if (report.evaluated_classes == 0) throw MetricError("sid: no class has at least 2 usable regions on both sides");
  report.mean_sfid = sum_fid / report.evaluated_classes;
  report.mean_skid = sum_kid / report.evaluated_classes;
  return report;
}

std::vector<PairedSample> load_pairs(const fs::path& dir) {
  const auto paths = list_images(dir);
  if (paths.empty()) throw ValidationError({dir.string() + ": no PNG images found"});
  std::vector<PairedSample> pairs(paths.size());
  std::vector<std::string> failures(paths.size());
  parallel_for(paths.size(), [&](std::size_t i) {
    try {
      pairs[i].id = paths[i].stem().string();
      pairs[i].image = load_png(paths[i]);
      pairs[i].mask = load_mask_png(dir / "masks" / paths[i].filename());
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  std::vector<std::string> problems;
  for (const auto& f : failures) {
    if (!f.empty()) problems.push_back(f);
  }
  if (!problems.empty()) throw ValidationError(problems);
  return pairs;
}

SidReport sid(const fs::path& real_pairs_dir, const fs::path& gen_pairs_dir, const FeatureExtractor& extractor,
              const SidOptions& options) {
  return sid(load_pairs(real_pairs_dir), load_pairs(gen_pairs_dir), extractor, options);
}

nlohmann::json to_json(const SidReport& report) {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [c, r] : report.per_class) {
    nlohmann::json e = {{"n_real", r.n_real}, {"n_gen", r.n_gen}, {"skipped", r.skipped}};
    if (r.skipped) {
      e["reason"] = r.reason;
    } else {
      e["sfid"] = r.sfid;
      e["skid"] = r.skid;
    }
    per[std::to_string(c)] = e;
  }
  return {{"per_class", per},
          {"mean_sfid", report.mean_sfid},
          {"mean_skid", report.mean_skid},
          {"evaluated_classes", report.evaluated_classes}};
}

// --------------------------------------------------------- feature files

static_assert(std::endian::native == std::endian::little, "feature file I/O assumes a little-endian host");

void export_features(const fs::path& path, const FeatureSet& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const std::uint32_t header[4] = {0, kFeatureFileVersion, static_cast<std::uint32_t>(features.rows()),
                                   static_cast<std::uint32_t>(features.cols())};
  out.write("SGFT", 4);
  out.write(reinterpret_cast<const char*>(header + 1), 12);
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      const float v = static_cast<float>(features(r, c));
      out.write(reinterpret_cast<const char*>(&v), 4);
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

FeatureSet import_features(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 4) throw FormatError(path.string() + ": file too short for magic", bytes.size());
  if (std::memcmp(bytes.data(), "SGFT", 4) != 0) throw FormatError(path.string() + ": bad magic", 0);
  if (bytes.size() < 16) throw FormatError(path.string() + ": truncated header", bytes.size());
  std::uint32_t version, count, dim;
  std::memcpy(&version, bytes.data() + 4, 4);
  std::memcpy(&count, bytes.data() + 8, 4);
  std::memcpy(&dim, bytes.data() + 12, 4);
  if (version != kFeatureFileVersion) throw FormatError(path.string() + ": unsupported version", 4);
  const std::size_t payload = static_cast<std::size_t>(count) * dim * 4;
  if (bytes.size() - 16 != payload) {
    throw FormatError(path.string() + ": header declares " + std::to_string(count) + "x" + std::to_string(dim) +
                          " floats but payload has " + std::to_string(bytes.size() - 16) + " bytes",
                      std::min(bytes.size(), 16 + payload));
  }
  FeatureSet f(count, dim);
  const char* p = bytes.data() + 16;
  for (std::uint32_t r = 0; r < count; ++r) {
    for (std::uint32_t c = 0; c < dim; ++c) {
      float v;
      std::memcpy(&v, p, 4);
      p += 4;
      f(r, c) = v;
    }
  }
  return f;
}

}  // namespace simgen
