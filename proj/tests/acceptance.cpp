// Acceptance suite: one PASS/FAIL line per criterion.
//
//   simgen_acceptance [--work DIR] [N ...]
//
// Without criterion numbers every criterion runs. Exit status is non-zero
// if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "simgen/cfl_codec.hpp"
#include "simgen/checkpoint.hpp"
#include "simgen/cli.hpp"
#include "simgen/data_io.hpp"
#include "simgen/denoiser.hpp"
#include "simgen/diffusion_schedule.hpp"
#include "simgen/generation.hpp"
#include "simgen/metrics.hpp"
#include "simgen/training.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace simgen;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

fs::path g_work = fs::temp_directory_path() / "simgen-acceptance";

fs::path work_dir(const std::string& name) {
  const fs::path p = g_work / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<const PairedSample*> pointers(const std::vector<PairedSample>& v) {
  std::vector<const PairedSample*> out;
  for (const auto& s : v) out.push_back(&s);
  return out;
}

// ----------------------------------------------------------------- 1

void criterion_cfl_geometry(Outcome& o) {
  const auto t0 = Clock::now();
  Rng rng(2024);
  int roundtrips = 0, perturbed = 0;
  double worst_norm = 0.0;
  for (int nc = 1; nc <= 64; ++nc) {
    const ClassPalette p = build_palette(nc);
    std::set<Vec3> distinct(p.points().begin(), p.points().end());
    o.check(distinct.size() == static_cast<std::size_t>(nc), "distinct points nc=" + std::to_string(nc));
    for (const auto& v : p.points()) worst_norm = std::max(worst_norm, std::fabs(std::hypot(v[0], v[1], v[2]) - 1.0));
    for (int k = 0; k < 100; ++k) {
      const ClassMask m = simgen::testing::random_mask(16, 16, nc, rng);
      if (decode_mask(encode_mask(m, p), p) != m) o.check(false, "roundtrip nc=" + std::to_string(nc));
      ++roundtrips;
    }
    if (nc < 2) continue;
    const double half = 0.5 * min_pairwise_angle(p);
    for (int i = 0; i < nc; ++i) {
      for (int k = 0; k < 50; ++k) {
        Vec3 r{rng.normal(), rng.normal(), rng.normal()};
        const Vec3& c = p[i];
        const double d = r[0] * c[0] + r[1] * c[1] + r[2] * c[2];
        for (int j = 0; j < 3; ++j) r[j] -= d * c[j];
        const double rn = std::hypot(r[0], r[1], r[2]);
        const double angle = 0.999 * half * rng.uniform();
        const double scale = rng.uniform(0.05, 3.0);
        Vec3 v;
        for (int j = 0; j < 3; ++j) v[j] = scale * (std::cos(angle) * c[j] + std::sin(angle) * r[j] / rn);
        if (decode_pixel(v, p) != i) o.check(false, "robust decode nc=" + std::to_string(nc));
        ++perturbed;
      }
    }
  }
  o.check(worst_norm <= 1e-9, "unit norm");
  const double secs = seconds_since(t0);
  o.check(secs < 10.0, "runtime < 10 s");
  o.detail << "max |norm-1| " << worst_norm << ", " << roundtrips << " roundtrips, " << perturbed
           << " perturbed decodes, " << secs << " s";
}

// ----------------------------------------------------------------- 2

void criterion_point_values(Outcome& o) {
  const struct {
    int nc, i;
    Vec3 v;
  } cases[] = {{1, 0, {1.0, 0.0, 0.0}},
               {2, 0, {0.8660254038, 0.0, 0.5}},
               {2, 1, {-0.6385801804, -0.5849917548, -0.5}}};
  double worst = 0.0;
  for (const auto& c : cases) {
    const Vec3 p = cfl_point(c.nc, c.i);
    for (int k = 0; k < 3; ++k) worst = std::max(worst, std::fabs(p[k] - c.v[k]));
  }
  o.check(worst <= 1e-5, "within 1e-5");
  o.detail << "max abs deviation " << worst;
}

// ----------------------------------------------------------------- 3

double ks_normal(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = 0.5 * std::erfc(-x[i] / std::numbers::sqrt2);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

void criterion_schedule(Outcome& o) {
  const auto t0 = Clock::now();
  const NoiseSchedule s = NoiseSchedule::standard(250);
  bool monotone = true;
  for (int t = 2; t <= 250; ++t) monotone = monotone && s.alpha_bar(t) < s.alpha_bar(t - 1);
  o.check(monotone, "alpha_bar strictly decreasing");
  o.check(s.alpha_bar(250) < 0.01, "alpha_bar_250 < 0.01");

  const auto data = toy_samples(10, 32, 4, 7);
  const FieldBatch x0 = assemble_x0(pointers(data), build_palette(4));
  Rng rng(99);
  const FieldBatch eps = simgen::testing::normal_field(x0.n, x0.c, x0.h, x0.w, rng);
  const FieldBatch xT = q_sample(x0, 250, eps, s);
  const std::size_t n = static_cast<std::size_t>(x0.n) * x0.h * x0.w;
  const double critical = 1.628 / std::sqrt(static_cast<double>(n));
  double worst_ks = 0.0;
  for (int c = 0; c < 6; ++c) {
    std::vector<double> v;
    for (int b = 0; b < x0.n; ++b) {
      for (int y = 0; y < x0.h; ++y) {
        for (int x = 0; x < x0.w; ++x) v.push_back(xT.at(b, c, y, x));
      }
    }
    worst_ks = std::max(worst_ks, ks_normal(v));
  }
  o.check(worst_ks < critical, "KS at 0.01");

  // Reverse step with the true noise lands on the posterior mean.
  double worst_identity = 0.0;
  for (int t : {1, 2, 125, 250}) {
    const FieldBatch xt = q_sample(x0, t, eps, s);
    const FieldBatch prev = p_sample_step(xt, t, eps, s, FieldBatch(x0.n, x0.c, x0.h, x0.w));
    const double ab = s.alpha_bar(t), abp = t > 1 ? s.alpha_bar(t - 1) : 1.0;
    for (std::size_t k = 0; k < xt.size(); ++k) {
      const double mu = std::sqrt(abp) * s.beta(t) / (1 - ab) * x0.data[k] +
                        std::sqrt(s.alpha(t)) * (1 - abp) / (1 - ab) * xt.data[k];
      worst_identity = std::max(worst_identity, std::fabs(prev.data[k] - mu));
    }
  }
  o.check(worst_identity <= 1e-6, "one-step identity within 1e-6");
  const double secs = seconds_since(t0);
  o.check(secs < 30.0, "runtime < 30 s");
  o.detail << "alpha_bar_250 " << s.alpha_bar(250) << ", KS max " << worst_ks << " (critical " << critical << ", n "
           << n << "), identity error " << worst_identity << ", " << secs << " s";
}

// ----------------------------------------------------------------- 4

double weighted_sum(const FieldBatch& out, const FieldBatch& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += static_cast<double>(out.data[i]) * w.data[i];
  return s;
}

void criterion_denoiser(Outcome& o) {
  const auto t0 = Clock::now();
  Rng rng(4);
  {
    const DenoiserNet net(DenoiserConfig::desk(), 1);
    const FieldBatch x = simgen::testing::normal_field(2, 6, 32, 32, rng);
    const std::vector<int> t{1, 250};
    const FieldBatch y = net.predict_noise(x, t);
    o.check(y.same_shape(x), "shape preserved");
    o.check(std::all_of(y.data.begin(), y.data.end(), [](float v) { return v == 0.0f; }), "zero-init output");
  }

  DenoiserConfig fd;
  fd.base_features = 4;
  fd.groupnorm_groups = 4;
  fd.zero_init_output = false;
  DenoiserNet net(fd, 9);
  const FieldBatch x = simgen::testing::normal_field(2, 6, 8, 8, rng);
  const FieldBatch w = simgen::testing::normal_field(2, 6, 8, 8, rng);
  const std::vector<int> t{5, 180};
  net.params().zero_grad();
  auto pass = net.make_pass();
  net.forward(x, t, *pass);
  net.backward(w, *pass);
  double diff2 = 0, ana2 = 0, num2 = 0;
  int probes = 0;
  for (auto& p : net.params().params()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.numel(); ++i) {
      if (std::fabs(p.grad[i]) > std::fabs(p.grad[best])) best = i;
    }
    for (std::size_t i : {best, static_cast<std::size_t>(rng.below(p.numel()))}) {
      const float orig = p.value[i];
      p.value[i] = orig + 1e-3f;
      const double up = weighted_sum(net.predict_noise(x, t), w);
      p.value[i] = orig - 1e-3f;
      const double down = weighted_sum(net.predict_noise(x, t), w);
      p.value[i] = orig;
      const double numeric = (up - down) / (static_cast<double>(orig + 1e-3f) - static_cast<double>(orig - 1e-3f));
      diff2 += (numeric - p.grad[i]) * (numeric - p.grad[i]);
      ana2 += static_cast<double>(p.grad[i]) * p.grad[i];
      num2 += numeric * numeric;
      ++probes;
    }
  }
  const double rel = std::sqrt(diff2) / std::max(std::sqrt(ana2), std::sqrt(num2));
  o.check(rel <= 1e-2, "finite differences");

  // Gradient reaches every tensor once the zero head has taken one step.
  TrainConfig tc;
  tc.learning_rate = 1e-3;
  TrainState st = make_train_state(DenoiserConfig::tiny(), tc);
  const NoiseSchedule s = NoiseSchedule::standard(250);
  const FieldBatch x0 = simgen::testing::normal_field(2, 6, 32, 32, rng);
  const FieldBatch eps = simgen::testing::normal_field(2, 6, 32, 32, rng);
  const std::vector<int> tt{20, 200};
  train_step(st, x0, tt, eps, s);
  st.net.params().zero_grad();
  auto pass2 = st.net.make_pass();
  const FieldBatch pred = st.net.forward(q_sample(x0, tt, eps, s), tt, *pass2);
  FieldBatch grad(pred.n, pred.c, pred.h, pred.w);
  for (std::size_t i = 0; i < pred.size(); ++i) grad.data[i] = 2.0f * (pred.data[i] - eps.data[i]) / pred.size();
  st.net.backward(grad, *pass2);
  int dead = 0;
  for (const auto& p : st.net.params().params()) {
    if (std::none_of(p.grad.begin(), p.grad.end(), [](float g) { return g != 0.0f; })) ++dead;
  }
  o.check(dead == 0, "every parameter tensor has gradient");
  const double secs = seconds_since(t0);
  o.check(secs < 120.0, "runtime < 2 min");
  o.detail << "FD relative error " << rel << " over " << probes << " probes, tensors without gradient " << dead << "/"
           << st.net.params().params().size() << ", " << secs << " s";
}

// ----------------------------------------------------------------- 5

void criterion_training_sanity(Outcome& o) {
  const auto t0 = Clock::now();
  const auto data = toy_samples(8, 32, 4, 7);
  const auto batch = pointers(data);
  const NoiseSchedule s = NoiseSchedule::standard(250);
  const ClassPalette palette = build_palette(4);
  TrainConfig tc;
  tc.learning_rate = 1e-3;
  tc.seed = 1;

  TrainState st = make_train_state(DenoiserConfig::tiny(), tc);
  Rng rng0(derive_seed(1, 77, 0));
  const double initial = train_step(st, batch, palette, s, rng0);
  o.check(std::fabs(initial - 1.0) <= 0.05, "initial loss within 5% of 1");

  // One fixed batch: fixed images, timesteps and noise, 500 Adam steps.
  TrainState fit = make_train_state(DenoiserConfig::tiny(), tc);
  const FieldBatch x0 = assemble_x0(batch, palette);
  Rng rng(5);
  std::vector<int> t(batch.size());
  for (auto& ti : t) ti = 1 + static_cast<int>(rng.below(250));
  const FieldBatch eps = simgen::testing::normal_field(x0.n, x0.c, x0.h, x0.w, rng);
  double last = 0.0;
  for (int k = 0; k < 500; ++k) last = train_step(fit, x0, t, eps, s);
  o.check(last < 0.05, "overfit loss < 0.05");
  const double secs = seconds_since(t0);
  o.check(secs < 300.0, "runtime < 5 min");
  o.detail << "initial loss " << initial << " (" << x0.size() << " elements), loss after 500 steps " << last << ", "
           << secs << " s";
}

// ------------------------------------------------------------ shared toy runs

struct ToyRun {
  std::vector<PairedSample> real;
  GenerationBatch trained;
  GenerationBatch untrained;
  std::vector<std::pair<int, double>> losses;
};

std::vector<PairedSample> as_pairs(const GenerationBatch& g) {
  std::vector<PairedSample> out;
  for (std::size_t i = 0; i < g.size(); ++i) out.push_back({g.images[i], g.decoded_masks[i], sample_id(static_cast<int>(i))});
  return out;
}

const SidOptions kToySid{32, 16, 100};

double mean_sfid(const std::vector<PairedSample>& real, const GenerationBatch& gen, const FeatureExtractor& ex) {
  return sid(real, as_pairs(gen), ex, kToySid).mean_sfid;
}

ToyRun train_and_sample(const std::vector<PairedSample>& real, int num_classes, MaskEncoding enc, std::uint64_t seed,
                        int steps, int count, bool with_untrained) {
  TrainConfig tc;
  tc.learning_rate = 1e-3;
  tc.batch_size = 8;
  tc.total_steps = steps;
  tc.seed = seed;
  ModelMeta meta;
  meta.num_classes = num_classes;
  meta.encoding = enc;
  TrainState st = make_train_state(DenoiserConfig::desk(), tc);
  ToyRun run;
  run.real = real;
  if (with_untrained) run.untrained = sample_pairs(st.net, meta.schedule(), meta.palette(), count, 32, seed + 1000);
  TrainResult r = train(std::move(st), tc, real, meta);
  run.losses = r.losses;
  run.trained = sample_pairs(r.state.net, meta.schedule(), meta.palette(), count, 32, seed + 1000);
  return run;
}

// ----------------------------------------------------------------- 6

void criterion_toy_reproduction(Outcome& o) {
  const auto t0 = Clock::now();
  const auto real = toy_samples(256, 32, 4, 7);
  const ToyRun run = train_and_sample(real, 4, MaskEncoding::cfl, 1, 5000, 64, true);
  const auto ex = default_extractor();

  int multi = 0;
  for (const auto& m : run.trained.decoded_masks) {
    std::set<int> classes(m.labels.begin(), m.labels.end());
    multi += classes.size() >= 2;
  }
  const double frac = multi / 64.0;
  const double trained = mean_sfid(real, run.trained, *ex);
  const double untrained = mean_sfid(real, run.untrained, *ex);
  o.check(frac >= 0.8, ">= 80% masks with >= 2 classes");
  o.check(trained < untrained, "trained sFID < untrained sFID");

  double tail = 0.0;
  for (std::size_t i = run.losses.size() - 200; i < run.losses.size(); ++i) tail += run.losses[i].second / 200;
  const double secs = seconds_since(t0);
  o.check(secs <= 3600.0, "runtime <= 60 min");
  o.detail << "multi-class masks " << multi << "/64, mean sFID trained " << trained << " vs untrained " << untrained
           << ", final 200-step mean loss " << tail << ", desk config, " << secs << " s";

  const fs::path dir = work_dir("toy-reproduction");
  export_batch(run.trained, build_palette(4), dir / "trained");
  export_batch(run.untrained, build_palette(4), dir / "untrained");
}

// ----------------------------------------------------------------- 7

constexpr int kAblationClasses = 8;
constexpr int kAblationSteps = 2000;

void criterion_cfl_ablation(Outcome& o) {
  const auto t0 = Clock::now();
  const auto real = toy_samples(256, 32, kAblationClasses, 7);
  const auto ex = default_extractor();
  double cfl = 0.0, rgb = 0.0;
  std::ostringstream per_seed;
  for (std::uint64_t seed : {1, 2, 3}) {
    const double a = mean_sfid(real, train_and_sample(real, kAblationClasses, MaskEncoding::cfl, seed, kAblationSteps, 64, false).trained, *ex);
    const double b = mean_sfid(real, train_and_sample(real, kAblationClasses, MaskEncoding::random_rgb, seed, kAblationSteps, 64, false).trained, *ex);
    per_seed << " seed " << seed << ": " << a << "/" << b << ";";
    cfl += a / 3;
    rgb += b / 3;
  }
  o.check(cfl <= rgb, "CFL sFID <= random-RGB sFID");
  o.detail << "mean sFID CFL " << cfl << " vs random RGB " << rgb << " (" << kAblationClasses << " classes, "
           << kAblationSteps << " steps;" << per_seed.str() << ") " << seconds_since(t0) << " s";
}

// ----------------------------------------------------------------- 8

FeatureStats stats(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  FeatureStats s;
  s.n = 2;
  s.mean = mean;
  s.cov = cov;
  return s;
}

void criterion_metric_oracles(Outcome& o) {
  const auto t0 = Clock::now();
  double worst1d = 0.0;
  const double cases[][4] = {{0, 1, 1, 1}, {0, 1, 0, 4}, {2, 9, -1, 0.25}, {-3, 0.5, 4, 7}};
  for (const auto& c : cases) {
    const double expected = (c[0] - c[2]) * (c[0] - c[2]) + std::pow(std::sqrt(c[1]) - std::sqrt(c[3]), 2);
    const double got = frechet_distance(stats(Eigen::VectorXd::Constant(1, c[0]), Eigen::MatrixXd::Constant(1, 1, c[1])),
                                        stats(Eigen::VectorXd::Constant(1, c[2]), Eigen::MatrixXd::Constant(1, 1, c[3])));
    worst1d = std::max(worst1d, std::fabs(got - expected));
  }
  o.check(worst1d <= 1e-9, "1-D closed forms");

  // Brute force: eigendecomposition of the non-symmetric product.
  Rng rng(8);
  double worst4d = 0.0;
  for (int k = 0; k < 50; ++k) {
    Eigen::MatrixXd a(4, 4), b(4, 4);
    Eigen::VectorXd ma(4), mb(4);
    for (int i = 0; i < 4; ++i) {
      ma[i] = rng.normal();
      mb[i] = rng.normal();
      for (int j = 0; j < 4; ++j) {
        a(i, j) = rng.normal();
        b(i, j) = rng.normal();
      }
    }
    const Eigen::MatrixXd ca = a * a.transpose(), cb = b * b.transpose();
    Eigen::EigenSolver<Eigen::MatrixXd> es(ca * cb);
    double tr = 0.0;
    for (int i = 0; i < 4; ++i) tr += std::sqrt(std::max(0.0, es.eigenvalues()[i].real()));
    const double ref = (ma - mb).squaredNorm() + ca.trace() + cb.trace() - 2.0 * tr;
    worst4d = std::max(worst4d, std::fabs(frechet_distance(stats(ma, ca), stats(mb, cb)) - ref));
  }
  o.check(worst4d <= 1e-6, "4-D FID vs eigendecomposition");

  double worst_kid = 0.0;
  for (auto [m, n] : {std::pair{64, 64}, {40, 17}, {3, 64}}) {
    FeatureSet x(m, 6), y(n, 6);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal() + 0.3;
    double xx = 0, yy = 0, xy = 0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (i != j) xx += polynomial_kernel(x.row(i).transpose(), x.row(j).transpose());
      }
      for (int j = 0; j < n; ++j) xy += polynomial_kernel(x.row(i).transpose(), y.row(j).transpose());
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) yy += polynomial_kernel(y.row(i).transpose(), y.row(j).transpose());
      }
    }
    const double ref = xx / (m * (m - 1.0)) + yy / (n * (n - 1.0)) - 2.0 * xy / (double(m) * n);
    worst_kid = std::max(worst_kid, std::fabs(kid(x, y, 100) - ref));
  }
  o.check(worst_kid <= 1e-10, "KID vs exhaustive MMD");

  const fs::path dir = work_dir("fid-self");
  make_toy_dataset(dir, 128, 32, 4, 3);
  const auto ex = default_extractor();
  const double self = fid_folders(dir, dir, *ex);
  o.check(std::fabs(self) <= 1e-6, "FID(X, X) = 0");
  o.detail << "1-D error " << worst1d << ", 4-D error " << worst4d << ", KID error " << worst_kid << ", FID(X,X) "
           << self << ", " << seconds_since(t0) << " s";
}

// ----------------------------------------------------------------- 9

void criterion_sid_perturbations(Outcome& o) {
  const auto real = toy_samples(256, 32, 4, 7);
  const auto other = toy_samples(256, 32, 4, 8);
  auto swapped = other, dilated = other;
  for (auto& p : swapped) p.mask = simgen::testing::swap_classes(p.mask, 1, 2);
  for (auto& p : dilated) p.mask = simgen::testing::dilate_foreground(p.mask, 3);
  const auto ex = default_extractor();
  const double base = sid(real, other, *ex, kToySid).mean_sfid;
  const double swap = sid(real, swapped, *ex, kToySid).mean_sfid;
  const double dil = sid(real, dilated, *ex, kToySid).mean_sfid;
  o.check(swap > base, "class swap worsens sFID");
  o.check(dil > base, "3-px dilation worsens sFID");
  o.detail << "mean sFID unperturbed " << base << ", class swap " << swap << ", dilation " << dil;
}

// ----------------------------------------------------------------- 10

void criterion_boxes(Outcome& o) {
  Rng rng(10);
  int mismatches = 0, loose = 0;
  std::size_t boxes = 0;
  for (int k = 0; k < 1000; ++k) {
    const int w = 1 + static_cast<int>(rng.below(64)), h = 1 + static_cast<int>(rng.below(64));
    const int nc = 2 + static_cast<int>(rng.below(8));
    const ClassMask m = k % 2 ? simgen::testing::random_mask(w, h, nc, rng) : simgen::testing::blocky_mask(w, h, nc, rng);
    const int min_area = static_cast<int>(rng.below(5));
    const auto got = masks_to_boxes(m, min_area);
    mismatches += got != simgen::testing::flood_fill_boxes(m, min_area);
    for (const auto& b : got) {
      ++boxes;
      bool left = false, right = false, top = false, bottom = false;
      for (int y = b.y_min; y <= b.y_max; ++y) {
        left = left || m.at(b.x_min, y) == b.class_id;
        right = right || m.at(b.x_max, y) == b.class_id;
      }
      for (int x = b.x_min; x <= b.x_max; ++x) {
        top = top || m.at(x, b.y_min) == b.class_id;
        bottom = bottom || m.at(x, b.y_max) == b.class_id;
      }
      loose += !(left && right && top && bottom && b.x_min <= b.x_max && b.y_min <= b.y_max);
    }
  }
  o.check(mismatches == 0, "flood-fill agreement");
  o.check(loose == 0, "tightness");
  o.detail << "1000 masks, " << boxes << " boxes, " << mismatches << " mismatches, " << loose << " loose boxes";
}

// ----------------------------------------------------------------- 11

void criterion_reproducibility(Outcome& o) {
  // Both runs use the same paths (config.json records them); the first run is moved aside.
  const fs::path root = work_dir("reproducibility");
  const fs::path d = root / "pipeline";
  for (const char* name : {"a", "b"}) {
    const std::vector<std::vector<std::string>> steps = {
        {"make-toy", "--out", (d / "toy").string(), "--count", "64", "--size", "32", "--classes", "4", "--seed", "5"},
        {"train", "--data", (d / "toy").string(), "--classes", "4", "--steps", "200", "--batch", "8", "--lr", "0.001",
         "--base", "8", "--seed", "6", "--out", (d / "run").string(), "--log-every", "100"},
        {"sample", "--ckpt", (d / "run" / "ckpt_200.bin").string(), "--count", "8", "--size", "32", "--seed", "7",
         "--out", (d / "gen").string(), "--boxes"},
        {"eval", "sid", "--real", (d / "toy").string(), "--gen", (d / "gen").string(), "--crop", "32", "--min-pixels",
         "16", "--report", (d / "sid.json").string()},
        {"eval", "fid", "--real", (d / "toy").string(), "--gen", (d / "gen").string(), "--report",
         (d / "fid.json").string()},
        {"eval", "kid", "--real", (d / "toy").string(), "--gen", (d / "gen").string(), "--block", "8", "--report",
         (d / "kid.json").string()},
    };
    for (const auto& s : steps) {
      const int code = cli::dispatch(s);
      o.check(code == 0, s[0] + " exit code");
      if (code != 0) return;
    }
    fs::rename(d, root / name);
  }
  int identical = 0, compared = 0;
  for (const char* f : {"run/loss.csv", "run/config.json", "run/ckpt_200.bin", "gen/boxes.json", "sid.json",
                        "fid.json", "kid.json"}) {
    const bool eq = simgen::testing::read_file(root / "a" / f) == simgen::testing::read_file(root / "b" / f);
    o.check(eq, std::string(f) + " identical");
    identical += eq;
    ++compared;
  }
  o.detail << identical << "/" << compared
           << " artifacts byte-identical (loss.csv, config.json, checkpoint, boxes.json, SID/FID/KID reports)";
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "CFL geometry suite", criterion_cfl_geometry},
      {2, "Fibonacci point values", criterion_point_values},
      {3, "schedule suite", criterion_schedule},
      {4, "denoiser suite", criterion_denoiser},
      {5, "training sanity", criterion_training_sanity},
      {6, "end-to-end toy reproduction", criterion_toy_reproduction},
      {7, "CFL ablation trend", criterion_cfl_ablation},
      {8, "metric oracles", criterion_metric_oracles},
      {9, "SID perturbation responses", criterion_sid_perturbations},
      {10, "bounding boxes", criterion_boxes},
      {11, "reproducibility", criterion_reproducibility},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work" && i + 1 < argc) {
      g_work = argv[++i];
    } else {
      selected.insert(std::stoi(a));
    }
  }
  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Outcome o;
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    std::printf("[%s] criterion %d, %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
