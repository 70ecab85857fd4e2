#include "simgen/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "simgen/checkpoint.hpp"
#include "simgen/data_io.hpp"
#include "simgen/errors.hpp"
#include "simgen/generation.hpp"
#include "simgen/metrics.hpp"
#include "simgen/training.hpp"

namespace fs = std::filesystem;

namespace simgen::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot read config file " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const std::string t = trim(item);
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (t.empty() || used != t.size()) throw CLI::ValidationError("expected a comma-separated list of numbers, got '" + s + "'");
    out.push_back(v);
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Seed handling shared by every subcommand.
struct SeedOption {
  std::uint64_t value = 0;
  CLI::Option* option = nullptr;

  void add(CLI::App* app, const std::string& help) { option = app->add_option("--seed", value, help); }

  // A missing seed is drawn from the system and logged so the run can be repeated.
  std::uint64_t resolve(const char* what) {
    if (option->count() == 0) {
      std::random_device rd;
      value = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      std::cerr << what << ": no --seed given, using seed " << value << '\n';
    }
    return value;
  }
};

void write_json(const fs::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// ------------------------------------------------------------- palette

struct PaletteArgs {
  int classes = 0;
  std::string out;
  std::string encoding = "cfl";
  SeedOption seed;
};

void run_palette(PaletteArgs& a) {
  const ClassPalette palette = make_palette(a.classes, parse_mask_encoding(a.encoding));
  save_palette_json(palette, a.out);
  std::cerr << "palette: " << a.classes << " classes, min pairwise angle " << min_pairwise_angle(palette)
            << " rad -> " << a.out << '\n';
}

// ------------------------------------------------------------ schedule

struct ScheduleArgs {
  int steps = 250;
  std::string out;
  double beta_start = 0.0;
  double beta_end = 0.0;
  SeedOption seed;
};

void run_schedule(ScheduleArgs& a) {
  const NoiseSchedule s = (a.beta_start > 0.0 || a.beta_end > 0.0)
                              ? NoiseSchedule::linear(a.steps, a.beta_start, a.beta_end)
                              : NoiseSchedule::standard(a.steps);
  s.write_csv(a.out);
  std::cerr << "schedule: T=" << a.steps << ", alpha_bar_T=" << s.alpha_bar(a.steps) << " -> " << a.out << '\n';
}

// ------------------------------------------------------------ make-toy

struct ToyArgs {
  std::string out;
  int count = 256;
  int size = 32;
  int classes = 4;
  std::string split = "1,0,0";
  SeedOption seed;
};

void run_make_toy(ToyArgs& a) {
  const std::uint64_t seed = a.seed.resolve("make-toy");
  const auto f = parse_doubles(a.split);
  if (f.size() != 3) throw DomainError("--split needs three fractions (train,val,test)");
  DatasetManifest m = make_toy_dataset(a.out, a.count, a.size, a.classes, seed);
  m = split(m, {f[0], f[1], f[2]}, seed);
  save_manifest(m);
  std::cerr << "make-toy: " << m.ids.size() << " pairs in " << a.out << " (train " << m.splits["train"].size()
            << ", val " << m.splits["val"].size() << ", test " << m.splits["test"].size() << ")\n";
  std::cerr << "class pixel counts:";
  for (std::size_t c = 0; c < m.class_pixel_counts.size(); ++c) std::cerr << ' ' << c << '=' << m.class_pixel_counts[c];
  std::cerr << '\n';
}

// --------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  int classes = 0;
  int steps = 1000;
  int batch = 8;
  double lr = 1e-4;
  std::string out;
  int base = 16;
  std::string mults = "1,2,4,8";
  int groups = 8;
  int timesteps = 250;
  double beta_start = 0.0;
  double beta_end = 0.0;
  std::string encoding = "cfl";
  int checkpoint_every = 0;
  int log_every = 100;
  std::string resume;
  SeedOption seed;
};

void run_train(TrainArgs& a) {
  TrainConfig tc;
  tc.learning_rate = a.lr;
  tc.batch_size = a.batch;
  tc.total_steps = a.steps;
  tc.checkpoint_every = a.checkpoint_every;
  tc.log_every = a.log_every;

  DenoiserConfig dc;
  ModelMeta model;
  std::optional<TrainState> state;
  if (!a.resume.empty()) {
    const Checkpoint ckpt = read_checkpoint(a.resume);
    tc.seed = ckpt.training.at("seed").get<std::uint64_t>();
    if (a.seed.option->count() > 0 && a.seed.value != tc.seed) {
      throw DomainError("--seed " + std::to_string(a.seed.value) + " differs from the checkpoint seed " +
                        std::to_string(tc.seed));
    }
    a.seed.value = tc.seed;
    dc = ckpt.config;
    model = ckpt.model;
    if (model.num_classes != a.classes) throw DomainError("--classes differs from the checkpoint");
    state.emplace(resume_state(ckpt, tc));
    std::cerr << "train: resuming from step " << state->step << " of " << a.resume << '\n';
  } else {
    tc.seed = a.seed.resolve("train");
    dc.base_features = a.base;
    dc.multipliers.clear();
    for (double m : parse_doubles(a.mults)) dc.multipliers.push_back(static_cast<int>(m));
    dc.groupnorm_groups = a.groups;
    model.num_classes = a.classes;
    model.encoding = parse_mask_encoding(a.encoding);
    model.timesteps = a.timesteps;
    if (a.beta_start > 0.0 || a.beta_end > 0.0) {
      model.beta_start = a.beta_start;
      model.beta_end = a.beta_end;
    } else {
      const NoiseSchedule s = NoiseSchedule::standard(a.timesteps);
      model.beta_start = s.beta(1);
      model.beta_end = s.beta(a.timesteps);
    }
    dc.validate();
    state.emplace(make_train_state(dc, tc));
  }
  tc.validate();

  const DatasetManifest manifest = ingest(a.data, a.classes);
  const auto ids = manifest.train_ids();
  if (ids.empty()) throw DomainError("dataset " + a.data + " has no training samples");
  if (manifest.width % dc.size_multiple() != 0 || manifest.height % dc.size_multiple() != 0) {
    throw DomainError("dataset resolution " + std::to_string(manifest.width) + "x" + std::to_string(manifest.height) +
                      " is not a multiple of " + std::to_string(dc.size_multiple()));
  }
  const auto samples = load_samples(manifest, ids);

  std::string mults;
  for (int m : dc.multipliers) mults += (mults.empty() ? "" : ",") + std::to_string(m);
  // Every resolved hyperparameter, in the same spelling as the flags.
  const std::vector<std::pair<std::string, std::string>> resolved = {
      {"data", a.data},
      {"classes", std::to_string(model.num_classes)},
      {"steps", std::to_string(tc.total_steps)},
      {"batch", std::to_string(tc.batch_size)},
      {"lr", format_double(tc.learning_rate)},
      {"seed", std::to_string(tc.seed)},
      {"out", a.out},
      {"base", std::to_string(dc.base_features)},
      {"mults", mults},
      {"groups", std::to_string(dc.groupnorm_groups)},
      {"timesteps", std::to_string(model.timesteps)},
      {"beta-start", format_double(model.beta_start)},
      {"beta-end", format_double(model.beta_end)},
      {"encoding", to_string(model.encoding)},
      {"checkpoint-every", std::to_string(tc.checkpoint_every)},
      {"log-every", std::to_string(tc.log_every)},
  };
  nlohmann::json cfg = nlohmann::json::object();
  std::string cfg_text = "# resolved training configuration; rerun with: simgen train --config <this file>\n";
  for (const auto& [k, v] : resolved) {
    cfg[k] = v;
    cfg_text += k + " = " + v + "\n";
  }
  cfg["train_size"] = ids.size();
  cfg["resolution"] = {manifest.width, manifest.height};
  cfg["parameters"] = state->net.parameter_count();
  fs::create_directories(a.out);
  std::ofstream(fs::path(a.out) / "run.cfg") << cfg_text;

  std::cerr << "train: " << ids.size() << " samples at " << manifest.width << "x" << manifest.height << ", "
            << state->net.parameter_count() << " parameters, seed " << tc.seed << '\n';
  const auto logger = [](int step, double loss, double sps) {
    std::fprintf(stderr, "step %d loss %.6f steps/s %.2f\n", step, loss, sps);
  };
  const TrainResult r = train(std::move(*state), tc, samples, model, TrainOutputs{a.out, cfg}, logger);
  std::cerr << "train: finished at step " << r.state.step << " -> " << a.out << '\n';
}

// -------------------------------------------------------------- sample

struct SampleArgs {
  std::string ckpt;
  int count = 16;
  int size = 32;
  std::string out;
  bool boxes = false;
  int min_area = -1;
  SeedOption seed;
};

void run_sample(SampleArgs& a) {
  const std::uint64_t seed = a.seed.resolve("sample");
  const Checkpoint ckpt = read_checkpoint(a.ckpt);
  const DenoiserNet net = load_denoiser(ckpt);
  const ClassPalette palette = ckpt.model.palette();
  const NoiseSchedule schedule = ckpt.model.schedule();
  const auto t0 = std::chrono::steady_clock::now();
  const GenerationBatch batch = sample_pairs(net, schedule, palette, a.count, a.size, seed, 16, [&](int t) {
    if (t % 50 == 0) {
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::fprintf(stderr, "sample: t=%d elapsed %.1fs\n", t, s);
    }
  });
  export_batch(batch, palette, a.out, ExportOptions{a.boxes, a.min_area});
  std::cerr << "sample: " << a.count << " pairs -> " << a.out << '\n';
}

// --------------------------------------------------------------- boxes

struct BoxesArgs {
  std::string masks;
  std::string out;
  int min_area = -1;
  SeedOption seed;
};

void run_boxes(BoxesArgs& a) {
  fs::path dir = a.masks;
  if (fs::is_directory(dir / "masks")) dir /= "masks";
  if (!fs::is_directory(dir)) throw IoError("mask directory " + dir.string() + " does not exist");
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<std::string> ids;
  std::vector<std::vector<BoundingBox>> boxes;
  for (const auto& p : paths) {
    const ClassMask m = load_mask_png(p);
    ids.push_back(p.stem().string());
    boxes.push_back(masks_to_boxes(m, a.min_area >= 0 ? a.min_area : default_min_area(m.width, m.height)));
  }
  write_boxes_json(a.out, ids, boxes);
  std::cerr << "boxes: " << ids.size() << " masks -> " << a.out << '\n';
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string real;
  std::string gen;
  int dim = 64;
  int block = 100;
  std::string report;
  std::string save_real;
  std::string save_gen;
  int crop = 64;
  int min_pixels = 32;
  SeedOption seed;
};

FeatureSet features_from(const std::string& src, const FeatureExtractor& ex, const std::string& save) {
  FeatureSet f = fs::path(src).extension() == ".sgft" ? import_features(src) : extract_features(ex, load_images(src));
  if (f.cols() != ex.output_dim()) {
    throw DomainError(src + ": feature dimension " + std::to_string(f.cols()) + " does not match extractor (" +
                      std::to_string(ex.output_dim()) + ")");
  }
  if (!save.empty()) export_features(save, f);
  return f;
}

std::uint64_t eval_seed(EvalArgs& a) {
  if (a.seed.option->count() == 0) std::cerr << "eval: feature extractor seed 0 (default)\n";
  return a.seed.value;
}

void emit(const nlohmann::json& j, const std::string& report) {
  std::cout << j.dump(2) << std::endl;
  if (!report.empty()) write_json(report, j);
}

void run_eval_fid(EvalArgs& a) {
  const auto ex = default_extractor(eval_seed(a), a.dim);
  const double v = fid_from_features(features_from(a.real, *ex, a.save_real), features_from(a.gen, *ex, a.save_gen));
  emit({{"fid", v}, {"extractor", ex->name()}}, a.report);
}

void run_eval_kid(EvalArgs& a) {
  const auto ex = default_extractor(eval_seed(a), a.dim);
  const double v = kid(features_from(a.real, *ex, a.save_real), features_from(a.gen, *ex, a.save_gen), a.block);
  emit({{"kid", v}, {"block_size", a.block}, {"extractor", ex->name()}}, a.report);
}

void run_eval_sid(EvalArgs& a) {
  const auto ex = default_extractor(eval_seed(a), a.dim);
  const SidReport r = sid(fs::path(a.real), fs::path(a.gen), *ex, SidOptions{a.crop, a.min_pixels, a.block});
  nlohmann::json j = to_json(r);
  j["extractor"] = ex->name();
  emit(j, a.report);
}

void add_config_flag(CLI::App* app) {
  app->add_option("--config", "flat `key = value` file (# comments); explicit flags override it");
}

// Moves `--config FILE` out of args and splices the file's tokens in right
// after the subcommand words, ahead of the explicit flags.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::vector<std::string> file_tokens;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config requires a file argument");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
      continue;
    }
    const auto t = config_tokens(read_text(path));
    file_tokens.insert(file_tokens.end(), t.begin(), t.end());
  }
  if (file_tokens.empty()) return rest;
  std::size_t head = rest.empty() ? 0 : (rest[0] == "eval" && rest.size() > 1 ? 2 : 1);
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(head), file_tokens.begin(), file_tokens.end());
  return rest;
}

}  // namespace

std::vector<std::string> config_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ConversionError("config line " + std::to_string(lineno) + ": expected `key = value`");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw CLI::ConversionError("config line " + std::to_string(lineno) + ": empty key");
    if (value == "true") {
      out.push_back("--" + key);
    } else if (value != "false") {
      out.push_back("--" + key);
      out.push_back(value);
    }
  }
  return out;
}

int dispatch(const std::vector<std::string>& raw_args) {
  CLI::App app{"Joint image and segmentation-mask diffusion: training, sampling and evaluation", "simgen"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", kVersion);

  PaletteArgs pa;
  auto* palette = app.add_subcommand("palette", "write the class palette as JSON");
  palette->add_option("--classes", pa.classes, "number of classes, background included")->required();
  palette->add_option("--out", pa.out, "output JSON path")->required();
  palette->add_option("--encoding", pa.encoding, "cfl or random_rgb")->capture_default_str();
  pa.seed.add(palette, "accepted for uniformity; palettes are deterministic");
  add_config_flag(palette);

  ScheduleArgs sa;
  auto* schedule = app.add_subcommand("schedule", "write the noise schedule as CSV (t, beta, alpha_bar)");
  schedule->add_option("--steps", sa.steps, "number of diffusion steps T")->capture_default_str();
  schedule->add_option("--out", sa.out, "output CSV path")->required();
  schedule->add_option("--beta-start", sa.beta_start, "first beta (default: 1e-4 * 1000/T)");
  schedule->add_option("--beta-end", sa.beta_end, "last beta (default: 0.02 * 1000/T)");
  sa.seed.add(schedule, "accepted for uniformity; schedules are deterministic");
  add_config_flag(schedule);

  ToyArgs ta;
  auto* toy = app.add_subcommand("make-toy", "generate the synthetic shapes dataset");
  toy->add_option("--out", ta.out, "output dataset directory")->required();
  toy->add_option("--count", ta.count, "number of pairs")->capture_default_str();
  toy->add_option("--size", ta.size, "image side in pixels")->capture_default_str();
  toy->add_option("--classes", ta.classes, "number of classes, background included")->capture_default_str();
  toy->add_option("--split", ta.split, "train,val,test fractions")->capture_default_str();
  ta.seed.add(toy, "dataset seed (drawn and logged when omitted)");
  add_config_flag(toy);

  TrainArgs tra;
  auto* tr = app.add_subcommand("train", "train the six-channel denoiser");
  tr->add_option("--data", tra.data, "dataset directory (images/, masks/, optional manifest.json)")->required();
  tr->add_option("--classes", tra.classes, "number of classes, background included")->required();
  tr->add_option("--out", tra.out, "run directory")->required();
  tr->add_option("--steps", tra.steps, "total optimisation steps")->capture_default_str();
  tr->add_option("--batch", tra.batch, "batch size")->capture_default_str();
  tr->add_option("--lr", tra.lr, "Adam learning rate")->capture_default_str();
  tr->add_option("--base", tra.base, "base feature width")->capture_default_str();
  tr->add_option("--mults", tra.mults, "per-level width multipliers")->capture_default_str();
  tr->add_option("--groups", tra.groups, "GroupNorm groups")->capture_default_str();
  tr->add_option("--timesteps", tra.timesteps, "diffusion steps T")->capture_default_str();
  tr->add_option("--beta-start", tra.beta_start, "first beta (default: 1e-4 * 1000/T)");
  tr->add_option("--beta-end", tra.beta_end, "last beta (default: 0.02 * 1000/T)");
  tr->add_option("--encoding", tra.encoding, "mask encoding: cfl or random_rgb")->capture_default_str();
  tr->add_option("--checkpoint-every", tra.checkpoint_every, "checkpoint period in steps (0: final only)")
      ->capture_default_str();
  tr->add_option("--log-every", tra.log_every, "progress line period in steps")->capture_default_str();
  tr->add_option("--resume", tra.resume, "continue from this checkpoint");
  tra.seed.add(tr, "training seed (drawn and logged when omitted)");
  add_config_flag(tr);

  SampleArgs sma;
  auto* smp = app.add_subcommand("sample", "generate image/mask pairs from a checkpoint");
  smp->add_option("--ckpt", sma.ckpt, "checkpoint file")->required();
  smp->add_option("--out", sma.out, "output directory")->required();
  smp->add_option("--count", sma.count, "number of pairs")->capture_default_str();
  smp->add_option("--size", sma.size, "image side in pixels")->capture_default_str();
  smp->add_flag("--boxes", sma.boxes, "also write boxes.json");
  smp->add_option("--min-area", sma.min_area, "smallest component kept as a box (default scales with size)");
  sma.seed.add(smp, "sampling seed (drawn and logged when omitted)");
  add_config_flag(smp);

  BoxesArgs ba;
  auto* bx = app.add_subcommand("boxes", "bounding boxes of connected class regions in mask PNGs");
  bx->add_option("--masks", ba.masks, "directory of mask PNGs (or a dataset root with masks/)")->required();
  bx->add_option("--out", ba.out, "output JSON path")->required();
  bx->add_option("--min-area", ba.min_area, "smallest component kept (default scales with size)");
  ba.seed.add(bx, "accepted for uniformity; box extraction is deterministic");
  add_config_flag(bx);

  auto* ev = app.add_subcommand("eval", "image metrics");
  ev->require_subcommand(1);
  EvalArgs ea;
  const auto common = [&ea](CLI::App* c, bool feature_files) {
    c->add_option("--real", ea.real, feature_files ? "real image directory or .sgft features" : "real pair directory")
        ->required();
    c->add_option("--gen", ea.gen, feature_files ? "generated image directory or .sgft features"
                                                 : "generated pair directory")
        ->required();
    c->add_option("--dim", ea.dim, "feature dimension")->capture_default_str();
    c->add_option("--report", ea.report, "also write the JSON result here");
    if (feature_files) {
      c->add_option("--save-real-features", ea.save_real, "write real features as .sgft");
      c->add_option("--save-gen-features", ea.save_gen, "write generated features as .sgft");
    }
    ea.seed.add(c, "feature extractor seed (default 0)");
    add_config_flag(c);
  };
  auto* fid = ev->add_subcommand("fid", "Frechet distance between feature Gaussians");
  common(fid, true);
  auto* kidc = ev->add_subcommand("kid", "unbiased polynomial-kernel MMD");
  common(kidc, true);
  kidc->add_option("--block", ea.block, "block size")->capture_default_str();
  auto* sidc = ev->add_subcommand("sid", "per-class FID/KID on isolated regions");
  common(sidc, false);
  sidc->add_option("--crop", ea.crop, "region crop side")->capture_default_str();
  sidc->add_option("--min-pixels", ea.min_pixels, "smallest region evaluated")->capture_default_str();
  sidc->add_option("--block", ea.block, "KID block size")->capture_default_str();

  auto* ver = app.add_subcommand("version", "print the version");

  if (!raw_args.empty() && raw_args[0].rfind('-', 0) != 0 && app.get_subcommand_no_throw(raw_args[0]) == nullptr) {
    std::cerr << "error: unknown subcommand '" << raw_args[0] << "'\n\n" << app.help();
    return kUsage;
  }
  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* ctx = &app;
    for (auto* sub : app.get_subcommands()) {
      ctx = sub;
      for (auto* inner : sub->get_subcommands()) ctx = inner;
    }
    std::cerr << ctx->help();
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }

  try {
    if (ver->parsed()) {
      std::cout << "simgen " << kVersion << std::endl;
    } else if (palette->parsed()) {
      run_palette(pa);
    } else if (schedule->parsed()) {
      run_schedule(sa);
    } else if (toy->parsed()) {
      run_make_toy(ta);
    } else if (tr->parsed()) {
      run_train(tra);
    } else if (smp->parsed()) {
      run_sample(sma);
    } else if (bx->parsed()) {
      run_boxes(ba);
    } else if (fid->parsed()) {
      run_eval_fid(ea);
    } else if (kidc->parsed()) {
      run_eval_kid(ea);
    } else if (sidc->parsed()) {
      run_eval_sid(ea);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args);
}

}  // namespace simgen::cli
