#include "simgen/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "simgen/errors.hpp"

namespace fs = std::filesystem;

namespace simgen {

namespace {
constexpr std::uint64_t kStepStream = 0x5354455000000000ULL;
constexpr std::uint64_t kEpochStream = 0x45504f4300000000ULL;
}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw DomainError("train: learning_rate must be positive");
  if (batch_size < 1) throw DomainError("train: batch_size must be positive");
  if (total_steps < 0) throw DomainError("train: total_steps must be non-negative");
  if (checkpoint_every < 0 || log_every < 1) throw DomainError("train: checkpoint_every/log_every invalid");
}

Adam::Adam(const nn::ParamStore& params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params.params()) {
    m_.emplace_back(p.numel(), 0.0f);
    v_.emplace_back(p.numel(), 0.0f);
  }
}

void Adam::step(nn::ParamStore& params) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const auto b1 = static_cast<float>(beta1_), b2 = static_cast<float>(beta2_);
  std::size_t k = 0;
  for (auto& p : params.params()) {
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.numel(); ++i) {
      const float g = p.grad[i];
      m[i] = b1 * m[i] + (1.0f - b1) * g;
      v[i] = b2 * v[i] + (1.0f - b2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p.value[i] -= static_cast<float>(lr_ * mhat / (std::sqrt(vhat) + eps_));
    }
    ++k;
  }
}

std::vector<NamedTensor> Adam::export_state(const nn::ParamStore& params) const {
  std::vector<NamedTensor> out;
  std::size_t k = 0;
  for (const auto& p : params.params()) {
    out.push_back({"adam.m." + p.name, p.shape, m_[k]});
    out.push_back({"adam.v." + p.name, p.shape, v_[k]});
    ++k;
  }
  return out;
}

void Adam::import_state(const nn::ParamStore& params, const Checkpoint& ckpt, long long steps) {
  std::map<std::string, const NamedTensor*> by_name;
  for (const auto& t : ckpt.tensors) by_name[t.name] = &t;
  std::size_t k = 0;
  for (const auto& p : params.params()) {
    const auto m = by_name.find("adam.m." + p.name);
    const auto v = by_name.find("adam.v." + p.name);
    if (m == by_name.end() || v == by_name.end()) throw FormatError("checkpoint lacks optimizer state for " + p.name, 0);
    m_[k] = m->second->values;
    v_[k] = v->second->values;
    ++k;
  }
  t_ = steps;
}

TrainState make_train_state(const DenoiserConfig& net_config, const TrainConfig& config) {
  config.validate();
  DenoiserNet net(net_config, derive_seed(config.seed, 0x494e4954ULL));
  Adam opt(net.params(), config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps);
  return TrainState{0, std::move(net), std::move(opt), 0.0};
}

FieldBatch assemble_x0(std::span<const PairedSample* const> batch, const ClassPalette& palette) {
  if (batch.empty()) throw DomainError("assemble_x0: empty batch");
  const int w = batch[0]->image.width, h = batch[0]->image.height;
  FieldBatch x0(static_cast<int>(batch.size()), kSixChannels, h, w);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const PairedSample& s = *batch[b];
    if (s.image.width != w || s.image.height != h || s.mask.width != w || s.mask.height != h) {
      throw DomainError("assemble_x0: sample " + s.id + " has a different size");
    }
    const EncodedMask enc = encode_mask(s.mask, palette);
    const int bi = static_cast<int>(b);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * w + x;
        for (int ch = 0; ch < 3; ++ch) {
          x0.at(bi, ch, y, x) = s.image.at(x, y, ch);
          x0.at(bi, 3 + ch, y, x) = static_cast<float>(enc.values[3 * p + static_cast<std::size_t>(ch)]);
        }
      }
    }
  }
  return x0;
}

double train_step(TrainState& state, const FieldBatch& x0, std::span<const int> t, const FieldBatch& eps,
                  const NoiseSchedule& schedule) {
  const FieldBatch x_t = q_sample(x0, t, eps, schedule);
  auto pass = state.net.make_pass();
  const FieldBatch pred = state.net.forward(x_t, t, *pass);
  const double count = static_cast<double>(pred.size());
  double loss = 0.0;
  FieldBatch grad(pred.n, pred.c, pred.h, pred.w);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred.data[i]) - eps.data[i];
    loss += d * d;
    grad.data[i] = static_cast<float>(2.0 * d / count);
  }
  loss /= count;
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "non-finite loss at step " << state.step + 1 << " (timesteps:";
    for (int ti : t) msg << ' ' << ti;
    msg << "); halting";
    throw TrainingError(msg.str());
  }
  state.net.params().zero_grad();
  state.net.backward(grad, *pass);
  state.optimizer.step(state.net.params());
  ++state.step;
  state.running_loss = state.step == 1 ? loss : 0.99 * state.running_loss + 0.01 * loss;
  return loss;
}

double train_step(TrainState& state, std::span<const PairedSample* const> batch, const ClassPalette& palette,
                  const NoiseSchedule& schedule, Rng& rng) {
  const FieldBatch x0 = assemble_x0(batch, palette);
  std::vector<int> t(batch.size());
  for (auto& ti : t) ti = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(schedule.num_steps())));
  FieldBatch eps(x0.n, x0.c, x0.h, x0.w);
  for (auto& e : eps.data) e = static_cast<float>(rng.normal());
  return train_step(state, x0, t, eps, schedule);
}

std::vector<std::size_t> batch_indices(std::uint64_t seed, int step, int batch_size, std::size_t dataset_size) {
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(batch_size));
  const std::size_t start = static_cast<std::size_t>(step) * static_cast<std::size_t>(batch_size);
  std::size_t cached_epoch = SIZE_MAX;
  std::vector<std::size_t> perm(dataset_size);
  for (std::size_t k = start; k < start + static_cast<std::size_t>(batch_size); ++k) {
    const std::size_t epoch = k / dataset_size;
    if (epoch != cached_epoch) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      Rng rng(derive_seed(seed, kEpochStream, epoch));
      shuffle(perm.begin(), perm.end(), rng);
      cached_epoch = epoch;
    }
    out.push_back(perm[k % dataset_size]);
  }
  return out;
}

Checkpoint make_checkpoint(const TrainState& state, const TrainConfig& config, const ModelMeta& model) {
  Checkpoint ckpt;
  ckpt.config = state.net.config();
  ckpt.model = model;
  ckpt.training = {{"step", state.step},
                   {"seed", config.seed},
                   {"learning_rate", config.learning_rate},
                   {"batch_size", config.batch_size},
                   {"running_loss", state.running_loss}};
  ckpt.tensors = export_parameters(state.net);
  auto opt = state.optimizer.export_state(state.net.params());
  ckpt.tensors.insert(ckpt.tensors.end(), std::make_move_iterator(opt.begin()), std::make_move_iterator(opt.end()));
  return ckpt;
}

TrainState resume_state(const Checkpoint& ckpt, const TrainConfig& config) {
  TrainState state = make_train_state(ckpt.config, config);
  import_parameters(state.net, ckpt);
  const int step = ckpt.training.at("step").get<int>();
  state.optimizer.import_state(state.net.params(), ckpt, step);
  state.step = step;
  state.running_loss = ckpt.training.value("running_loss", 0.0);
  return state;
}

TrainResult train(TrainState state, const TrainConfig& config, const std::vector<PairedSample>& dataset,
                  const ModelMeta& model, const TrainOutputs& outputs, const TrainLogger& log) {
  config.validate();
  if (dataset.empty()) throw DomainError("train: dataset is empty");
  const NoiseSchedule schedule = model.schedule();
  const ClassPalette palette = model.palette();

  std::FILE* curve = nullptr;
  const bool files = !outputs.run_dir.empty();
  if (files) {
    fs::create_directories(outputs.run_dir);
    std::ofstream(outputs.run_dir / "config.json") << outputs.resolved_config.dump(2) << '\n';
    const auto curve_path = outputs.run_dir / "loss.csv";
    if (state.step == 0 || !fs::exists(curve_path)) {
      curve = std::fopen(curve_path.c_str(), "w");
      if (curve) std::fprintf(curve, "step,loss\n");
    } else {
      // Resuming: keep rows up to the checkpoint step, append the rest.
      std::ifstream in(curve_path);
      std::string line, kept;
      std::getline(in, line);
      kept = line + "\n";
      while (std::getline(in, line)) {
        if (std::stoi(line.substr(0, line.find(','))) <= state.step) kept += line + "\n";
      }
      in.close();
      curve = std::fopen(curve_path.c_str(), "w");
      if (curve) std::fputs(kept.c_str(), curve);
    }
    if (!curve) throw IoError("cannot write " + curve_path.string());
  }

  TrainResult result{std::move(state), {}};
  TrainState& st = result.state;
  auto t0 = std::chrono::steady_clock::now();
  int steps_since_log = 0;
  std::vector<const PairedSample*> batch(static_cast<std::size_t>(config.batch_size));
  try {
    while (st.step < config.total_steps) {
      const auto idx = batch_indices(config.seed, st.step, config.batch_size, dataset.size());
      for (std::size_t k = 0; k < idx.size(); ++k) batch[k] = &dataset[idx[k]];
      Rng rng(derive_seed(config.seed, kStepStream, static_cast<std::uint64_t>(st.step)));
      const double loss = train_step(st, batch, palette, schedule, rng);
      result.losses.emplace_back(st.step, loss);
      if (curve) std::fprintf(curve, "%d,%.9g\n", st.step, loss);
      ++steps_since_log;
      if (log && (st.step % config.log_every == 0 || st.step == config.total_steps)) {
        const auto now = std::chrono::steady_clock::now();
        const double secs = std::chrono::duration<double>(now - t0).count();
        log(st.step, loss, secs > 0 ? steps_since_log / secs : 0.0);
        t0 = now;
        steps_since_log = 0;
      }
      const bool periodic = config.checkpoint_every > 0 && st.step % config.checkpoint_every == 0;
      if (files && (periodic || st.step == config.total_steps)) {
        std::fflush(curve);
        write_checkpoint(outputs.run_dir / ("ckpt_" + std::to_string(st.step) + ".bin"),
                         make_checkpoint(st, config, model));
      }
    }
  } catch (...) {
    if (curve) std::fclose(curve);
    throw;
  }
  if (curve) std::fclose(curve);
  return result;
}

}  // namespace simgen
