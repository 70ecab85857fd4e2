#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "simgen/cfl_codec.hpp"
#include "simgen/checkpoint.hpp"
#include "simgen/data_io.hpp"
#include "simgen/denoiser.hpp"
#include "simgen/diffusion_schedule.hpp"

namespace simgen {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 8;
  int total_steps = 1000;
  std::uint64_t seed = 0;
  int checkpoint_every = 0;  // 0: only the final checkpoint
  int log_every = 100;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

class Adam {
 public:
  Adam() = default;
  Adam(const nn::ParamStore& params, double lr, double beta1, double beta2, double eps);

  void step(nn::ParamStore& params);
  long long steps_taken() const { return t_; }

  std::vector<NamedTensor> export_state(const nn::ParamStore& params) const;
  void import_state(const nn::ParamStore& params, const Checkpoint& ckpt, long long steps);

 private:
  double lr_ = 1e-4, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long long t_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

struct TrainState {
  int step = 0;
  DenoiserNet net;
  Adam optimizer;
  double running_loss = 0.0;
};

TrainState make_train_state(const DenoiserConfig& net_config, const TrainConfig& config);

// x0 = image (+) encoded mask, channels 0-2 and 3-5.
FieldBatch assemble_x0(std::span<const PairedSample* const> batch, const ClassPalette& palette);

// One optimisation step on explicit noise: loss = mean((eps - eps_theta(q_sample(x0, t, eps), t))^2).
double train_step(TrainState& state, const FieldBatch& x0, std::span<const int> t, const FieldBatch& eps,
                  const NoiseSchedule& schedule);

// Draws t ~ U{1..T} per sample and eps ~ N(0, 1) per element from rng.
double train_step(TrainState& state, std::span<const PairedSample* const> batch, const ClassPalette& palette,
                  const NoiseSchedule& schedule, Rng& rng);

// Dataset positions used at `step` (0-based): consecutive slices of a seeded
// permutation that is redrawn every epoch.
std::vector<std::size_t> batch_indices(std::uint64_t seed, int step, int batch_size, std::size_t dataset_size);

struct TrainOutputs {
  std::filesystem::path run_dir;  // empty: no files
  nlohmann::json resolved_config = nlohmann::json::object();
};

struct TrainResult {
  TrainState state;
  std::vector<std::pair<int, double>> losses;  // (1-based step, loss)
};

using TrainLogger = std::function<void(int step, double loss, double steps_per_sec)>;

// Runs steps state.step + 1 .. config.total_steps. Writes loss.csv,
// ckpt_<step>.bin and config.json into outputs.run_dir when set.
TrainResult train(TrainState state, const TrainConfig& config, const std::vector<PairedSample>& dataset,
                  const ModelMeta& model, const TrainOutputs& outputs = {}, const TrainLogger& log = {});

Checkpoint make_checkpoint(const TrainState& state, const TrainConfig& config, const ModelMeta& model);
TrainState resume_state(const Checkpoint& ckpt, const TrainConfig& config);

}  // namespace simgen
