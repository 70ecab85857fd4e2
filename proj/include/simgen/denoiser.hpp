#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "simgen/field.hpp"
#include "simgen/nn.hpp"

namespace simgen {

struct DenoiserConfig {
  int base_features = 16;
  std::vector<int> multipliers{1, 2, 4, 8};
  int groupnorm_groups = 8;
  int time_embed_dim = 0;  // 0 selects 4 * base_features
  bool zero_init_output = true;

  int num_levels() const { return static_cast<int>(multipliers.size()); }
  int channels(int level) const { return base_features * multipliers[static_cast<std::size_t>(level)]; }
  int resolved_time_dim() const { return time_embed_dim > 0 ? time_embed_dim : 4 * base_features; }
  // Largest group count <= groupnorm_groups dividing `ch`.
  int groups_for(int ch) const;
  // Spatial sizes must be multiples of this.
  int size_multiple() const { return 1 << (num_levels() - 1); }
  void validate() const;

  // 64 features, (1, 2, 4, 8).
  static DenoiserConfig full();
  // 16 features, (1, 2, 4, 8).
  static DenoiserConfig desk();
  // 8 features, (1, 2, 4, 8): single-core toy training.
  static DenoiserConfig tiny();

  bool operator==(const DenoiserConfig&) const = default;
};

// Residual U-Net noise predictor over six-channel fields.
//
//   init conv (6 -> C0)
//   encoder level l: ConvBlock, + time projection, ConvBlock, then a
//                    stride-2 conv (C_l -> C_{l+1}) below the last level
//   mid:             ConvBlock, + time projection, ConvBlock
//   decoder level l: concat(h, skip_a[l], skip_b[l]) -> ConvBlock (3 C_l -> C_l),
//                    + time projection, ConvBlock, then a stride-2
//                    transposed conv (C_l -> C_{l-1}) above level 0
//   output conv (C0 -> 6), zero-initialised by default
//
// ConvBlock = GroupNorm -> 3x3 conv -> GELU. The time embedding is a
// sinusoidal code fed through Linear -> GELU -> Linear.
class DenoiserNet {
 public:
  DenoiserNet(const DenoiserConfig& config, std::uint64_t seed);
  ~DenoiserNet();
  DenoiserNet(DenoiserNet&&) noexcept;
  DenoiserNet& operator=(DenoiserNet&&) noexcept;

  const DenoiserConfig& config() const { return config_; }
  std::size_t parameter_count() const { return store_.total(); }
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }

  // Inference on an NCHW batch of six-channel fields; t is 1-based.
  FieldBatch predict_noise(const FieldBatch& x_t, std::span<const int> t) const;

  // Training pass: records intermediates for backward().
  struct Pass;
  FieldBatch forward(const FieldBatch& x_t, std::span<const int> t, Pass& pass) const;
  // Accumulates parameter gradients from dL/d(output).
  void backward(const FieldBatch& grad_output, const Pass& pass);

  std::unique_ptr<Pass> make_pass() const;

 private:
  struct Layers;
  nn::Tensor run(const nn::Tensor& x, std::span<const int> t, Pass* pass) const;
  void check_input(const FieldBatch& x_t, std::span<const int> t) const;

  DenoiserConfig config_;
  nn::ParamStore store_;
  std::unique_ptr<Layers> layers_;
};

struct DenoiserNet::Pass {
  nn::Tape tape;
  nn::Matrix time_hidden;  // pre-activation of the time MLP
  int n = 0, h = 0, w = 0;
};

DenoiserNet build_denoiser(const DenoiserConfig& config, std::uint64_t seed);

// NCHW <-> channel-major conversions.
nn::Tensor to_channel_major(const FieldBatch& f);
FieldBatch from_channel_major(const nn::Tensor& t);

}  // namespace simgen
