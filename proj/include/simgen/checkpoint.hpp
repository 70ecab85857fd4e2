#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "simgen/cfl_codec.hpp"
#include "simgen/denoiser.hpp"
#include "simgen/diffusion_schedule.hpp"

namespace simgen {

// On-disk layout (all integers little-endian):
//   "SGCK"  u32 format_version  u64 header_bytes  header JSON
//   then, for every manifest entry in order, numel little-endian float32s.
// The header holds the denoiser config, model metadata, free-form training
// metadata and the tensor manifest (name, shape, dtype).
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct ModelMeta {
  int num_classes = 2;
  MaskEncoding encoding = MaskEncoding::cfl;
  int timesteps = 250;
  double beta_start = 4e-4;
  double beta_end = 0.08;

  NoiseSchedule schedule() const { return NoiseSchedule::linear(timesteps, beta_start, beta_end); }
  ClassPalette palette() const { return make_palette(num_classes, encoding); }
};

struct NamedTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<float> values;
};

struct Checkpoint {
  DenoiserConfig config;
  ModelMeta model;
  nlohmann::json training = nlohmann::json::object();
  std::vector<NamedTensor> tensors;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Copies the network parameters into / out of checkpoint tensors.
std::vector<NamedTensor> export_parameters(const DenoiserNet& net, const std::string& prefix = "");
void import_parameters(DenoiserNet& net, const Checkpoint& ckpt);

DenoiserNet load_denoiser(const Checkpoint& ckpt);

nlohmann::json to_json(const DenoiserConfig& c);
DenoiserConfig denoiser_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelMeta& m);
ModelMeta model_meta_from_json(const nlohmann::json& j);

}  // namespace simgen
