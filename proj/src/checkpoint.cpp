#include "simgen/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "simgen/errors.hpp"

namespace simgen {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'G', 'C', 'K'};

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

std::size_t numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

}  // namespace

nlohmann::json to_json(const DenoiserConfig& c) {
  return {{"base_features", c.base_features},
          {"multipliers", c.multipliers},
          {"groupnorm_groups", c.groupnorm_groups},
          {"time_embed_dim", c.time_embed_dim},
          {"zero_init_output", c.zero_init_output}};
}

DenoiserConfig denoiser_config_from_json(const nlohmann::json& j) {
  DenoiserConfig c;
  c.base_features = j.at("base_features").get<int>();
  c.multipliers = j.at("multipliers").get<std::vector<int>>();
  c.groupnorm_groups = j.at("groupnorm_groups").get<int>();
  c.time_embed_dim = j.at("time_embed_dim").get<int>();
  c.zero_init_output = j.value("zero_init_output", true);
  return c;
}

nlohmann::json to_json(const ModelMeta& m) {
  return {{"num_classes", m.num_classes},
          {"encoding", to_string(m.encoding)},
          {"timesteps", m.timesteps},
          {"beta_start", m.beta_start},
          {"beta_end", m.beta_end}};
}

ModelMeta model_meta_from_json(const nlohmann::json& j) {
  ModelMeta m;
  m.num_classes = j.at("num_classes").get<int>();
  m.encoding = parse_mask_encoding(j.at("encoding").get<std::string>());
  m.timesteps = j.at("timesteps").get<int>();
  m.beta_start = j.at("beta_start").get<double>();
  m.beta_end = j.at("beta_end").get<double>();
  return m;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json header;
  header["format_version"] = kCheckpointVersion;
  header["config"] = to_json(ckpt.config);
  header["model"] = to_json(ckpt.model);
  header["training"] = ckpt.training;
  auto manifest = nlohmann::json::array();
  for (const auto& t : ckpt.tensors) {
    if (numel(t.shape) != t.values.size()) throw DomainError("checkpoint tensor " + t.name + ": shape/size mismatch");
    manifest.push_back({{"name", t.name}, {"shape", t.shape}, {"dtype", "f32"}});
  }
  header["tensors"] = manifest;
  const std::string text = header.dump();

  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint " + tmp.string());
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& t : ckpt.tensors) {
      out.write(reinterpret_cast<const char*>(t.values.data()),
                static_cast<std::streamsize>(t.values.size() * sizeof(float)));
    }
    if (!out) throw IoError("write failed for checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto need = [&](std::size_t n, const char* what) {
    if (bytes.size() - pos < n) throw FormatError(path.string() + ": truncated " + what, pos);
  };
  need(16, "preamble");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError(path.string() + ": bad magic", 0);
  std::uint32_t version;
  std::uint64_t header_len;
  std::memcpy(&version, bytes.data() + 4, 4);
  std::memcpy(&header_len, bytes.data() + 8, 8);
  pos = 16;
  if (version != kCheckpointVersion) {
    throw FormatError(path.string() + ": unsupported format version " + std::to_string(version), 4);
  }
  need(header_len, "header");
  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                              bytes.begin() + static_cast<std::ptrdiff_t>(pos + header_len));
    ckpt.config = denoiser_config_from_json(header.at("config"));
    ckpt.model = model_meta_from_json(header.at("model"));
    ckpt.training = header.value("training", nlohmann::json::object());
    pos += header_len;
    for (const auto& entry : header.at("tensors")) {
      NamedTensor t;
      t.name = entry.at("name").get<std::string>();
      t.shape = entry.at("shape").get<std::vector<int>>();
      if (entry.at("dtype").get<std::string>() != "f32") throw FormatError(path.string() + ": unsupported dtype", pos);
      const std::size_t n = numel(t.shape);
      need(n * sizeof(float), ("tensor " + t.name).c_str());
      t.values.resize(n);
      std::memcpy(t.values.data(), bytes.data() + pos, n * sizeof(float));
      pos += n * sizeof(float);
      ckpt.tensors.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed header: " + e.what(), 16);
  }
  if (pos != bytes.size()) throw FormatError(path.string() + ": trailing bytes after last tensor", pos);
  return ckpt;
}

std::vector<NamedTensor> export_parameters(const DenoiserNet& net, const std::string& prefix) {
  std::vector<NamedTensor> out;
  for (const auto& p : net.params().params()) out.push_back({prefix + p.name, p.shape, p.value});
  return out;
}

void import_parameters(DenoiserNet& net, const Checkpoint& ckpt) {
  std::map<std::string, const NamedTensor*> by_name;
  for (const auto& t : ckpt.tensors) by_name[t.name] = &t;
  for (auto& p : net.params().params()) {
    const auto it = by_name.find(p.name);
    if (it == by_name.end()) throw FormatError("checkpoint is missing parameter " + p.name, 0);
    if (it->second->shape != p.shape) throw FormatError("checkpoint shape mismatch for " + p.name, 0);
    p.value = it->second->values;
  }
}

DenoiserNet load_denoiser(const Checkpoint& ckpt) {
  DenoiserNet net(ckpt.config, 0);
  import_parameters(net, ckpt);
  return net;
}

}  // namespace simgen
