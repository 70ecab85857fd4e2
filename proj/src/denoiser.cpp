#include "simgen/denoiser.hpp"

#include <algorithm>

#include "simgen/errors.hpp"

namespace simgen {

int DenoiserConfig::groups_for(int ch) const {
  for (int g = std::min(groupnorm_groups, ch); g > 1; --g) {
    if (ch % g == 0) return g;
  }
  return 1;
}

void DenoiserConfig::validate() const {
  if (base_features < 1) throw DomainError("denoiser: base_features must be positive");
  if (multipliers.empty()) throw DomainError("denoiser: multipliers must be non-empty");
  for (int m : multipliers) {
    if (m < 1) throw DomainError("denoiser: multipliers must be positive");
  }
  if (groupnorm_groups < 1) throw DomainError("denoiser: groupnorm_groups must be positive");
  if (base_features % std::min(groupnorm_groups, base_features) != 0) {
    throw DomainError("denoiser: base_features must be divisible by the GroupNorm group count");
  }
  if (time_embed_dim < 0 || resolved_time_dim() % 2 != 0) {
    throw DomainError("denoiser: time_embed_dim must be a positive even number");
  }
}

DenoiserConfig DenoiserConfig::full() {
  DenoiserConfig c;
  c.base_features = 64;
  return c;
}

DenoiserConfig DenoiserConfig::desk() { return DenoiserConfig{}; }

DenoiserConfig DenoiserConfig::tiny() {
  DenoiserConfig c;
  c.base_features = 8;
  return c;
}

struct ConvBlock {
  nn::GroupNorm norm;
  nn::Conv2d conv;
  nn::Gelu act;

  ConvBlock(nn::ParamStore& s, const std::string& name, int cin, int cout, int groups, Rng& rng)
      : norm(s, name + ".norm", cin, groups), conv(s, name + ".conv", cin, cout, 3, 1, 1, rng), act(s) {}

  nn::Tensor forward(const nn::Tensor& x, nn::Tape* tape) const {
    return act.forward(conv.forward(norm.forward(x, tape), tape), tape);
  }
  nn::Tensor backward(const nn::Tensor& dy, const nn::Tape& tape) const {
    return norm.backward(conv.backward(act.backward(dy, tape), tape), tape);
  }
};

struct Level {
  ConvBlock block1;
  ConvBlock block2;
  nn::Linear time_proj;
};

struct DenoiserNet::Layers {
  nn::Linear time_in;
  nn::Linear time_out;
  nn::Conv2d init_conv;
  std::vector<Level> encoder;
  std::vector<nn::Conv2d> down;
  Level mid;
  std::vector<Level> decoder;             // indexed by level
  std::vector<nn::ConvTranspose2d> up;    // up[l - 1] maps level l -> l - 1
  nn::Conv2d out_conv;
};

namespace {

Level make_level(nn::ParamStore& s, const std::string& name, int cin, int ch, int time_dim,
                 const DenoiserConfig& cfg, Rng& rng) {
  ConvBlock b1(s, name + ".block1", cin, ch, cfg.groups_for(cin), rng);
  nn::Linear proj(s, name + ".time_proj", time_dim, ch, rng);
  ConvBlock b2(s, name + ".block2", ch, ch, cfg.groups_for(ch), rng);
  return Level{std::move(b1), std::move(b2), std::move(proj)};
}

}  // namespace

DenoiserNet::DenoiserNet(const DenoiserConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const int td = config_.resolved_time_dim();
  const int levels = config_.num_levels();
  const int c0 = config_.channels(0);

  nn::Linear time_in(store_, "time.fc1", td, td, rng);
  nn::Linear time_out(store_, "time.fc2", td, td, rng);
  nn::Conv2d init_conv(store_, "init_conv", kSixChannels, c0, 3, 1, 1, rng);

  std::vector<Level> encoder;
  std::vector<nn::Conv2d> down;
  for (int l = 0; l < levels; ++l) {
    const int ch = config_.channels(l);
    encoder.push_back(make_level(store_, "enc." + std::to_string(l), ch, ch, td, config_, rng));
    if (l + 1 < levels) {
      down.emplace_back(store_, "down." + std::to_string(l), ch, config_.channels(l + 1), 3, 2, 1, rng);
    }
  }
  const int deepest = config_.channels(levels - 1);
  Level mid = make_level(store_, "mid", deepest, deepest, td, config_, rng);

  std::vector<Level> decoder;
  std::vector<nn::ConvTranspose2d> up;
  for (int l = levels - 1; l >= 0; --l) {
    const int ch = config_.channels(l);
    decoder.push_back(make_level(store_, "dec." + std::to_string(l), 3 * ch, ch, td, config_, rng));
    if (l > 0) up.emplace_back(store_, "up." + std::to_string(l), ch, config_.channels(l - 1), 4, 2, 1, rng);
  }
  std::reverse(decoder.begin(), decoder.end());
  std::reverse(up.begin(), up.end());

  nn::Conv2d out_conv(store_, "out_conv", 2 * c0, kSixChannels, 3, 1, 1, rng, config_.zero_init_output);

  layers_ = std::make_unique<Layers>(Layers{std::move(time_in), std::move(time_out), std::move(init_conv),
                                            std::move(encoder), std::move(down), std::move(mid),
                                            std::move(decoder), std::move(up), std::move(out_conv)});
}

DenoiserNet::~DenoiserNet() = default;
DenoiserNet::DenoiserNet(DenoiserNet&&) noexcept = default;
DenoiserNet& DenoiserNet::operator=(DenoiserNet&&) noexcept = default;

DenoiserNet build_denoiser(const DenoiserConfig& config, std::uint64_t seed) { return DenoiserNet(config, seed); }

std::unique_ptr<DenoiserNet::Pass> DenoiserNet::make_pass() const {
  auto p = std::make_unique<Pass>();
  p->tape = nn::Tape(store_.slot_count());
  return p;
}

nn::Tensor to_channel_major(const FieldBatch& f) {
  nn::Tensor t(f.c, f.n, f.h, f.w);
  const std::size_t plane = static_cast<std::size_t>(f.h) * f.w;
  for (int b = 0; b < f.n; ++b) {
    for (int ch = 0; ch < f.c; ++ch) {
      std::copy_n(f.data.begin() + static_cast<std::ptrdiff_t>(f.index(b, ch, 0, 0)), plane, t.channel(ch, b));
    }
  }
  return t;
}

FieldBatch from_channel_major(const nn::Tensor& t) {
  FieldBatch f(t.n, t.c, t.h, t.w);
  const std::size_t plane = t.plane();
  for (int b = 0; b < t.n; ++b) {
    for (int ch = 0; ch < t.c; ++ch) {
      std::copy_n(t.channel(ch, b), plane, f.data.begin() + static_cast<std::ptrdiff_t>(f.index(b, ch, 0, 0)));
    }
  }
  return f;
}

void DenoiserNet::check_input(const FieldBatch& x_t, std::span<const int> t) const {
  if (x_t.c != kSixChannels) throw DomainError("denoiser: input must have 6 channels");
  const int m = config_.size_multiple();
  if (x_t.h % m != 0 || x_t.w % m != 0 || x_t.h == 0 || x_t.w == 0) {
    throw DomainError("denoiser: spatial size " + std::to_string(x_t.h) + "x" + std::to_string(x_t.w) +
                      " must be a positive multiple of " + std::to_string(m) + " (2^(levels-1)) so that every "
                      "downsampled skip aligns with its upsampled decoder input");
  }
  if (t.size() != static_cast<std::size_t>(x_t.n)) throw DomainError("denoiser: need one timestep per batch item");
  for (int ti : t) {
    if (ti < 1) throw DomainError("denoiser: timesteps are 1-based");
  }
}

nn::Tensor DenoiserNet::run(const nn::Tensor& x, std::span<const int> t, Pass* pass) const {
  const Layers& L = *layers_;
  nn::Tape* tape = pass ? &pass->tape : nullptr;
  const int levels = config_.num_levels();

  const nn::Matrix hidden = L.time_in.forward(nn::timestep_embedding(t, config_.resolved_time_dim()), tape);
  const nn::Matrix temb = L.time_out.forward(nn::gelu(hidden), tape);
  if (pass) pass->time_hidden = hidden;

  auto level_forward = [&](const Level& lv, const nn::Tensor& in, nn::Tensor* skip_a) {
    nn::Tensor h = lv.block1.forward(in, tape);
    nn::add_channel_bias(h, lv.time_proj.forward(temb, tape));
    if (skip_a) *skip_a = h;
    return lv.block2.forward(h, tape);
  };

  nn::Tensor h = L.init_conv.forward(x, tape);
  const nn::Tensor init = h;
  std::vector<nn::Tensor> skip_a(static_cast<std::size_t>(levels)), skip_b(static_cast<std::size_t>(levels));
  for (int l = 0; l < levels; ++l) {
    const auto li = static_cast<std::size_t>(l);
    h = level_forward(L.encoder[li], h, &skip_a[li]);
    skip_b[li] = h;
    if (l + 1 < levels) h = L.down[li].forward(h, tape);
  }
  h = level_forward(L.mid, h, nullptr);
  for (int l = levels - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    const nn::Tensor* parts[] = {&h, &skip_a[li], &skip_b[li]};
    h = level_forward(L.decoder[li], nn::concat_channels(parts), nullptr);
    if (l > 0) h = L.up[li - 1].forward(h, tape);
  }
  // The init conv output bypasses every GroupNorm and feeds the final projection.
  const nn::Tensor* last[] = {&h, &init};
  return L.out_conv.forward(nn::concat_channels(last), tape);
}

FieldBatch DenoiserNet::predict_noise(const FieldBatch& x_t, std::span<const int> t) const {
  check_input(x_t, t);
  return from_channel_major(run(to_channel_major(x_t), t, nullptr));
}

FieldBatch DenoiserNet::forward(const FieldBatch& x_t, std::span<const int> t, Pass& pass) const {
  check_input(x_t, t);
  if (pass.tape.slots.size() != static_cast<std::size_t>(store_.slot_count())) pass.tape = nn::Tape(store_.slot_count());
  pass.n = x_t.n;
  pass.h = x_t.h;
  pass.w = x_t.w;
  return from_channel_major(run(to_channel_major(x_t), t, &pass));
}

void DenoiserNet::backward(const FieldBatch& grad_output, const Pass& pass) {
  const Layers& L = *layers_;
  const nn::Tape& tape = pass.tape;
  const int levels = config_.num_levels();
  nn::Matrix dtemb(pass.n, config_.resolved_time_dim());
  auto add_into = [](nn::Matrix& acc, const nn::Matrix& m) {
    for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += m.v[i];
  };
  auto add_tensor = [](nn::Tensor& acc, const nn::Tensor& t) {
    for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += t.v[i];
  };
  // Reverse of level_forward; returns d(input) and the gradient reaching the
  // block1 output (which is also skip_a for encoder levels).
  auto level_backward = [&](const Level& lv, const nn::Tensor& dy, const nn::Tensor* dskip_a) {
    nn::Tensor dh = lv.block2.backward(dy, tape);
    if (dskip_a) add_tensor(dh, *dskip_a);
    add_into(dtemb, lv.time_proj.backward(nn::sum_spatial(dh), tape));
    return lv.block1.backward(dh, tape);
  };

  nn::Tensor dout = L.out_conv.backward(to_channel_major(grad_output), tape);
  const int c0 = dout.c / 2;
  const std::size_t half = dout.v.size() / 2;
  nn::Tensor dh(c0, dout.n, dout.h, dout.w), dinit(c0, dout.n, dout.h, dout.w);
  std::copy_n(dout.v.begin(), half, dh.v.begin());
  std::copy_n(dout.v.begin() + static_cast<std::ptrdiff_t>(half), half, dinit.v.begin());
  std::vector<nn::Tensor> dskip_a(static_cast<std::size_t>(levels)), dskip_b(static_cast<std::size_t>(levels));
  for (int l = 0; l < levels; ++l) {
    const auto li = static_cast<std::size_t>(l);
    if (l > 0) dh = L.up[li - 1].backward(dh, tape);
    nn::Tensor dcat = level_backward(L.decoder[li], dh, nullptr);
    const std::size_t part = dcat.v.size() / 3;
    const int ch = dcat.c / 3;
    auto slice = [&](int k) {
      nn::Tensor s(ch, dcat.n, dcat.h, dcat.w);
      std::copy_n(dcat.v.begin() + static_cast<std::ptrdiff_t>(k * part), part, s.v.begin());
      return s;
    };
    dh = slice(0);
    dskip_a[li] = slice(1);
    dskip_b[li] = slice(2);
  }
  dh = level_backward(L.mid, dh, nullptr);
  for (int l = levels - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    if (l + 1 < levels) dh = L.down[li].backward(dh, tape);
    add_tensor(dh, dskip_b[li]);
    dh = level_backward(L.encoder[li], dh, &dskip_a[li]);
  }
  add_tensor(dh, dinit);
  L.init_conv.backward(dh, tape);

  const nn::Matrix dhidden = L.time_out.backward(dtemb, tape);
  L.time_in.backward(nn::gelu_backward(pass.time_hidden, dhidden), tape);
}

}  // namespace simgen
