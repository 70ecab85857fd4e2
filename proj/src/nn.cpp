#include "simgen/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "simgen/errors.hpp"

namespace simgen::nn {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

struct Geometry {
  int c, n, h, w;  // image side
  int k, stride, pad;
  int oh, ow;      // patch grid
  std::size_t rows() const { return static_cast<std::size_t>(c) * k * k; }
  std::size_t cols() const { return static_cast<std::size_t>(n) * oh * ow; }
};

// col[(ci, ky, kx)][(b, oy, ox)] = img[ci][b][oy*s - p + ky][ox*s - p + kx]
void im2col(const float* img, const Geometry& g, float* col) {
  const std::size_t cols = g.cols();
  for (int ci = 0; ci < g.c; ++ci) {
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        float* row = col + ((static_cast<std::size_t>(ci) * g.k + ky) * g.k + kx) * cols;
        for (int b = 0; b < g.n; ++b) {
          const float* src = img + (static_cast<std::size_t>(ci) * g.n + b) * g.h * g.w;
          for (int oy = 0; oy < g.oh; ++oy) {
            float* dst = row + (static_cast<std::size_t>(b) * g.oh + oy) * g.ow;
            const int iy = oy * g.stride - g.pad + ky;
            if (iy < 0 || iy >= g.h) {
              std::fill(dst, dst + g.ow, 0.0f);
              continue;
            }
            const float* line = src + static_cast<std::size_t>(iy) * g.w;
            for (int ox = 0; ox < g.ow; ++ox) {
              const int ix = ox * g.stride - g.pad + kx;
              dst[ox] = (ix >= 0 && ix < g.w) ? line[ix] : 0.0f;
            }
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters-adds columns back into img (which must be zeroed).
void col2im(const float* col, const Geometry& g, float* img) {
  const std::size_t cols = g.cols();
  for (int ci = 0; ci < g.c; ++ci) {
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        const float* row = col + ((static_cast<std::size_t>(ci) * g.k + ky) * g.k + kx) * cols;
        for (int b = 0; b < g.n; ++b) {
          float* dst = img + (static_cast<std::size_t>(ci) * g.n + b) * g.h * g.w;
          for (int oy = 0; oy < g.oh; ++oy) {
            const int iy = oy * g.stride - g.pad + ky;
            if (iy < 0 || iy >= g.h) continue;
            const float* src = row + (static_cast<std::size_t>(b) * g.oh + oy) * g.ow;
            float* line = dst + static_cast<std::size_t>(iy) * g.w;
            for (int ox = 0; ox < g.ow; ++ox) {
              const int ix = ox * g.stride - g.pad + kx;
              if (ix >= 0 && ix < g.w) line[ix] += src[ox];
            }
          }
        }
      }
    }
  }
}

void init_uniform(Param& p, double bound, Rng& rng) {
  for (auto& x : p.value) x = static_cast<float>(rng.uniform(-bound, bound));
}

void accumulate_channel_sums(const Tensor& dy, std::vector<float>& grad) {
  const std::size_t per = static_cast<std::size_t>(dy.n) * dy.plane();
  for (int ch = 0; ch < dy.c; ++ch) {
    const float* p = dy.v.data() + static_cast<std::size_t>(ch) * per;
    double s = 0.0;
    for (std::size_t i = 0; i < per; ++i) s += p[i];
    grad[static_cast<std::size_t>(ch)] += static_cast<float>(s);
  }
}

void add_channel_constant(Tensor& y, const std::vector<float>& bias) {
  const std::size_t per = static_cast<std::size_t>(y.n) * y.plane();
  for (int ch = 0; ch < y.c; ++ch) {
    float* p = y.v.data() + static_cast<std::size_t>(ch) * per;
    const float b = bias[static_cast<std::size_t>(ch)];
    for (std::size_t i = 0; i < per; ++i) p[i] += b;
  }
}

}  // namespace

Param& ParamStore::add(std::string name, std::vector<int> shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  Param& p = params_.emplace_back();
  p.name = std::move(name);
  p.shape = std::move(shape);
  p.value.assign(n, 0.0f);
  p.grad.assign(n, 0.0f);
  return p;
}

std::size_t ParamStore::total() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.numel();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0f);
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(ParamStore& store, const std::string& name, int cin, int cout, int kernel, int stride, int pad,
               Rng& rng, bool zero_init)
    : cin_(cin), cout_(cout), k_(kernel), stride_(stride), pad_(pad), slot_(store.new_slot()) {
  weight_ = &store.add(name + ".weight", {cout, cin, kernel, kernel});
  bias_ = &store.add(name + ".bias", {cout});
  if (!zero_init) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cin) * kernel * kernel);
    init_uniform(*weight_, bound, rng);
    init_uniform(*bias_, bound, rng);
  }
}

Tensor Conv2d::forward(const Tensor& x, Tape* tape) const {
  if (x.c != cin_) throw DomainError(weight_->name + ": expected " + std::to_string(cin_) + " input channels");
  const Geometry g{x.c, x.n, x.h, x.w, k_, stride_, pad_, out_size(x.h), out_size(x.w)};
  std::vector<float> col(g.rows() * g.cols());
  im2col(x.v.data(), g, col.data());
  Tensor y(cout_, x.n, g.oh, g.ow);
  MapMat(y.v.data(), cout_, static_cast<Eigen::Index>(g.cols())).noalias() =
      ConstMapMat(weight_->value.data(), cout_, static_cast<Eigen::Index>(g.rows())) *
      ConstMapMat(col.data(), static_cast<Eigen::Index>(g.rows()), static_cast<Eigen::Index>(g.cols()));
  add_channel_constant(y, bias_->value);
  if (tape) tape->slots[static_cast<std::size_t>(slot_)] = {x};
  return y;
}

Tensor Conv2d::backward(const Tensor& dy, const Tape& tape) const {
  const Tensor& x = tape.slots[static_cast<std::size_t>(slot_)].at(0);
  const Geometry g{x.c, x.n, x.h, x.w, k_, stride_, pad_, dy.h, dy.w};
  const auto rows = static_cast<Eigen::Index>(g.rows());
  const auto cols = static_cast<Eigen::Index>(g.cols());
  std::vector<float> col(g.rows() * g.cols());
  im2col(x.v.data(), g, col.data());
  ConstMapMat dY(dy.v.data(), cout_, cols);
  MapMat(weight_->grad.data(), cout_, rows).noalias() += dY * ConstMapMat(col.data(), rows, cols).transpose();
  accumulate_channel_sums(dy, bias_->grad);
  MapMat(col.data(), rows, cols).noalias() = ConstMapMat(weight_->value.data(), cout_, rows).transpose() * dY;
  Tensor dx(x.c, x.n, x.h, x.w);
  col2im(col.data(), g, dx.v.data());
  return dx;
}

// ------------------------------------------------------- ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(ParamStore& store, const std::string& name, int cin, int cout, int kernel,
                                 int stride, int pad, Rng& rng)
    : cin_(cin), cout_(cout), k_(kernel), stride_(stride), pad_(pad), slot_(store.new_slot()) {
  weight_ = &store.add(name + ".weight", {cin, cout, kernel, kernel});
  bias_ = &store.add(name + ".bias", {cout});
  const double bound = 1.0 / std::sqrt(static_cast<double>(cout) * kernel * kernel);
  init_uniform(*weight_, bound, rng);
  init_uniform(*bias_, bound, rng);
}

Tensor ConvTranspose2d::forward(const Tensor& x, Tape* tape) const {
  if (x.c != cin_) throw DomainError(weight_->name + ": expected " + std::to_string(cin_) + " input channels");
  const int oh = (x.h - 1) * stride_ - 2 * pad_ + k_;
  const int ow = (x.w - 1) * stride_ - 2 * pad_ + k_;
  const Geometry g{cout_, x.n, oh, ow, k_, stride_, pad_, x.h, x.w};
  const auto rows = static_cast<Eigen::Index>(g.rows());
  const auto cols = static_cast<Eigen::Index>(g.cols());
  std::vector<float> col(g.rows() * g.cols());
  MapMat(col.data(), rows, cols).noalias() =
      ConstMapMat(weight_->value.data(), cin_, rows).transpose() * ConstMapMat(x.v.data(), cin_, cols);
  Tensor y(cout_, x.n, oh, ow);
  col2im(col.data(), g, y.v.data());
  add_channel_constant(y, bias_->value);
  if (tape) tape->slots[static_cast<std::size_t>(slot_)] = {x};
  return y;
}

Tensor ConvTranspose2d::backward(const Tensor& dy, const Tape& tape) const {
  const Tensor& x = tape.slots[static_cast<std::size_t>(slot_)].at(0);
  const Geometry g{cout_, dy.n, dy.h, dy.w, k_, stride_, pad_, x.h, x.w};
  const auto rows = static_cast<Eigen::Index>(g.rows());
  const auto cols = static_cast<Eigen::Index>(g.cols());
  std::vector<float> col(g.rows() * g.cols());
  im2col(dy.v.data(), g, col.data());
  ConstMapMat dcol(col.data(), rows, cols);
  ConstMapMat X(x.v.data(), cin_, cols);
  MapMat(weight_->grad.data(), cin_, rows).noalias() += X * dcol.transpose();
  accumulate_channel_sums(dy, bias_->grad);
  Tensor dx(x.c, x.n, x.h, x.w);
  MapMat(dx.v.data(), cin_, cols).noalias() = ConstMapMat(weight_->value.data(), cin_, rows) * dcol;
  return dx;
}

// ------------------------------------------------------------- GroupNorm

GroupNorm::GroupNorm(ParamStore& store, const std::string& name, int channels, int groups)
    : channels_(channels), groups_(groups), slot_(store.new_slot()) {
  if (groups < 1 || channels % groups != 0) {
    throw DomainError(name + ": " + std::to_string(channels) + " channels not divisible into " +
                      std::to_string(groups) + " groups");
  }
  gamma_ = &store.add(name + ".weight", {channels});
  beta_ = &store.add(name + ".bias", {channels});
  std::fill(gamma_->value.begin(), gamma_->value.end(), 1.0f);
}

Tensor GroupNorm::forward(const Tensor& x, Tape* tape) const {
  const int per_group = channels_ / groups_;
  const std::size_t plane = x.plane();
  Tensor y(x.c, x.n, x.h, x.w);
  Tensor xhat(x.c, x.n, x.h, x.w);
  Tensor rstd(groups_, x.n, 1, 1);
  for (int b = 0; b < x.n; ++b) {
    for (int g = 0; g < groups_; ++g) {
      double sum = 0.0, sq = 0.0;
      for (int ch = g * per_group; ch < (g + 1) * per_group; ++ch) {
        const float* p = x.channel(ch, b);
        for (std::size_t i = 0; i < plane; ++i) sum += p[i];
      }
      const double count = static_cast<double>(per_group) * plane;
      const double mean = sum / count;
      for (int ch = g * per_group; ch < (g + 1) * per_group; ++ch) {
        const float* p = x.channel(ch, b);
        for (std::size_t i = 0; i < plane; ++i) sq += (p[i] - mean) * (p[i] - mean);
      }
      const double r = 1.0 / std::sqrt(sq / count + kEps);
      *rstd.channel(g, b) = static_cast<float>(r);
      for (int ch = g * per_group; ch < (g + 1) * per_group; ++ch) {
        const float* p = x.channel(ch, b);
        float* xh = xhat.channel(ch, b);
        float* out = y.channel(ch, b);
        const float ga = gamma_->value[static_cast<std::size_t>(ch)];
        const float be = beta_->value[static_cast<std::size_t>(ch)];
        for (std::size_t i = 0; i < plane; ++i) {
          xh[i] = static_cast<float>((p[i] - mean) * r);
          out[i] = ga * xh[i] + be;
        }
      }
    }
  }
  if (tape) tape->slots[static_cast<std::size_t>(slot_)] = {std::move(xhat), std::move(rstd)};
  return y;
}

Tensor GroupNorm::backward(const Tensor& dy, const Tape& tape) const {
  const auto& saved = tape.slots[static_cast<std::size_t>(slot_)];
  const Tensor& xhat = saved.at(0);
  const Tensor& rstd = saved.at(1);
  const int per_group = channels_ / groups_;
  const std::size_t plane = dy.plane();
  Tensor dx(dy.c, dy.n, dy.h, dy.w);
  for (int b = 0; b < dy.n; ++b) {
    for (int g = 0; g < groups_; ++g) {
      double mean_d = 0.0, mean_dx = 0.0;
      for (int ch = g * per_group; ch < (g + 1) * per_group; ++ch) {
        const float* d = dy.channel(ch, b);
        const float* xh = xhat.channel(ch, b);
        const float ga = gamma_->value[static_cast<std::size_t>(ch)];
        double dg = 0.0, db = 0.0;
        for (std::size_t i = 0; i < plane; ++i) {
          dg += static_cast<double>(d[i]) * xh[i];
          db += d[i];
          const double dxh = static_cast<double>(d[i]) * ga;
          mean_d += dxh;
          mean_dx += dxh * xh[i];
        }
        gamma_->grad[static_cast<std::size_t>(ch)] += static_cast<float>(dg);
        beta_->grad[static_cast<std::size_t>(ch)] += static_cast<float>(db);
      }
      const double count = static_cast<double>(per_group) * plane;
      mean_d /= count;
      mean_dx /= count;
      const double r = *rstd.channel(g, b);
      for (int ch = g * per_group; ch < (g + 1) * per_group; ++ch) {
        const float* d = dy.channel(ch, b);
        const float* xh = xhat.channel(ch, b);
        float* out = dx.channel(ch, b);
        const double ga = gamma_->value[static_cast<std::size_t>(ch)];
        for (std::size_t i = 0; i < plane; ++i) {
          out[i] = static_cast<float>(r * (d[i] * ga - mean_d - xh[i] * mean_dx));
        }
      }
    }
  }
  return dx;
}

// ------------------------------------------------------------------ GELU

float gelu(float x) { return 0.5f * x * (1.0f + std::erf(x * static_cast<float>(std::numbers::sqrt2 / 2.0))); }

float gelu_grad(float x) {
  const float cdf = 0.5f * (1.0f + std::erf(x * static_cast<float>(std::numbers::sqrt2 / 2.0)));
  const float pdf = std::exp(-0.5f * x * x) * static_cast<float>(std::numbers::inv_sqrtpi / std::numbers::sqrt2);
  return cdf + x * pdf;
}

Tensor Gelu::forward(const Tensor& x, Tape* tape) const {
  Tensor y(x.c, x.n, x.h, x.w);
  for (std::size_t i = 0; i < x.v.size(); ++i) y.v[i] = gelu(x.v[i]);
  if (tape) tape->slots[static_cast<std::size_t>(slot_)] = {x};
  return y;
}

Tensor Gelu::backward(const Tensor& dy, const Tape& tape) const {
  const Tensor& x = tape.slots[static_cast<std::size_t>(slot_)].at(0);
  Tensor dx(x.c, x.n, x.h, x.w);
  for (std::size_t i = 0; i < x.v.size(); ++i) dx.v[i] = dy.v[i] * gelu_grad(x.v[i]);
  return dx;
}

Matrix gelu(const Matrix& x) {
  Matrix y(x.rows, x.cols);
  for (std::size_t i = 0; i < x.v.size(); ++i) y.v[i] = gelu(x.v[i]);
  return y;
}

Matrix gelu_backward(const Matrix& x, const Matrix& dy) {
  Matrix dx(x.rows, x.cols);
  for (std::size_t i = 0; i < x.v.size(); ++i) dx.v[i] = dy.v[i] * gelu_grad(x.v[i]);
  return dx;
}

// ---------------------------------------------------------------- Linear

Linear::Linear(ParamStore& store, const std::string& name, int in, int out, Rng& rng)
    : in_(in), out_(out), slot_(store.new_slot()) {
  weight_ = &store.add(name + ".weight", {out, in});
  bias_ = &store.add(name + ".bias", {out});
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  init_uniform(*weight_, bound, rng);
  init_uniform(*bias_, bound, rng);
}

Matrix Linear::forward(const Matrix& x, Tape* tape) const {
  if (x.cols != in_) throw DomainError(weight_->name + ": input width mismatch");
  Matrix y(x.rows, out_);
  MapMat(y.v.data(), y.rows, out_).noalias() =
      ConstMapMat(x.v.data(), x.rows, in_) * ConstMapMat(weight_->value.data(), out_, in_).transpose();
  for (int r = 0; r < y.rows; ++r) {
    for (int c = 0; c < out_; ++c) y.v[static_cast<std::size_t>(r) * out_ + c] += bias_->value[static_cast<std::size_t>(c)];
  }
  if (tape) {
    Tensor saved(x.cols, x.rows, 1, 1);
    saved.v = x.v;
    tape->slots[static_cast<std::size_t>(slot_)] = {std::move(saved)};
  }
  return y;
}

Matrix Linear::backward(const Matrix& dy, const Tape& tape) const {
  const Tensor& saved = tape.slots[static_cast<std::size_t>(slot_)].at(0);
  const int rows = saved.n;
  ConstMapMat X(saved.v.data(), rows, in_);
  ConstMapMat dY(dy.v.data(), rows, out_);
  MapMat(weight_->grad.data(), out_, in_).noalias() += dY.transpose() * X;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < out_; ++c) bias_->grad[static_cast<std::size_t>(c)] += dy.v[static_cast<std::size_t>(r) * out_ + c];
  }
  Matrix dx(rows, in_);
  MapMat(dx.v.data(), rows, in_).noalias() = dY * ConstMapMat(weight_->value.data(), out_, in_);
  return dx;
}

// --------------------------------------------------------------- helpers

Matrix timestep_embedding(std::span<const int> t, int dim) {
  const int half = dim / 2;
  Matrix e(static_cast<int>(t.size()), dim);
  for (std::size_t r = 0; r < t.size(); ++r) {
    for (int k = 0; k < half; ++k) {
      const double freq = std::exp(-std::log(10000.0) * k / half);
      const double arg = t[r] * freq;
      e.v[r * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)] = static_cast<float>(std::sin(arg));
      e.v[r * static_cast<std::size_t>(dim) + static_cast<std::size_t>(half + k)] = static_cast<float>(std::cos(arg));
    }
  }
  return e;
}

Tensor concat_channels(std::span<const Tensor* const> parts) {
  Tensor out = *parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const Tensor& p = *parts[i];
    if (p.n != out.n || p.h != out.h || p.w != out.w) throw DomainError("concat_channels: shape mismatch");
    out.c += p.c;
    out.v.insert(out.v.end(), p.v.begin(), p.v.end());
  }
  return out;
}

void add_channel_bias(Tensor& x, const Matrix& bias) {
  const std::size_t plane = x.plane();
  for (int ch = 0; ch < x.c; ++ch) {
    for (int b = 0; b < x.n; ++b) {
      float* p = x.channel(ch, b);
      const float add = bias.v[static_cast<std::size_t>(b) * bias.cols + ch];
      for (std::size_t i = 0; i < plane; ++i) p[i] += add;
    }
  }
}

Matrix sum_spatial(const Tensor& dy) {
  Matrix out(dy.n, dy.c);
  const std::size_t plane = dy.plane();
  for (int ch = 0; ch < dy.c; ++ch) {
    for (int b = 0; b < dy.n; ++b) {
      const float* p = dy.channel(ch, b);
      double s = 0.0;
      for (std::size_t i = 0; i < plane; ++i) s += p[i];
      out.v[static_cast<std::size_t>(b) * dy.c + ch] = static_cast<float>(s);
    }
  }
  return out;
}

}  // namespace simgen::nn
