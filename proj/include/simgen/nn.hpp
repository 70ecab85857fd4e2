#pragma once

// Minimal layer set for the denoiser: forward passes record what their
// backward passes need into a Tape slot owned by the caller, so inference
// never mutates the network.
//
// Activations use channel-major layout (C, N, H, W): a convolution is then a
// single GEMM over all batch items and channel concatenation is a plain
// append.

#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "simgen/rng.hpp"

namespace simgen::nn {

struct Tensor {
  int c = 0;
  int n = 0;
  int h = 0;
  int w = 0;
  std::vector<float> v;

  Tensor() = default;
  Tensor(int c_, int n_, int h_, int w_, float fill = 0.0f)
      : c(c_), n(n_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * n_ * h_ * w_, fill) {}

  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  std::size_t size() const { return v.size(); }
  float* channel(int ch, int b) { return v.data() + (static_cast<std::size_t>(ch) * n + b) * plane(); }
  const float* channel(int ch, int b) const { return v.data() + (static_cast<std::size_t>(ch) * n + b) * plane(); }
};

struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<float> value;
  std::vector<float> grad;

  std::size_t numel() const { return value.size(); }
};

class ParamStore {
 public:
  Param& add(std::string name, std::vector<int> shape);
  std::deque<Param>& params() { return params_; }
  const std::deque<Param>& params() const { return params_; }
  std::size_t total() const;
  void zero_grad();
  int new_slot() { return slots_++; }
  int slot_count() const { return slots_; }

 private:
  std::deque<Param> params_;
  int slots_ = 0;
};

struct Tape {
  std::vector<std::vector<Tensor>> slots;
  explicit Tape(int n = 0) : slots(static_cast<std::size_t>(n)) {}
};

class Conv2d {
 public:
  Conv2d(ParamStore& store, const std::string& name, int cin, int cout, int kernel, int stride, int pad, Rng& rng,
         bool zero_init = false);
  Tensor forward(const Tensor& x, Tape* tape) const;
  Tensor backward(const Tensor& dy, const Tape& tape) const;
  int out_size(int in) const { return (in + 2 * pad_ - k_) / stride_ + 1; }

 private:
  Param* weight_;
  Param* bias_;
  int cin_, cout_, k_, stride_, pad_;
  int slot_;
};

// Weight layout (cin, cout, k, k), output size (in - 1) * stride - 2 * pad + k.
class ConvTranspose2d {
 public:
  ConvTranspose2d(ParamStore& store, const std::string& name, int cin, int cout, int kernel, int stride, int pad,
                  Rng& rng);
  Tensor forward(const Tensor& x, Tape* tape) const;
  Tensor backward(const Tensor& dy, const Tape& tape) const;

 private:
  Param* weight_;
  Param* bias_;
  int cin_, cout_, k_, stride_, pad_;
  int slot_;
};

class GroupNorm {
 public:
  GroupNorm(ParamStore& store, const std::string& name, int channels, int groups);
  Tensor forward(const Tensor& x, Tape* tape) const;
  Tensor backward(const Tensor& dy, const Tape& tape) const;
  int groups() const { return groups_; }

 private:
  Param* gamma_;
  Param* beta_;
  int channels_, groups_;
  int slot_;
  static constexpr double kEps = 1e-5;
};

// Exact (erf) GELU.
class Gelu {
 public:
  explicit Gelu(ParamStore& store) : slot_(store.new_slot()) {}
  Tensor forward(const Tensor& x, Tape* tape) const;
  Tensor backward(const Tensor& dy, const Tape& tape) const;

 private:
  int slot_;
};

// Row-major batch of vectors: rows = batch items.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<float> v;
  Matrix() = default;
  Matrix(int r, int c, float fill = 0.0f) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}
};

class Linear {
 public:
  Linear(ParamStore& store, const std::string& name, int in, int out, Rng& rng);
  Matrix forward(const Matrix& x, Tape* tape) const;
  Matrix backward(const Matrix& dy, const Tape& tape) const;

 private:
  Param* weight_;
  Param* bias_;
  int in_, out_;
  int slot_;
};

float gelu(float x);
float gelu_grad(float x);

Matrix gelu(const Matrix& x);
Matrix gelu_backward(const Matrix& x, const Matrix& dy);

// Sinusoidal embedding: [sin(t w_k), cos(t w_k)], w_k = 10000^(-k / (dim/2)).
Matrix timestep_embedding(std::span<const int> t, int dim);

Tensor concat_channels(std::span<const Tensor* const> parts);

// Adds bias[b][ch] to every pixel of channel ch of batch item b.
void add_channel_bias(Tensor& x, const Matrix& bias);
Matrix sum_spatial(const Tensor& dy);

}  // namespace simgen::nn
