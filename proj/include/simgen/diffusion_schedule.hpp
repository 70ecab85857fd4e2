#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "simgen/field.hpp"

namespace simgen {

// Per-timestep DDPM tables. Timesteps are 1-based in every public
// accessor (t in [1, T]); storage is 0-based.
class NoiseSchedule {
 public:
  static NoiseSchedule linear(int num_steps, double beta_start, double beta_end);

  // Linear schedule with the 1e-4 .. 0.02 endpoints defined for 1000 steps,
  // rescaled by 1000 / num_steps so that the terminal signal level stays
  // negligible at shorter chains.
  static NoiseSchedule standard(int num_steps = 250);

  int num_steps() const { return static_cast<int>(betas_.size()); }
  double beta(int t) const { return betas_[index(t)]; }
  double alpha(int t) const { return alphas_[index(t)]; }
  double alpha_bar(int t) const { return alpha_bars_[index(t)]; }
  double posterior_variance(int t) const { return posterior_variances_[index(t)]; }

  const std::vector<double>& betas() const { return betas_; }
  const std::vector<double>& alpha_bars() const { return alpha_bars_; }

  void write_csv(const std::filesystem::path& path) const;

 private:
  explicit NoiseSchedule(std::vector<double> betas);
  std::size_t index(int t) const;

  std::vector<double> betas_;
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;
  std::vector<double> posterior_variances_;
};

// sqrt(abar_t) * x0 + sqrt(1 - abar_t) * eps, with one timestep per batch item.
FieldBatch q_sample(const FieldBatch& x0, std::span<const int> t, const FieldBatch& eps,
                    const NoiseSchedule& schedule);
FieldBatch q_sample(const FieldBatch& x0, int t, const FieldBatch& eps, const NoiseSchedule& schedule);

// One ancestral step x_t -> x_{t-1} with sigma_t^2 = beta_t. z must be all
// zeros at t = 1.
FieldBatch p_sample_step(const FieldBatch& x_t, int t, const FieldBatch& predicted_eps,
                         const NoiseSchedule& schedule, const FieldBatch& z);

}  // namespace simgen
