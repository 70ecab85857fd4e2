#include "simgen/diffusion_schedule.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "simgen/errors.hpp"

namespace simgen {

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  const std::size_t n = betas_.size();
  alphas_.resize(n);
  alpha_bars_.resize(n);
  posterior_variances_.resize(n);
  double prod = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    alphas_[i] = 1.0 - betas_[i];
    const double prev = prod;
    prod *= alphas_[i];
    alpha_bars_[i] = prod;
    posterior_variances_[i] = betas_[i] * (1.0 - prev) / (1.0 - prod);
  }
}

NoiseSchedule NoiseSchedule::linear(int num_steps, double beta_start, double beta_end) {
  if (num_steps < 1) throw DomainError("schedule: num_steps must be >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw DomainError("schedule: need 0 < beta_start <= beta_end < 1");
  }
  std::vector<double> betas(static_cast<std::size_t>(num_steps));
  for (int i = 0; i < num_steps; ++i) {
    betas[static_cast<std::size_t>(i)] =
        num_steps == 1 ? beta_start : beta_start + (beta_end - beta_start) * i / (num_steps - 1);
  }
  return NoiseSchedule(std::move(betas));
}

NoiseSchedule NoiseSchedule::standard(int num_steps) {
  if (num_steps < 1) throw DomainError("schedule: num_steps must be >= 1");
  const double scale = 1000.0 / num_steps;
  const double end = std::min(0.02 * scale, 0.999);
  return linear(num_steps, std::min(1e-4 * scale, end), end);
}

std::size_t NoiseSchedule::index(int t) const {
  if (t < 1 || t > num_steps()) {
    throw DomainError("timestep " + std::to_string(t) + " outside [1, " + std::to_string(num_steps()) + "]");
  }
  return static_cast<std::size_t>(t - 1);
}

void NoiseSchedule::write_csv(const std::filesystem::path& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write " + path.string());
  std::fprintf(f, "t,beta,alpha_bar\n");
  for (int t = 1; t <= num_steps(); ++t) std::fprintf(f, "%d,%.17g,%.17g\n", t, beta(t), alpha_bar(t));
  std::fclose(f);
}

FieldBatch q_sample(const FieldBatch& x0, std::span<const int> t, const FieldBatch& eps,
                    const NoiseSchedule& schedule) {
  if (!x0.same_shape(eps)) throw DomainError("q_sample: x0 and eps shapes differ");
  if (t.size() != static_cast<std::size_t>(x0.n)) throw DomainError("q_sample: need one timestep per batch item");
  FieldBatch out = x0;
  const std::size_t per = x0.sample_size();
  for (int b = 0; b < x0.n; ++b) {
    const double ab = schedule.alpha_bar(t[static_cast<std::size_t>(b)]);
    const float s0 = static_cast<float>(std::sqrt(ab));
    const float s1 = static_cast<float>(std::sqrt(1.0 - ab));
    const std::size_t off = static_cast<std::size_t>(b) * per;
    for (std::size_t i = off; i < off + per; ++i) out.data[i] = s0 * x0.data[i] + s1 * eps.data[i];
  }
  return out;
}

FieldBatch q_sample(const FieldBatch& x0, int t, const FieldBatch& eps, const NoiseSchedule& schedule) {
  const std::vector<int> ts(static_cast<std::size_t>(x0.n), t);
  return q_sample(x0, ts, eps, schedule);
}

FieldBatch p_sample_step(const FieldBatch& x_t, int t, const FieldBatch& predicted_eps,
                         const NoiseSchedule& schedule, const FieldBatch& z) {
  if (!x_t.same_shape(predicted_eps) || !x_t.same_shape(z)) throw DomainError("p_sample_step: shape mismatch");
  const double beta = schedule.beta(t);
  const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha(t));
  const double eps_coef = beta / std::sqrt(1.0 - schedule.alpha_bar(t));
  const double sigma = std::sqrt(beta);
  if (t == 1) {
    for (float v : z.data) {
      if (v != 0.0f) throw DomainError("p_sample_step: z must be zero at t = 1");
    }
  }
  FieldBatch out = x_t;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double mean = inv_sqrt_alpha * (x_t.data[i] - eps_coef * predicted_eps.data[i]);
    out.data[i] = static_cast<float>(mean + sigma * z.data[i]);
  }
  return out;
}

}  // namespace simgen
