// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/diffusion/sampler.hpp"

#include <cmath>
#include <random>

#include "moldchat/common/error.hpp"

namespace moldchat::diffusion {

Eigen::VectorXd guidance_combine(const Eigen::VectorXd& eps_cond, const Eigen::VectorXd& eps_uncond, double w) {
  if (eps_cond.size() != eps_uncond.size()) throw PreconditionError("guidance branches differ in dimension");
  return w * eps_cond + (1.0 - w) * eps_uncond;
}

double guidance_combine(double eps_cond, double eps_uncond, double w) { return w * eps_cond + (1.0 - w) * eps_uncond; }

Eigen::VectorXd guided_epsilon(const NoisePredictor& net, const Eigen::VectorXd& x_t, const Conditioning& y, int t,
                               double w) {
  return guidance_combine(net.predict(x_t, t, y), net.predict(x_t, t, std::nullopt), w);
}

Eigen::VectorXd reverse_step(const Eigen::VectorXd& x_t, int t, const Eigen::VectorXd& eps,
                             const NoiseSchedule& sched, const Eigen::VectorXd& z) {
  if (t < 1 || t > sched.T) throw PreconditionError("timestep " + std::to_string(t) + " outside schedule");
  const double coef = sched.beta_at(t) / std::sqrt(1.0 - sched.alpha_bar_at(t));
  Eigen::VectorXd mean = (x_t - coef * eps) / std::sqrt(sched.alpha_at(t));
  if (t > 1) mean += sched.sigma_at(t) * z;
  return mean;
}

Eigen::VectorXd sample_normalized(const NoisePredictor& net, const Conditioning& y, const NoiseSchedule& sched,
                                  double w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr int dim = static_cast<int>(kNumParams);
  Eigen::VectorXd x(dim);
  for (int i = 0; i < dim; ++i) x(i) = normal(rng);
  Eigen::VectorXd z(dim);
  for (int t = sched.T; t >= 1; --t) {
    const Eigen::VectorXd eps = guided_epsilon(net, x, y, t, w);
    if (t > 1) {
      for (int i = 0; i < dim; ++i) z(i) = normal(rng);
    } else {
      z.setZero();
    }
    x = reverse_step(x, t, eps, sched, z);
    if (!x.allFinite()) throw NumericError("sampling produced a non-finite state at step " + std::to_string(t));
  }
  return x;
}

Sample sample(const SamplerContext& ctx, const EnvCondition& y, double w, std::uint64_t seed) {
  if (!ctx.net || !ctx.sched || !ctx.norm) throw ToolUnavailableError("diffusion model is not loaded");
  Conditioning c;
  c.product_class = static_cast<int>(y.product_class);
  c.env = ctx.norm->normalize_env(y);
  Sample s;
  s.params = ctx.norm->denormalize_params(sample_normalized(*ctx.net, c, *ctx.sched, w, seed));
  s.clamped = ctx.limits.clamp(s.params);
  return s;
}

std::uint64_t candidate_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<Sample> generate_candidates(const SamplerContext& ctx, const EnvCondition& y, double w, std::size_t n,
                                        std::uint64_t seed) {
  if (n == 0) throw PreconditionError("candidate count must be at least 1");
  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    try {
      out.push_back(sample(ctx, y, w, candidate_seed(seed, i)));
    } catch (const NumericError& e) {
      throw NumericError("candidate " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace moldchat::diffusion
