// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "moldchat/diffusion/denoiser.hpp"
#include "moldchat/diffusion/normalizer.hpp"
#include "moldchat/diffusion/params.hpp"
#include "moldchat/diffusion/schedule.hpp"

namespace moldchat::diffusion {

inline constexpr double kDefaultGuidance = 3.0;
inline constexpr std::size_t kDefaultCandidates = 64;

/// w * eps_c + (1 - w) * eps_u.
Eigen::VectorXd guidance_combine(const Eigen::VectorXd& eps_cond, const Eigen::VectorXd& eps_uncond, double w);
double guidance_combine(double eps_cond, double eps_uncond, double w);

/// Guided noise estimate; the unconditional branch uses the null token.
Eigen::VectorXd guided_epsilon(const NoisePredictor& net, const Eigen::VectorXd& x_t, const Conditioning& y, int t,
                               double w = kDefaultGuidance);

/// x_{t-1} = (x_t - beta_t / sqrt(1 - ab_t) * eps) / sqrt(alpha_t) + sigma_t z,
/// with z ignored at t = 1.
Eigen::VectorXd reverse_step(const Eigen::VectorXd& x_t, int t, const Eigen::VectorXd& eps,
                             const NoiseSchedule& sched, const Eigen::VectorXd& z);

/// Runs the reverse chain from x_T ~ N(0, I) and returns the normalized x_0.
Eigen::VectorXd sample_normalized(const NoisePredictor& net, const Conditioning& y, const NoiseSchedule& sched,
                                  double w, std::uint64_t seed);

struct Sample {
  ProcessParams params;
  std::vector<std::string> clamped;  // parameters pulled back to machine limits
};

struct SamplerContext {
  const NoisePredictor* net = nullptr;
  const NoiseSchedule* sched = nullptr;
  const Normalizer* norm = nullptr;
  MachineLimits limits{};
};

/// Denormalized, clamped sample; deterministic per seed.
Sample sample(const SamplerContext& ctx, const EnvCondition& y, double w, std::uint64_t seed);

/// Seed of candidate `index` under master seed `seed` (splitmix64).
std::uint64_t candidate_seed(std::uint64_t seed, std::uint64_t index);

/// n samples, candidate i drawn with candidate_seed(seed, i).
std::vector<Sample> generate_candidates(const SamplerContext& ctx, const EnvCondition& y, double w,
                                        std::size_t n = kDefaultCandidates, std::uint64_t seed = 0);

}  // namespace moldchat::diffusion
