// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace moldchat::diffusion {

enum class ScheduleKind { kLinear, kCosine };

std::string_view to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(std::string_view name);

/// Variance schedule. Vectors are indexed by t-1 for t = 1..T.
struct NoiseSchedule {
  int T = 0;
  ScheduleKind kind = ScheduleKind::kLinear;
  double beta_min = 0.0;
  double beta_max = 0.0;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;
  std::vector<double> sigma;  // sigma_t^2 = beta_t

  double beta_at(int t) const { return beta[static_cast<std::size_t>(t - 1)]; }
  double alpha_at(int t) const { return alpha[static_cast<std::size_t>(t - 1)]; }
  double alpha_bar_at(int t) const { return alpha_bar[static_cast<std::size_t>(t - 1)]; }
  double sigma_at(int t) const { return sigma[static_cast<std::size_t>(t - 1)]; }

  bool operator==(const NoiseSchedule&) const = default;
};

/// Linear: beta evenly spaced from beta_min to beta_max. Cosine: the
/// squared-cosine alpha_bar curve with offset 0.008, betas clipped to
/// [beta_min, beta_max] and alpha_bar recomputed from the clipped betas.
NoiseSchedule make_schedule(int T, ScheduleKind kind = ScheduleKind::kLinear, double beta_min = 1e-4,
                            double beta_max = 0.02);

/// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps.
Eigen::VectorXd forward_sample(const Eigen::VectorXd& x0, int t, const Eigen::VectorXd& eps,
                               const NoiseSchedule& sched);

/// One step of the per-step forward process:
/// x_t = sqrt(alpha_t) x_{t-1} + sqrt(beta_t) eps.
Eigen::VectorXd forward_step(const Eigen::VectorXd& x_prev, int t, const Eigen::VectorXd& eps,
                             const NoiseSchedule& sched);

}  // namespace moldchat::diffusion
