// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/diffusion/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "moldchat/common/error.hpp"

namespace moldchat::diffusion {

std::string_view to_string(ScheduleKind kind) { return kind == ScheduleKind::kLinear ? "linear" : "cosine"; }

ScheduleKind schedule_kind_from_string(std::string_view name) {
  if (name == "linear") return ScheduleKind::kLinear;
  if (name == "cosine") return ScheduleKind::kCosine;
  throw ConfigError("unknown schedule kind '" + std::string(name) + "'");
}

NoiseSchedule make_schedule(int T, ScheduleKind kind, double beta_min, double beta_max) {
  if (T < 1) throw PreconditionError("schedule needs T >= 1");
  if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0)) {
    throw PreconditionError("schedule bounds must satisfy 0 < beta_min <= beta_max < 1");
  }
  NoiseSchedule s;
  s.T = T;
  s.kind = kind;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  s.beta.resize(static_cast<std::size_t>(T));

  if (kind == ScheduleKind::kLinear) {
    for (int t = 1; t <= T; ++t) {
      const double frac = T == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(T - 1);
      s.beta[static_cast<std::size_t>(t - 1)] = beta_min + (beta_max - beta_min) * frac;
    }
  } else {
    constexpr double offset = 0.008;
    auto f = [&](double t) {
      const double c = std::cos((t / T + offset) / (1.0 + offset) * std::numbers::pi / 2.0);
      return c * c;
    };
    for (int t = 1; t <= T; ++t) {
      const double b = 1.0 - f(t) / f(t - 1);
      s.beta[static_cast<std::size_t>(t - 1)] = std::clamp(b, beta_min, beta_max);
    }
  }

  double prod = 1.0;
  for (double b : s.beta) {
    s.alpha.push_back(1.0 - b);
    prod *= 1.0 - b;
    s.alpha_bar.push_back(prod);
    s.sigma.push_back(std::sqrt(b));
  }
  return s;
}

Eigen::VectorXd forward_sample(const Eigen::VectorXd& x0, int t, const Eigen::VectorXd& eps,
                               const NoiseSchedule& sched) {
  if (t < 1 || t > sched.T) {
    throw PreconditionError("timestep " + std::to_string(t) + " outside 1.." + std::to_string(sched.T));
  }
  if (x0.size() != eps.size()) throw PreconditionError("x0 and eps differ in dimension");
  const double ab = sched.alpha_bar_at(t);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

Eigen::VectorXd forward_step(const Eigen::VectorXd& x_prev, int t, const Eigen::VectorXd& eps,
                             const NoiseSchedule& sched) {
  if (t < 1 || t > sched.T) {
    throw PreconditionError("timestep " + std::to_string(t) + " outside 1.." + std::to_string(sched.T));
  }
  return std::sqrt(sched.alpha_at(t)) * x_prev + std::sqrt(sched.beta_at(t)) * eps;
}

}  // namespace moldchat::diffusion
