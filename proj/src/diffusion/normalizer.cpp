// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/diffusion/normalizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "moldchat/common/error.hpp"

namespace moldchat::diffusion {

Normalizer Normalizer::fit(const std::vector<Record>& rows) {
  if (rows.empty()) throw ValidationError("cannot fit a normalizer on an empty dataset");
  Normalizer n;
  const double count = static_cast<double>(rows.size());
  for (std::size_t i = 0; i < kNumParams; ++i) {
    double sum = 0.0;
    for (const auto& r : rows) sum += r.params[i];
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto& r : rows) ss += (r.params[i] - mean) * (r.params[i] - mean);
    const double sd = std::sqrt(ss / count);
    if (!(sd > 0.0)) throw ValidationError("parameter '" + std::string(kParamKeys[i]) + "' is constant in the dataset");
    n.param_mean[i] = mean;
    n.param_std[i] = sd;
  }
  for (std::size_t j = 0; j < kNumEnv; ++j) {
    double lo = rows.front().condition.env()[j];
    double hi = lo;
    for (const auto& r : rows) {
      lo = std::min(lo, r.condition.env()[j]);
      hi = std::max(hi, r.condition.env()[j]);
    }
    if (!(hi > lo)) throw ValidationError("environment '" + std::string(kEnvKeys[j]) + "' is constant in the dataset");
    n.env_min[j] = lo;
    n.env_max[j] = hi;
  }
  return n;
}

Eigen::VectorXd Normalizer::normalize_params(const ProcessParams& p) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(kNumParams));
  for (std::size_t i = 0; i < kNumParams; ++i) x(static_cast<Eigen::Index>(i)) = (p[i] - param_mean[i]) / param_std[i];
  return x;
}

ProcessParams Normalizer::denormalize_params(const Eigen::VectorXd& x) const {
  if (x.size() != static_cast<Eigen::Index>(kNumParams)) throw PreconditionError("parameter vector must have 10 entries");
  ProcessParams p;
  for (std::size_t i = 0; i < kNumParams; ++i) p[i] = x(static_cast<Eigen::Index>(i)) * param_std[i] + param_mean[i];
  return p;
}

Eigen::Vector4d Normalizer::normalize_env(const EnvCondition& c) const {
  const auto env = c.env();
  Eigen::Vector4d e;
  for (std::size_t j = 0; j < kNumEnv; ++j) {
    e(static_cast<Eigen::Index>(j)) = (env[j] - env_min[j]) / (env_max[j] - env_min[j]);
  }
  return e;
}

std::array<double, kNumEnv> Normalizer::denormalize_env(const Eigen::Vector4d& e) const {
  std::array<double, kNumEnv> out{};
  for (std::size_t j = 0; j < kNumEnv; ++j) {
    out[j] = e(static_cast<Eigen::Index>(j)) * (env_max[j] - env_min[j]) + env_min[j];
  }
  return out;
}

}  // namespace moldchat::diffusion
