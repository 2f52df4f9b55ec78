// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "moldchat/diffusion/dataset.hpp"

namespace moldchat::diffusion {

/// Parameters are z-scored; environment readings are min-max scaled to [0, 1].
struct Normalizer {
  std::array<double, kNumParams> param_mean{};
  std::array<double, kNumParams> param_std{};
  std::array<double, kNumEnv> env_min{};
  std::array<double, kNumEnv> env_max{};

  /// Throws ValidationError for an empty dataset or a constant column.
  static Normalizer fit(const std::vector<Record>& rows);

  Eigen::VectorXd normalize_params(const ProcessParams& p) const;
  ProcessParams denormalize_params(const Eigen::VectorXd& x) const;
  Eigen::Vector4d normalize_env(const EnvCondition& c) const;
  std::array<double, kNumEnv> denormalize_env(const Eigen::Vector4d& e) const;

  bool operator==(const Normalizer&) const = default;
};

}  // namespace moldchat::diffusion
