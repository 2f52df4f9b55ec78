// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "moldchat/diffusion/dataset.hpp"
#include "moldchat/diffusion/denoiser.hpp"
#include "moldchat/diffusion/normalizer.hpp"
#include "moldchat/diffusion/schedule.hpp"

namespace moldchat::diffusion {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 64;
  double learning_rate = 0.02;
  double momentum = 0.9;
  /// Learning rate decays linearly to this fraction over training.
  double final_lr_fraction = 0.1;
  /// Global gradient-norm clip; 0 disables.
  double grad_clip = 1.0;
  double cond_drop_prob = 0.1;
  /// Exponential moving average of the weights; the averaged net is
  /// returned. 0 disables.
  double ema_decay = 0.999;
  std::uint64_t seed = 0;
  Topology topology{};

  /// Throws PreconditionError when a field is out of range.
  void validate() const;
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean per-element squared error
  std::uint64_t conditional_examples = 0;
  std::uint64_t null_examples = 0;
  std::uint64_t steps = 0;
};

/// Per-epoch callback (epoch index from 1, mean loss).
using EpochHook = std::function<void(int, double)>;

/// Classifier-free training on the simplified objective
/// |eps - eps_theta(sqrt(ab_t) x0 + sqrt(1 - ab_t) eps, y, t)|^2 with y
/// replaced by the null token with probability cond_drop_prob.
DenoiserNet train(const std::vector<Record>& data, const Normalizer& norm, const NoiseSchedule& sched,
                  const TrainConfig& config, TrainReport* report = nullptr, const EpochHook& hook = {});

}  // namespace moldchat::diffusion
