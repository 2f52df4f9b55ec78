// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "moldchat/diffusion/denoiser.hpp"
#include "moldchat/diffusion/normalizer.hpp"
#include "moldchat/diffusion/params.hpp"
#include "moldchat/diffusion/sampler.hpp"
#include "moldchat/diffusion/schedule.hpp"
#include "moldchat/diffusion/trainer.hpp"

namespace moldchat::diffusion {

/// Everything needed to sample: weights, schedule, scaling and limits.
struct DiffusionModel {
  DenoiserNet net;
  NoiseSchedule schedule;
  Normalizer normalizer;
  MachineLimits limits;

  SamplerContext context() const { return SamplerContext{&net, &schedule, &normalizer, limits}; }
  bool operator==(const DiffusionModel& other) const;
};

/// Binary file: magic "MCDF", version, a JSON header (topology, schedule,
/// normalizer, limits) and the named weight arrays as raw little-endian
/// doubles. Round trips bit-exactly.
/// Schedule, training and limit settings for fit_model.
struct ModelSpec {
  int steps = 1000;
  ScheduleKind kind = ScheduleKind::kLinear;
  double beta_min = 1e-4;
  double beta_max = 0.02;
  TrainConfig train{};
  MachineLimits limits{};

  /// Linear range 1e-4..0.02 stretched by 1000 / steps so that a short chain
  /// still ends near pure noise.
  static ModelSpec scaled_for(int steps);
};

/// Fits the normalizer, builds the schedule and trains the denoiser.
DiffusionModel fit_model(const std::vector<Record>& data, const ModelSpec& spec, TrainReport* report = nullptr,
                         const EpochHook& hook = {});

void save_checkpoint(const DiffusionModel& model, const std::filesystem::path& path);
DiffusionModel load_checkpoint(const std::filesystem::path& path);

}  // namespace moldchat::diffusion
