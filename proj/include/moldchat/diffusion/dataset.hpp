// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "moldchat/diffusion/params.hpp"

namespace moldchat::diffusion {

struct Record {
  EnvCondition condition;
  ProcessParams params;
  bool operator==(const Record&) const = default;
};

/// Tab-separated rows: class, the four environment values in kEnvKeys order,
/// then the ten parameters in kParamKeys order. A header line is written and
/// skipped on read.
void save_dataset(const std::vector<Record>& rows, const std::filesystem::path& path);
std::vector<Record> load_dataset(const std::filesystem::path& path);
std::vector<Record> parse_dataset(const std::string& content);
std::string format_dataset(const std::vector<Record>& rows);

/// Two-class synthetic production data with known class-conditional
/// Gaussian parameter means. Environment readings are uniform and
/// independent of the parameters.
struct SyntheticSpec {
  std::array<double, kNumParams> good_mean{25, 22, 30, 125, 135, 130, 44, 32, 28, 1.0};
  /// Added to good_mean for the defective class.
  std::array<double, kNumParams> defect_shift{12, -9, 10, -15, 18, -12, -8, 6, -5, 1.2};
  /// Per-parameter standard deviation as a fraction of |defect_shift|.
  double relative_std = 1.0 / 6.0;
  double defective_fraction = 0.5;
  double temp_lo = 15.0, temp_hi = 35.0;
  double hum_lo = 20.0, hum_hi = 70.0;

  std::array<double, kNumParams> mean(ProductClass c) const;
  std::array<double, kNumParams> stddev() const;
};

std::vector<Record> make_synthetic(const SyntheticSpec& spec, std::size_t rows, std::uint64_t seed);

}  // namespace moldchat::diffusion
