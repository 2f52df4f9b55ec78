// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace moldchat::diffusion {

inline constexpr std::size_t kNumParams = 10;
inline constexpr std::size_t kNumEnv = 4;

/// Field names in storage order.
inline constexpr std::array<std::string_view, kNumParams> kParamKeys = {
    "injection_speed_1",    "injection_speed_2",    "injection_speed_3",    "injection_pressure_1",
    "injection_pressure_2", "injection_pressure_3", "injection_position_1", "injection_position_2",
    "injection_position_3", "hold_time"};

inline constexpr std::array<std::string_view, kNumParams> kParamLabels = {
    "Injection Speed 1",    "Injection Speed 2",    "Injection Speed 3",    "Injection Pressure 1",
    "Injection Pressure 2", "Injection Pressure 3", "Injection Position 1", "Injection Position 2",
    "Injection Position 3", "Hold Time"};

/// Environment fields in the order the network sees them.
inline constexpr std::array<std::string_view, kNumEnv> kEnvKeys = {"factory_temperature", "factory_humidity",
                                                                   "machine_temperature", "machine_humidity"};

enum class ProductClass : int { kGood = 0, kDefective = 1 };

struct EnvCondition {
  ProductClass product_class = ProductClass::kGood;
  double factory_temperature = 0.0;  // Celsius
  double factory_humidity = 0.0;     // percent
  double machine_temperature = 0.0;  // Celsius
  double machine_humidity = 0.0;     // percent

  std::array<double, kNumEnv> env() const {
    return {factory_temperature, factory_humidity, machine_temperature, machine_humidity};
  }
  bool operator==(const EnvCondition&) const = default;
};

/// Plausibility bounds for environment readings; values outside are warned
/// about, not rejected.
struct EnvBounds {
  double temperature_min = -10.0;
  double temperature_max = 60.0;

  /// Names of the readings outside bounds (humidity outside [0, 100]).
  std::vector<std::string> violations(const EnvCondition& c) const;
};

struct ProcessParams {
  std::array<double, kNumParams> values{};

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  bool operator==(const ProcessParams&) const = default;

  nlohmann::json to_json() const;
  /// "Injection Speed 1: 20.00" lines.
  std::string to_text(int decimals = 2) const;
};

/// Per-parameter machine limits applied after denormalization.
struct MachineLimits {
  std::array<double, kNumParams> lo{0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  std::array<double, kNumParams> hi{200, 200, 200, 250, 250, 250, 150, 150, 150, 30};

  /// Clamps in place; returns the names of the clamped parameters.
  std::vector<std::string> clamp(ProcessParams& p) const;
  bool contains(const ProcessParams& p) const;
  bool operator==(const MachineLimits&) const = default;
};

}  // namespace moldchat::diffusion
