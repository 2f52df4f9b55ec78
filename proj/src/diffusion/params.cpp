// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/diffusion/params.hpp"

#include <algorithm>

#include "moldchat/common/text.hpp"

namespace moldchat::diffusion {

std::vector<std::string> EnvBounds::violations(const EnvCondition& c) const {
  std::vector<std::string> out;
  auto temp = [&](double v, const char* name) {
    if (v < temperature_min || v > temperature_max) out.emplace_back(name);
  };
  auto hum = [&](double v, const char* name) {
    if (v < 0.0 || v > 100.0) out.emplace_back(name);
  };
  temp(c.machine_temperature, "machine temperature");
  hum(c.machine_humidity, "machine humidity");
  temp(c.factory_temperature, "factory temperature");
  hum(c.factory_humidity, "factory humidity");
  return out;
}

nlohmann::json ProcessParams::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < kNumParams; ++i) j[std::string(kParamKeys[i])] = values[i];
  return j;
}

std::string ProcessParams::to_text(int decimals) const {
  std::string out;
  for (std::size_t i = 0; i < kNumParams; ++i) {
    if (i) out += '\n';
    out += std::string(kParamLabels[i]) + ": " + text::fixed(values[i], decimals);
  }
  return out;
}

std::vector<std::string> MachineLimits::clamp(ProcessParams& p) const {
  std::vector<std::string> clamped;
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const double v = std::clamp(p[i], lo[i], hi[i]);
    if (v != p[i]) {
      clamped.emplace_back(kParamLabels[i]);
      p[i] = v;
    }
  }
  return clamped;
}

bool MachineLimits::contains(const ProcessParams& p) const {
  for (std::size_t i = 0; i < kNumParams; ++i) {
    if (!(p[i] >= lo[i] && p[i] <= hi[i])) return false;
  }
  return true;
}

}  // namespace moldchat::diffusion
