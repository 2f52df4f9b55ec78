// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/diffusion/dataset.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "moldchat/common/error.hpp"
#include "moldchat/common/text.hpp"

namespace moldchat::diffusion {

std::string format_dataset(const std::vector<Record>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "class";
  for (auto k : kEnvKeys) out << '\t' << k;
  for (auto k : kParamKeys) out << '\t' << k;
  out << '\n';
  for (const auto& r : rows) {
    out << static_cast<int>(r.condition.product_class);
    for (double v : r.condition.env()) out << '\t' << v;
    for (double v : r.params.values) out << '\t' << v;
    out << '\n';
  }
  return out.str();
}

void save_dataset(const std::vector<Record>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write dataset " + path.string());
  out << format_dataset(rows);
}

std::vector<Record> parse_dataset(const std::string& content) {
  std::vector<Record> rows;
  std::size_t line_no = 0;
  for (const auto& line : text::split_lines(content)) {
    ++line_no;
    const std::string t = text::trim(line);
    if (t.empty() || text::starts_with_icase(t, "class")) continue;
    const auto cells = text::split(t, '\t');
    if (cells.size() != 1 + kNumEnv + kNumParams) {
      throw ValidationError("dataset line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                            " fields, expected " + std::to_string(1 + kNumEnv + kNumParams));
    }
    std::vector<double> v;
    for (const auto& c : cells) {
      try {
        v.push_back(std::stod(c));
      } catch (const std::exception&) {
        throw ValidationError("dataset line " + std::to_string(line_no) + " has non-numeric field '" + c + "'");
      }
      if (!std::isfinite(v.back())) throw ValidationError("dataset line " + std::to_string(line_no) + " is not finite");
    }
    Record r;
    if (v[0] != 0.0 && v[0] != 1.0) throw ValidationError("dataset line " + std::to_string(line_no) + ": class must be 0 or 1");
    r.condition.product_class = v[0] == 0.0 ? ProductClass::kGood : ProductClass::kDefective;
    r.condition.factory_temperature = v[1];
    r.condition.factory_humidity = v[2];
    r.condition.machine_temperature = v[3];
    r.condition.machine_humidity = v[4];
    for (std::size_t i = 0; i < kNumParams; ++i) r.params[i] = v[5 + i];
    rows.push_back(r);
  }
  return rows;
}

std::vector<Record> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read dataset " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str());
}

std::array<double, kNumParams> SyntheticSpec::mean(ProductClass c) const {
  auto m = good_mean;
  if (c == ProductClass::kDefective) {
    for (std::size_t i = 0; i < kNumParams; ++i) m[i] += defect_shift[i];
  }
  return m;
}

std::array<double, kNumParams> SyntheticSpec::stddev() const {
  std::array<double, kNumParams> s{};
  for (std::size_t i = 0; i < kNumParams; ++i) s[i] = std::abs(defect_shift[i]) * relative_std;
  return s;
}

std::vector<Record> make_synthetic(const SyntheticSpec& spec, std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto sd = spec.stddev();
  std::vector<Record> out;
  out.reserve(rows);
  for (std::size_t n = 0; n < rows; ++n) {
    Record r;
    r.condition.product_class = unit(rng) < spec.defective_fraction ? ProductClass::kDefective : ProductClass::kGood;
    r.condition.factory_temperature = spec.temp_lo + (spec.temp_hi - spec.temp_lo) * unit(rng);
    r.condition.factory_humidity = spec.hum_lo + (spec.hum_hi - spec.hum_lo) * unit(rng);
    r.condition.machine_temperature = spec.temp_lo + (spec.temp_hi - spec.temp_lo) * unit(rng);
    r.condition.machine_humidity = spec.hum_lo + (spec.hum_hi - spec.hum_lo) * unit(rng);
    const auto m = spec.mean(r.condition.product_class);
    for (std::size_t i = 0; i < kNumParams; ++i) r.params[i] = m[i] + sd[i] * normal(rng);
    out.push_back(r);
  }
  return out;
}

}  // namespace moldchat::diffusion
