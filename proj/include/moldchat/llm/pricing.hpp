// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "moldchat/llm/types.hpp"

namespace moldchat::llm {

struct ModelPrice {
  double per_input_token = 0.0;
  double per_output_token = 0.0;
};

/// Per-model token prices. File form: {"model": {"in": 2.5e-6, "out": 1e-5}}.
class PriceTable {
 public:
  PriceTable() = default;

  void set(const std::string& model_id, ModelPrice price);
  bool contains(const std::string& model_id) const;
  const ModelPrice& at(const std::string& model_id) const;
  const std::map<std::string, ModelPrice>& entries() const { return prices_; }

  static PriceTable from_json(const nlohmann::json& doc);
  static PriceTable load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

 private:
  std::map<std::string, ModelPrice> prices_;
};

/// input_tokens * p_in + output_tokens * p_out. Throws ConfigError for an
/// unknown model.
double cost_of(const TokenUsage& usage, const std::string& model_id, const PriceTable& table);

}  // namespace moldchat::llm
