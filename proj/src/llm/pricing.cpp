// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/llm/pricing.hpp"

#include <fstream>

#include "moldchat/common/error.hpp"

namespace moldchat::llm {

void PriceTable::set(const std::string& model_id, ModelPrice price) {
  if (price.per_input_token < 0.0 || price.per_output_token < 0.0) {
    throw ValidationError("negative token price for model '" + model_id + "'");
  }
  prices_[model_id] = price;
}

bool PriceTable::contains(const std::string& model_id) const { return prices_.count(model_id) > 0; }

const ModelPrice& PriceTable::at(const std::string& model_id) const {
  auto it = prices_.find(model_id);
  if (it == prices_.end()) throw ConfigError("no price configured for model '" + model_id + "'");
  return it->second;
}

PriceTable PriceTable::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("price table must be an object keyed by model id");
  PriceTable table;
  for (const auto& [model, entry] : doc.items()) {
    if (!entry.is_object() || !entry.contains("in") || !entry.contains("out")) {
      throw ConfigError("price entry for '" + model + "' needs 'in' and 'out'");
    }
    table.set(model, ModelPrice{entry.at("in").get<double>(), entry.at("out").get<double>()});
  }
  return table;
}

PriceTable PriceTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open price table " + path.string());
  auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("price table " + path.string() + " is not valid JSON");
  return from_json(doc);
}

nlohmann::json PriceTable::to_json() const {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [model, p] : prices_) {
    doc[model] = {{"in", p.per_input_token}, {"out", p.per_output_token}};
  }
  return doc;
}

double cost_of(const TokenUsage& usage, const std::string& model_id, const PriceTable& table) {
  const ModelPrice& p = table.at(model_id);
  return static_cast<double>(usage.input_tokens) * p.per_input_token +
         static_cast<double>(usage.output_tokens) * p.per_output_token;
}

}  // namespace moldchat::llm
