// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/service/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <stdexcept>

#include "moldchat/common/error.hpp"
#include "moldchat/common/text.hpp"

namespace moldchat::service {

namespace {

namespace fs = std::filesystem;

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

struct PathField {
  const char* key;
  fs::path ServiceConfig::*member;
};

constexpr PathField kPathFields[] = {
    {"prompts_dir", &ServiceConfig::prompts_dir},   {"direction_csv", &ServiceConfig::direction_csv},
    {"priority_csv", &ServiceConfig::priority_csv}, {"manual_pages", &ServiceConfig::manual_pages},
    {"table_store", &ServiceConfig::table_store},   {"manual_store", &ServiceConfig::manual_store},
    {"checkpoint", &ServiceConfig::checkpoint},     {"surrogate", &ServiceConfig::surrogate},
    {"price_table", &ServiceConfig::price_table},   {"search_fixture", &ServiceConfig::search_fixture},
    {"log_dir", &ServiceConfig::log_dir}};

struct StringField {
  const char* key;
  std::string ServiceConfig::*member;
};

constexpr StringField kStringFields[] = {{"host", &ServiceConfig::host},
                                         {"backend", &ServiceConfig::backend},
                                         {"model", &ServiceConfig::model},
                                         {"search_provider", &ServiceConfig::search_provider},
                                         {"embedder", &ServiceConfig::embedder},
                                         {"auth_token", &ServiceConfig::auth_token}};

std::string env_name(std::string_view key) {
  std::string out = "MOLDCHAT_";
  for (char c : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

const char* env(std::string_view key) {
  const char* v = std::getenv(env_name(key).c_str());
  return (v != nullptr && *v != '\0') ? v : nullptr;
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    int out = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " must be an integer, got '" + v + "'");
  }
}

}  // namespace

ServiceConfig ServiceConfig::from_json(const nlohmann::json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("service config must be an object");
  ServiceConfig c;
  try {
    for (const auto& f : kStringFields) {
      if (doc.contains(f.key)) c.*f.member = doc.at(f.key).get<std::string>();
    }
    for (const auto& f : kPathFields) {
      if (doc.contains(f.key)) c.*f.member = resolve(doc.at(f.key).get<std::string>(), base_dir);
    }
    if (doc.contains("fixtures")) {
      if (!doc.at("fixtures").is_array()) throw ConfigError("config key fixtures must be a list of paths");
      for (const auto& p : doc.at("fixtures")) c.fixtures.push_back(resolve(p.get<std::string>(), base_dir));
    }
    c.port = doc.value("port", c.port);
    c.replan_cap = doc.value("replan_cap", c.replan_cap);
    c.react_cap = doc.value("react_cap", c.react_cap);
    c.diffusion_seed = doc.value("diffusion_seed", c.diffusion_seed);
    c.debug_prompts = doc.value("debug_prompts", c.debug_prompts);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("service config has a wrongly typed key: ") + e.what());
  }
  static const std::set<std::string> known = [] {
    std::set<std::string> k{"fixtures", "port", "replan_cap", "react_cap", "diffusion_seed", "debug_prompts"};
    for (const auto& f : kStringFields) k.insert(f.key);
    for (const auto& f : kPathFields) k.insert(f.key);
    return k;
  }();
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw ConfigError("unknown service config key '" + key + "'");
  }
  return c;
}

ServiceConfig ServiceConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open service config " + path.string());
  try {
    return from_json(nlohmann::json::parse(in), path.parent_path());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("service config " + path.string() + " is not valid JSON: " + e.what());
  }
}

nlohmann::json ServiceConfig::to_json() const {
  nlohmann::json j;
  for (const auto& f : kStringFields) j[f.key] = this->*f.member;
  for (const auto& f : kPathFields) j[f.key] = (this->*f.member).string();
  j["fixtures"] = nlohmann::json::array();
  for (const auto& p : fixtures) j["fixtures"].push_back(p.string());
  j["port"] = port;
  j["replan_cap"] = replan_cap;
  j["react_cap"] = react_cap;
  j["diffusion_seed"] = diffusion_seed;
  j["debug_prompts"] = debug_prompts;
  return j;
}

void ServiceConfig::apply_env() {
  for (const auto& f : kStringFields) {
    if (const char* v = env(f.key)) this->*f.member = v;
  }
  for (const auto& f : kPathFields) {
    if (const char* v = env(f.key)) this->*f.member = v;
  }
  if (const char* v = env("fixtures")) {
    fixtures.clear();
    for (const auto& p : text::split(v, ',')) {
      if (!text::trim(p).empty()) fixtures.emplace_back(text::trim(p));
    }
  }
  if (const char* v = env("port")) port = to_int("port", v);
  if (const char* v = env("replan_cap")) replan_cap = to_int("replan_cap", v);
  if (const char* v = env("react_cap")) react_cap = to_int("react_cap", v);
  if (const char* v = env("diffusion_seed")) {
    const std::string value = v;
    const std::string message = "config key diffusion_seed must be a non-negative integer, got '" + value + "'";
    if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) throw ConfigError(message);
    try {
      diffusion_seed = static_cast<std::uint64_t>(std::stoull(value));
    } catch (const std::out_of_range&) {
      throw ConfigError(message);
    }
  }
  if (const char* v = env("debug_prompts")) debug_prompts = text::iequals(v, "1") || text::iequals(v, "true");
}

std::vector<std::string> ServiceConfig::missing_items() const {
  std::vector<std::string> out;
  for (const auto& f : kPathFields) {
    const fs::path& p = this->*f.member;
    if (std::string_view(f.key) == "log_dir") continue;  // created on demand
    if (!p.empty() && !fs::exists(p)) out.push_back(std::string(f.key) + ": " + p.string());
  }
  for (const auto& p : fixtures) {
    if (!fs::exists(p)) out.push_back("fixtures: " + p.string());
  }
  if (backend == "scripted" && fixtures.empty()) out.emplace_back("fixtures: (none configured for the scripted backend)");
  if (backend != "scripted" && backend != "live") out.push_back("backend: unknown value '" + backend + "'");
  if (search_provider != "fixture" && search_provider != "tavily" && search_provider != "none") {
    out.push_back("search_provider: unknown value '" + search_provider + "'");
  }
  return out;
}

}  // namespace moldchat::service
