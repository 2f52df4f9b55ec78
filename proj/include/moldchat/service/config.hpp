// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace moldchat::service {

/// Runtime configuration shared by the service and the CLI. Empty paths mean
/// "not provided"; the matching tool is then registered as unavailable.
struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string backend = "scripted";  // "scripted" or "live"
  std::vector<std::filesystem::path> fixtures;
  std::string model;  // live model id; empty uses MOLDCHAT_LLM_MODEL or the backend default
  std::filesystem::path prompts_dir;
  std::filesystem::path direction_csv;
  std::filesystem::path priority_csv;
  std::filesystem::path manual_pages;
  std::filesystem::path table_store;   // prebuilt store, used instead of the CSVs when set
  std::filesystem::path manual_store;  // prebuilt store, used instead of manual_pages when set
  std::filesystem::path checkpoint;
  std::filesystem::path surrogate;
  std::filesystem::path price_table;
  std::string search_provider = "fixture";  // "fixture", "tavily" or "none"
  std::filesystem::path search_fixture;
  std::string embedder = "hash";
  std::filesystem::path log_dir;
  std::string auth_token;
  int replan_cap = 5;
  int react_cap = 6;
  std::uint64_t diffusion_seed = 0;
  bool debug_prompts = false;

  /// Relative paths are resolved against `base_dir`.
  static ServiceConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
  static ServiceConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// Overrides every key from MOLDCHAT_<KEY> (upper case) when set. Lists
  /// are comma-separated.
  void apply_env();

  /// Every configured path that does not exist, as "key: path".
  std::vector<std::string> missing_items() const;
};

}  // namespace moldchat::service
