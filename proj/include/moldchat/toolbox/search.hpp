// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace moldchat::toolbox {

inline constexpr std::size_t kMaxSearchResults = 5;

struct SearchHit {
  std::string title;
  std::string url;
  std::string snippet;
  bool operator==(const SearchHit&) const = default;
};

/// A web-search provider. Transport failures throw TransportError.
class SearchProvider {
 public:
  virtual ~SearchProvider() = default;
  virtual std::vector<SearchHit> search(const std::string& query, std::size_t max_results) = 0;
  virtual std::string name() const = 0;
};

/// Canned results keyed by a case-insensitive regex over the query. The
/// first matching entry wins; no match yields no results.
class FixtureSearchProvider final : public SearchProvider {
 public:
  struct Entry {
    std::string pattern;
    std::vector<SearchHit> results;
  };

  explicit FixtureSearchProvider(std::vector<Entry> entries);
  /// List of {pattern, results: [{title, url, snippet}]}.
  static FixtureSearchProvider from_json(const nlohmann::json& doc);
  static FixtureSearchProvider load(const std::filesystem::path& path);

  std::vector<SearchHit> search(const std::string& query, std::size_t max_results) override;
  std::string name() const override { return "fixture"; }

 private:
  std::vector<Entry> entries_;
  std::vector<std::regex> regexes_;
};

struct TavilyConfig {
  std::string base_url = "https://api.tavily.com";
  std::string api_key;
  std::chrono::seconds timeout{20};

  /// Reads MOLDCHAT_SEARCH_BASE_URL and MOLDCHAT_SEARCH_API_KEY.
  static TavilyConfig from_env();
};

class TavilySearchProvider final : public SearchProvider {
 public:
  explicit TavilySearchProvider(TavilyConfig config) : config_(std::move(config)) {}

  std::vector<SearchHit> search(const std::string& query, std::size_t max_results) override;
  std::string name() const override { return "tavily"; }

  static std::vector<SearchHit> parse_reply(const std::string& body, std::size_t max_results);

 private:
  TavilyConfig config_;
};

}  // namespace moldchat::toolbox
