// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/toolbox/search.hpp"

#include <cstdlib>
#include <fstream>

#include "moldchat/common/error.hpp"
#include "moldchat/common/http.hpp"

namespace moldchat::toolbox {

FixtureSearchProvider::FixtureSearchProvider(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    try {
      regexes_.emplace_back(e.pattern, std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& err) {
      throw ConfigError("bad search fixture pattern '" + e.pattern + "': " + err.what());
    }
  }
}

FixtureSearchProvider FixtureSearchProvider::from_json(const nlohmann::json& doc) {
  const nlohmann::json& list = doc.is_object() && doc.contains("entries") ? doc.at("entries") : doc;
  if (!list.is_array()) throw ConfigError("search fixture must be a list of entries");
  std::vector<Entry> entries;
  for (const auto& j : list) {
    Entry e;
    e.pattern = j.at("pattern").get<std::string>();
    for (const auto& r : j.value("results", nlohmann::json::array())) {
      e.results.push_back({r.value("title", ""), r.value("url", ""), r.value("snippet", "")});
    }
    entries.push_back(std::move(e));
  }
  return FixtureSearchProvider(std::move(entries));
}

FixtureSearchProvider FixtureSearchProvider::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open search fixture " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("search fixture " + path.string() + " is malformed: " + e.what());
  }
}

std::vector<SearchHit> FixtureSearchProvider::search(const std::string& query, std::size_t max_results) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (std::regex_search(query, regexes_[i])) {
      auto hits = entries_[i].results;
      if (hits.size() > max_results) hits.resize(max_results);
      return hits;
    }
  }
  return {};
}

TavilyConfig TavilyConfig::from_env() {
  TavilyConfig c;
  if (const char* v = std::getenv("MOLDCHAT_SEARCH_BASE_URL"); v && *v) c.base_url = v;
  if (const char* v = std::getenv("MOLDCHAT_SEARCH_API_KEY"); v && *v) c.api_key = v;
  return c;
}

std::vector<SearchHit> TavilySearchProvider::search(const std::string& query, std::size_t max_results) {
  if (config_.api_key.empty()) throw ConfigError("search API key is not configured");
  const std::string body =
      nlohmann::json{{"api_key", config_.api_key}, {"query", query}, {"max_results", max_results}}.dump();
  auto resp = http::post_json(config_.base_url, "/search", {}, body, config_.timeout);
  if (resp.status != 200) throw TransportError("search endpoint returned HTTP " + std::to_string(resp.status), 1);
  return parse_reply(resp.body, max_results);
}

std::vector<SearchHit> TavilySearchProvider::parse_reply(const std::string& body, std::size_t max_results) {
  std::vector<SearchHit> hits;
  try {
    auto doc = nlohmann::json::parse(body);
    for (const auto& r : doc.value("results", nlohmann::json::array())) {
      if (hits.size() >= max_results) break;
      hits.push_back({r.value("title", ""), r.value("url", ""), r.value("content", "")});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed search reply: ") + e.what(), body);
  }
  return hits;
}

}  // namespace moldchat::toolbox
