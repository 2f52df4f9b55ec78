// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moldchat/llm/types.hpp"

namespace moldchat::llm {

struct BackendReply {
  std::string text;
  TokenUsage usage;
};

/// A chat-completion provider.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendReply complete(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// Scripted backend
// ---------------------------------------------------------------------------

/// One fixture rule. A rule matches when its stage (if any) equals the
/// request's stage tag and every pattern is found (case-insensitive ECMAScript
/// regex search) in the concatenated prompt text.
struct FixtureRule {
  std::optional<std::string> stage;
  std::vector<std::string> patterns;
  std::string response;
  TokenUsage usage;
  /// Set when the rule states no token counts; usage is then estimated as
  /// one token per four bytes of prompt and reply.
  bool estimate_usage = false;
};

/// Ordered rule list; the first matching rule wins.
class ScriptedFixture {
 public:
  ScriptedFixture() = default;
  explicit ScriptedFixture(std::vector<FixtureRule> rules);

  /// Accepts either a bare list of rules or {"rules": [...]}. Each rule is
  /// {stage, pattern (string or list), response, input_tokens, output_tokens}.
  static ScriptedFixture from_json(const nlohmann::json& doc);
  static ScriptedFixture load(const std::filesystem::path& path);
  /// Rules of `other` are appended after this fixture's rules.
  ScriptedFixture merged_with(const ScriptedFixture& other) const;

  const FixtureRule* match(const CompletionRequest& request) const;
  /// Capture groups of every pattern of `rule` against the request, in
  /// pattern order. A response refers to them as {{1}}, {{2}}, ...
  std::vector<std::string> captures(const FixtureRule& rule, const CompletionRequest& request) const;
  std::size_t size() const { return rules_.size(); }
  const std::vector<FixtureRule>& rules() const { return rules_; }

 private:
  struct Compiled {
    FixtureRule rule;
    std::vector<std::regex> regexes;
  };
  std::vector<Compiled> compiled_;
  std::vector<FixtureRule> rules_;
};

/// Deterministic backend: a pure function of (fixture, request).
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(ScriptedFixture fixture) : fixture_(std::move(fixture)) {}

  BackendReply complete(const CompletionRequest& request) override;
  std::string name() const override { return "scripted"; }
  const ScriptedFixture& fixture() const { return fixture_; }

 private:
  const ScriptedFixture fixture_;
};

// ---------------------------------------------------------------------------
// Live backend
// ---------------------------------------------------------------------------

struct HttpBackendConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::string default_model = "gpt-4o";
  int max_attempts = 3;
  std::chrono::seconds timeout{120};
  std::chrono::milliseconds backoff{500};

  /// Reads MOLDCHAT_LLM_BASE_URL, MOLDCHAT_LLM_API_KEY, MOLDCHAT_LLM_MODEL.
  static HttpBackendConfig from_env();
};

/// Speaks the common `/chat/completions` JSON wire format.
class HttpChatBackend final : public Backend {
 public:
  explicit HttpChatBackend(HttpBackendConfig config);

  BackendReply complete(const CompletionRequest& request) override;
  std::string name() const override { return "http"; }

  static nlohmann::json build_body(const CompletionRequest& request, const std::string& model);
  static BackendReply parse_reply(const std::string& body);

 private:
  HttpBackendConfig config_;
};

}  // namespace moldchat::llm
