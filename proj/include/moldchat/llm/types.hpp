// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace moldchat::llm {

enum class Role { kSystem, kUser, kAssistant };

std::string_view to_string(Role role);

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;

  static ChatMessage system(std::string text) { return {Role::kSystem, std::move(text)}; }
  static ChatMessage user(std::string text) { return {Role::kUser, std::move(text)}; }
  static ChatMessage assistant(std::string text) { return {Role::kAssistant, std::move(text)}; }
};

/// Identifiers of the structured-output schemas the gateway knows how to parse.
enum class SchemaId { kTranslation, kCategory, kPlan, kDecision, kDiffusionInputs, kJudgeScore };

std::string_view to_string(SchemaId id);
SchemaId schema_from_string(std::string_view name);

struct CompletionRequest {
  std::string model_id;  // empty: gateway default
  std::vector<ChatMessage> messages;
  double temperature = 0.7;
  std::optional<SchemaId> schema_id;
  /// Pipeline stage issuing the call ("classifier", "planner", ...). Used by
  /// scripted fixtures and for metering.
  std::string stage_tag;
};

/// Concatenation of all message contents, the text scripted rules match on.
std::string prompt_text(const CompletionRequest& request);

struct TokenUsage {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;

  TokenUsage& operator+=(const TokenUsage& other) {
    input_tokens += other.input_tokens;
    output_tokens += other.output_tokens;
    return *this;
  }
  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

using Seconds = std::chrono::duration<double>;

/// One finished model call.
struct Completion {
  std::string text;
  TokenUsage usage;
  Seconds elapsed{0.0};
  double cost = 0.0;
  std::string model_id;
  std::string stage_tag;
  std::string prompt_digest;
};

}  // namespace moldchat::llm
