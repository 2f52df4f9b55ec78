// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moldchat/llm/types.hpp"

namespace moldchat::orchestrator {

/// One entry of the global conversation log.
struct HistoryEntry {
  llm::Role role = llm::Role::kUser;
  std::string text;
  bool operator==(const HistoryEntry&) const = default;
};

/// Global chat history: exactly one (user, assistant) pair per turn. Agent
/// traces never enter it.
class ChatHistory {
 public:
  /// Throws PreconditionError on empty input or report.
  void append(const std::string& user_input, const std::string& report);

  const std::vector<HistoryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// "User: ...\nAssistant: ..." over the last `max_pairs` pairs, or
  /// "(no earlier turns)".
  std::string render(std::size_t max_pairs = 10) const;

  nlohmann::json to_json() const;
  static ChatHistory from_json(const nlohmann::json& doc);

  bool operator==(const ChatHistory&) const = default;

 private:
  std::vector<HistoryEntry> entries_;
};

/// One pipeline stage as seen in the turn trace.
struct StageRecord {
  std::string stage;
  std::string prompt_digest;   // digest of the first model prompt of the stage, if any
  std::string prompt;          // full prompt text, kept only in debug mode
  std::string raw_output;
  llm::Seconds duration{0.0};
  std::vector<std::string> flags;  // e.g. "parse_fallback", "forced_respond"
  nlohmann::json detail;           // stage-specific payload
};

/// Append-only record of everything that happened inside one turn.
class TurnTrace {
 public:
  StageRecord& append(StageRecord record);
  const std::vector<StageRecord>& stages() const { return stages_; }
  /// Last record; throws PreconditionError when the trace is empty.
  StageRecord& back();
  std::vector<std::string> stage_names() const;
  std::size_t count(const std::string& stage) const;
  bool has_flag(const std::string& flag) const;

  nlohmann::json to_json(bool with_durations = true) const;

 private:
  std::vector<StageRecord> stages_;
};

struct ChatTurn {
  std::string user_input;
  std::string language;
  std::string category;  // "injection", "no_injection" or empty when the pipeline did not run
  std::string final_report;
  TurnTrace trace;
  llm::TokenUsage usage;
  llm::Seconds latency{0.0};
  double cost = 0.0;
  bool failed = false;

  nlohmann::json to_json(bool with_durations = true) const;
};

}  // namespace moldchat::orchestrator
