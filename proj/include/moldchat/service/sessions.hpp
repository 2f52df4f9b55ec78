// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moldchat/orchestrator/pipeline.hpp"

namespace moldchat::service {

/// A finished turn as served by the API and stored in the session log.
struct TurnRecord {
  std::int64_t turn_id = 0;
  std::string session_id;
  std::string created_at;
  bool appended = false;  // whether the turn entered the chat history
  nlohmann::json turn;    // ChatTurn::to_json()

  nlohmann::json summary() const;
  nlohmann::json to_json() const;
  static TurnRecord from_json(const nlohmann::json& j);
};

struct SessionInfo {
  std::string id;
  std::string created_at;
  std::size_t turns = 0;
  bool busy = false;
};

enum class ChatStatus { kOk, kNotFound, kConflict };

struct ChatOutcome {
  ChatStatus status = ChatStatus::kOk;
  std::optional<TurnRecord> record;
};

/// Sessions with per-session turn serialization. With a log directory every
/// session is an append-only <id>.jsonl file that is replayed at startup.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path log_dir = {});

  SessionInfo create();
  std::vector<SessionInfo> list() const;
  bool exists(const std::string& id) const;

  /// Runs one turn. Returns kConflict without waiting when the session is
  /// already running a turn.
  ChatOutcome chat(const std::string& session_id, const std::string& message,
                   const orchestrator::Pipeline& pipeline);

  /// Finished turns in order plus a pending entry for a turn in flight.
  std::optional<nlohmann::json> turns(const std::string& session_id) const;
  std::optional<TurnRecord> turn(std::int64_t turn_id) const;
  std::optional<orchestrator::ChatHistory> history(const std::string& session_id) const;

  /// Rebuilds a history from a session log file.
  static orchestrator::ChatHistory replay(const std::filesystem::path& log_file);

 private:
  struct Session {
    SessionInfo info;
    orchestrator::ChatHistory history;
    std::vector<std::int64_t> turn_ids;
    std::optional<std::string> pending_input;
    std::mutex turn_mu;
  };

  void load_logs();
  void append_log(const std::string& session_id, const nlohmann::json& line) const;
  std::shared_ptr<Session> find(const std::string& id) const;

  std::filesystem::path log_dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::int64_t, TurnRecord> turns_;
  std::int64_t next_session_ = 1;
  std::int64_t next_turn_ = 1;
};

/// Current UTC time as ISO 8601 with seconds.
std::string utc_now();

}  // namespace moldchat::service
