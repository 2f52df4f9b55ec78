// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/service/sessions.hpp"

#include <chrono>
#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>

#include <spdlog/spdlog.h>

#include "moldchat/common/error.hpp"

namespace moldchat::service {

namespace fs = std::filesystem;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json TurnRecord::summary() const {
  return {{"turn_id", turn_id},
          {"user_input", turn.value("user_input", "")},
          {"reply", turn.value("final_report", "")},
          {"language", turn.value("language", "")},
          {"category", turn.value("category", "")},
          {"status", turn.value("failed", false) ? "failed" : "done"},
          {"created_at", created_at},
          {"latency_s", turn.value("latency_s", 0.0)},
          {"cost", turn.value("cost", 0.0)}};
}

nlohmann::json TurnRecord::to_json() const {
  return {{"type", "turn"},      {"turn_id", turn_id}, {"session_id", session_id},
          {"created_at", created_at}, {"appended", appended}, {"turn", turn}};
}

TurnRecord TurnRecord::from_json(const nlohmann::json& j) {
  TurnRecord r;
  r.turn_id = j.at("turn_id").get<std::int64_t>();
  r.session_id = j.at("session_id").get<std::string>();
  r.created_at = j.value("created_at", "");
  r.appended = j.at("appended").get<bool>();
  r.turn = j.at("turn");
  return r;
}

SessionStore::SessionStore(fs::path log_dir) : log_dir_(std::move(log_dir)) {
  if (!log_dir_.empty()) {
    fs::create_directories(log_dir_);
    load_logs();
  }
}

void SessionStore::load_logs() {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(log_dir_)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file);
    std::string line;
    std::shared_ptr<Session> s;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        // Unreadable lines, such as one torn by a crash, are skipped.
        spdlog::warn("skipping unreadable line {} of {}", lineno, file.string());
        continue;
      }
      if (j.value("type", "") == "session") {
        s = std::make_shared<Session>();
        s->info.id = j.at("id").get<std::string>();
        s->info.created_at = j.value("created_at", "");
        sessions_[s->info.id] = s;
        if (s->info.id.size() > 2 && s->info.id.rfind("s-", 0) == 0) {
          try {
            next_session_ = std::max<std::int64_t>(next_session_, std::stoll(s->info.id.substr(2)) + 1);
          } catch (const std::exception&) {
          }
        }
      } else if (j.value("type", "") == "turn" && s) {
        TurnRecord r = TurnRecord::from_json(j);
        if (r.appended) {
          s->history.append(r.turn.at("user_input").get<std::string>(), r.turn.at("final_report").get<std::string>());
        }
        s->turn_ids.push_back(r.turn_id);
        s->info.turns = s->turn_ids.size();
        next_turn_ = std::max(next_turn_, r.turn_id + 1);
        turns_[r.turn_id] = std::move(r);
      }
    }
  }
  if (!sessions_.empty()) spdlog::info("restored {} session(s) from {}", sessions_.size(), log_dir_.string());
}

void SessionStore::append_log(const std::string& session_id, const nlohmann::json& line) const {
  if (log_dir_.empty()) return;
  std::ofstream out(log_dir_ / (session_id + ".jsonl"), std::ios::app);
  if (!out) throw IoError("cannot append to session log of " + session_id);
  out << line.dump() << '\n';
  out.flush();
}

SessionInfo SessionStore::create() {
  std::lock_guard lock(mu_);
  auto s = std::make_shared<Session>();
  char buf[32];
  std::snprintf(buf, sizeof buf, "s-%06lld", static_cast<long long>(next_session_++));
  s->info.id = buf;
  s->info.created_at = utc_now();
  append_log(s->info.id, {{"type", "session"}, {"id", s->info.id}, {"created_at", s->info.created_at}});
  sessions_[s->info.id] = s;
  return s->info;
}

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

bool SessionStore::exists(const std::string& id) const { return find(id) != nullptr; }

std::vector<SessionInfo> SessionStore::list() const {
  std::lock_guard lock(mu_);
  std::vector<SessionInfo> out;
  for (const auto& [id, s] : sessions_) {
    SessionInfo info = s->info;
    info.busy = s->pending_input.has_value();
    out.push_back(info);
  }
  return out;
}

ChatOutcome SessionStore::chat(const std::string& session_id, const std::string& message,
                               const orchestrator::Pipeline& pipeline) {
  auto s = find(session_id);
  if (!s) return {ChatStatus::kNotFound, std::nullopt};
  std::unique_lock turn_lock(s->turn_mu, std::try_to_lock);
  if (!turn_lock.owns_lock()) return {ChatStatus::kConflict, std::nullopt};
  {
    std::lock_guard lock(mu_);
    s->pending_input = message;
  }
  // The history is only touched while holding the session's turn lock.
  const std::size_t before = s->history.size();
  orchestrator::ChatTurn turn;
  try {
    turn = pipeline.run_turn(message, s->history);
  } catch (...) {
    std::lock_guard lock(mu_);
    s->pending_input.reset();
    throw;
  }
  TurnRecord r;
  r.session_id = session_id;
  r.created_at = utc_now();
  r.appended = s->history.size() > before;
  r.turn = turn.to_json();
  {
    std::lock_guard lock(mu_);
    r.turn_id = next_turn_++;
    append_log(session_id, r.to_json());
    s->turn_ids.push_back(r.turn_id);
    s->info.turns = s->turn_ids.size();
    s->pending_input.reset();
    turns_[r.turn_id] = r;
  }
  return {ChatStatus::kOk, r};
}

std::optional<nlohmann::json> SessionStore::turns(const std::string& session_id) const {
  auto s = find(session_id);
  if (!s) return std::nullopt;
  std::lock_guard lock(mu_);
  nlohmann::json list = nlohmann::json::array();
  for (auto id : s->turn_ids) list.push_back(turns_.at(id).summary());
  if (s->pending_input) list.push_back({{"user_input", *s->pending_input}, {"status", "pending"}});
  return nlohmann::json{{"session_id", session_id}, {"created_at", s->info.created_at}, {"turns", list}};
}

std::optional<TurnRecord> SessionStore::turn(std::int64_t turn_id) const {
  std::lock_guard lock(mu_);
  auto it = turns_.find(turn_id);
  if (it == turns_.end()) return std::nullopt;
  return it->second;
}

std::optional<orchestrator::ChatHistory> SessionStore::history(const std::string& session_id) const {
  auto s = find(session_id);
  if (!s) return std::nullopt;
  std::unique_lock turn_lock(s->turn_mu);
  return s->history;
}

orchestrator::ChatHistory SessionStore::replay(const fs::path& log_file) {
  std::ifstream in(log_file);
  if (!in) throw IoError("cannot open session log " + log_file.string());
  orchestrator::ChatHistory h;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    if (j.value("type", "") != "turn") continue;
    auto r = TurnRecord::from_json(j);
    if (r.appended) h.append(r.turn.at("user_input").get<std::string>(), r.turn.at("final_report").get<std::string>());
  }
  return h;
}

}  // namespace moldchat::service
