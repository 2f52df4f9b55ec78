// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>

#include "moldchat/orchestrator/pipeline.hpp"
#include "moldchat/service/sessions.hpp"

namespace httplib {
class Server;
}

namespace moldchat::service {

struct ApiOptions {
  std::string auth_token;  // empty disables the bearer check
  std::string backend_name;
  std::map<std::string, bool> tool_status;
};

/// JSON HTTP API over a session store:
///   POST /api/sessions, GET /api/sessions,
///   POST /api/sessions/{id}/chat, GET /api/sessions/{id}/turns,
///   GET /api/turns/{id}/trace, GET /api/health.
class ChatApi {
 public:
  ChatApi(const orchestrator::Pipeline& pipeline, SessionStore& sessions, ApiOptions options);
  ~ChatApi();

  /// Registers the routes on `server`.
  void mount(httplib::Server& server) const;

  /// Binds and serves until stop() is called. Port 0 picks a free port.
  void listen(const std::string& host, int port);
  /// Binds to a free port and serves on a background thread; returns the port.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

 private:
  const orchestrator::Pipeline& pipeline_;
  SessionStore& sessions_;
  ApiOptions options_;
  std::unique_ptr<httplib::Server> server_;
  struct Worker;
  std::unique_ptr<Worker> worker_;
};

}  // namespace moldchat::service
