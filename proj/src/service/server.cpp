// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/service/server.hpp"

#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "moldchat/common/error.hpp"
#include "moldchat/common/text.hpp"

namespace moldchat::service {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

}  // namespace

struct ChatApi::Worker {
  std::thread thread;
};

ChatApi::ChatApi(const orchestrator::Pipeline& pipeline, SessionStore& sessions, ApiOptions options)
    : pipeline_(pipeline), sessions_(sessions), options_(std::move(options)) {}

ChatApi::~ChatApi() { stop(); }

void ChatApi::mount(httplib::Server& server) const {
  const std::string token = options_.auth_token;
  server.set_pre_routing_handler([token](const httplib::Request& req, httplib::Response& res) {
    if (token.empty() || req.path == "/api/health") return httplib::Server::HandlerResponse::Unhandled;
    if (req.get_header_value("Authorization") != "Bearer " + token) {
      send_error(res, 401, "missing or wrong bearer token");
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    spdlog::error("request failed: {}", what);
    send_error(res, 500, what);
  });

  server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}, {"backend", options_.backend_name}, {"tools", options_.tool_status}});
  });

  server.Post("/api/sessions", [this](const httplib::Request&, httplib::Response& res) {
    auto info = sessions_.create();
    send_json(res, 201, {{"id", info.id}, {"created_at", info.created_at}});
  });

  server.Get("/api/sessions", [this](const httplib::Request&, httplib::Response& res) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& s : sessions_.list()) {
      list.push_back({{"id", s.id}, {"created_at", s.created_at}, {"turns", s.turns}, {"busy", s.busy}});
    }
    send_json(res, 200, {{"sessions", list}});
  });

  server.Post(R"(/api/sessions/([^/]+)/chat)", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    std::string message;
    try {
      auto body = nlohmann::json::parse(req.body);
      message = body.at("message").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      send_error(res, 400, "body must be a JSON object with a string field 'message'");
      return;
    }
    auto outcome = sessions_.chat(id, message, pipeline_);
    switch (outcome.status) {
      case ChatStatus::kNotFound:
        send_error(res, 404, "unknown session " + id);
        return;
      case ChatStatus::kConflict:
        send_error(res, 409, "session " + id + " is already processing a turn");
        return;
      case ChatStatus::kOk:
        break;
    }
    const auto& r = *outcome.record;
    send_json(res, 200,
              {{"reply", r.turn.value("final_report", "")},
               {"language", r.turn.value("language", "")},
               {"turn_id", r.turn_id},
               {"failed", r.turn.value("failed", false)}});
  });

  server.Get(R"(/api/sessions/([^/]+)/turns)", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    auto turns = sessions_.turns(id);
    if (!turns) {
      send_error(res, 404, "unknown session " + id);
      return;
    }
    send_json(res, 200, *turns);
  });

  server.Get(R"(/api/turns/([^/]+)/trace)", [this](const httplib::Request& req, httplib::Response& res) {
    std::int64_t id = 0;
    try {
      std::size_t used = 0;
      id = std::stoll(req.matches[1], &used);
      if (static_cast<std::ptrdiff_t>(used) != req.matches[1].length()) throw std::invalid_argument("id");
    } catch (const std::exception&) {
      send_error(res, 404, "unknown turn " + std::string(req.matches[1]));
      return;
    }
    auto r = sessions_.turn(id);
    if (!r) {
      send_error(res, 404, "unknown turn " + std::to_string(id));
      return;
    }
    send_json(res, 200,
              {{"turn_id", r->turn_id},
               {"session_id", r->session_id},
               {"language", r->turn.value("language", "")},
               {"category", r->turn.value("category", "")},
               {"latency_s", r->turn.value("latency_s", 0.0)},
               {"usage", r->turn.value("usage", nlohmann::json::object())},
               {"cost", r->turn.value("cost", 0.0)},
               {"stages", r->turn.value("trace", nlohmann::json::array())}});
  });
}

void ChatApi::listen(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  mount(*server_);
  spdlog::info("serving on http://{}:{}", host, port);
  if (!server_->listen(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
}

int ChatApi::start_background(const std::string& host) {
  server_ = std::make_unique<httplib::Server>();
  mount(*server_);
  const int port = server_->bind_to_any_port(host);
  if (port < 0) throw IoError("cannot bind " + host);
  worker_ = std::make_unique<Worker>();
  worker_->thread = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void ChatApi::stop() {
  if (server_) server_->stop();
  if (worker_ && worker_->thread.joinable()) worker_->thread.join();
  worker_.reset();
}

}  // namespace moldchat::service
