// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <thread>

#include <spdlog/spdlog.h>

#include "moldchat/common/error.hpp"
#include "moldchat/common/http.hpp"
#include "moldchat/llm/backend.hpp"

namespace moldchat::llm {

HttpBackendConfig HttpBackendConfig::from_env() {
  HttpBackendConfig cfg;
  if (const char* v = std::getenv("MOLDCHAT_LLM_BASE_URL")) cfg.base_url = v;
  if (const char* v = std::getenv("MOLDCHAT_LLM_API_KEY")) cfg.api_key = v;
  if (const char* v = std::getenv("MOLDCHAT_LLM_MODEL")) cfg.default_model = v;
  return cfg;
}

HttpChatBackend::HttpChatBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.max_attempts < 1) throw ConfigError("max_attempts must be at least 1");
  http::parse_base_url(config_.base_url);  // validates
}

nlohmann::json HttpChatBackend::build_body(const CompletionRequest& request, const std::string& model) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  return {{"model", model}, {"messages", messages}, {"temperature", request.temperature}};
}

BackendReply HttpChatBackend::parse_reply(const std::string& body) {
  auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.contains("choices") || doc["choices"].empty()) {
    throw ParseError("chat completion response missing choices", body);
  }
  BackendReply reply;
  const auto& message = doc["choices"][0]["message"];
  if (message.contains("content") && message["content"].is_string()) {
    reply.text = message["content"].get<std::string>();
  }
  if (doc.contains("usage") && doc["usage"].is_object()) {
    reply.usage.input_tokens = doc["usage"].value("prompt_tokens", std::int64_t{0});
    reply.usage.output_tokens = doc["usage"].value("completion_tokens", std::int64_t{0});
  }
  return reply;
}

BackendReply HttpChatBackend::complete(const CompletionRequest& request) {
  const std::string model = request.model_id.empty() ? config_.default_model : request.model_id;
  const std::string body = build_body(request, model).dump();
  http::Headers headers;
  if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    try {
      auto resp = http::post_json(config_.base_url, "/chat/completions", headers, body, config_.timeout);
      if (resp.status == 200) return parse_reply(resp.body);
      last_error = "HTTP " + std::to_string(resp.status) + ": " + resp.body.substr(0, 300);
      const bool retryable = resp.status == 429 || resp.status >= 500;
      if (!retryable) throw TransportError("chat completion rejected, " + last_error, attempt);
    } catch (const TransportError& e) {
      last_error = e.what();
      if (last_error.find("rejected") != std::string::npos) throw;
    }
    spdlog::warn("chat completion attempt {}/{} failed: {}", attempt, config_.max_attempts, last_error);
    if (attempt < config_.max_attempts) std::this_thread::sleep_for(config_.backoff * attempt);
  }
  throw TransportError("chat completion failed: " + last_error, config_.max_attempts);
}

}  // namespace moldchat::llm
