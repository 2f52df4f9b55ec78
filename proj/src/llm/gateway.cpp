// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/llm/gateway.hpp"

#include <chrono>

#include "moldchat/common/text.hpp"
#include "moldchat/llm/schemas.hpp"

namespace moldchat::llm {

Gateway::Gateway(std::shared_ptr<Backend> backend, PriceTable prices, std::string default_model)
    : backend_(std::move(backend)), prices_(std::move(prices)), default_model_(std::move(default_model)) {
  if (!backend_) throw ConfigError("gateway needs a backend");
}

Completion Gateway::complete(CompletionRequest request, UsageMeter* scoped) {
  if (request.messages.empty()) throw PreconditionError("completion request has no messages");
  for (const auto& m : request.messages) {
    if (m.role != Role::kSystem && text::trim(m.content).empty()) {
      throw PreconditionError("user/assistant message content must be non-empty");
    }
  }
  if (request.temperature < 0.0) throw PreconditionError("temperature must be >= 0");
  if (request.model_id.empty()) request.model_id = default_model_;

  const auto start = std::chrono::steady_clock::now();
  BackendReply reply = backend_->complete(request);
  const Seconds elapsed = std::chrono::steady_clock::now() - start;

  Completion c;
  c.text = std::move(reply.text);
  c.usage = reply.usage;
  c.elapsed = elapsed;
  c.model_id = request.model_id;
  c.stage_tag = request.stage_tag;
  c.prompt_digest = text::digest_hex(prompt_text(request));
  c.cost = prices_.contains(request.model_id) ? cost_of(c.usage, request.model_id, prices_) : 0.0;
  meter_.record(c);
  if (scoped) scoped->record(c);
  return c;
}

CompletionRequest Gateway::reformat_request(const CompletionRequest& original, const std::string& bad_reply,
                                            const std::string& error) {
  CompletionRequest retry = original;
  retry.messages.push_back(ChatMessage::assistant(bad_reply.empty() ? "(empty reply)" : bad_reply));
  std::string ask = "Your previous reply could not be parsed (" + error +
                    "). Reformat your answer so that it follows the required output format exactly.";
  if (original.schema_id) ask += "\n\n" + format_instructions(*original.schema_id);
  retry.messages.push_back(ChatMessage::user(std::move(ask)));
  return retry;
}

}  // namespace moldchat::llm
