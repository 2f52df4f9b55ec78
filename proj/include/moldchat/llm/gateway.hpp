// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "moldchat/common/error.hpp"
#include "moldchat/llm/backend.hpp"
#include "moldchat/llm/meter.hpp"
#include "moldchat/llm/pricing.hpp"
#include "moldchat/llm/types.hpp"

namespace moldchat::llm {

/// Outcome of a structured call: the parsed value, or the parse error after
/// the single reformat retry. Every attempt is kept for tracing.
template <typename T>
struct Structured {
  std::optional<T> value;
  std::vector<Completion> attempts;
  std::string error;

  bool ok() const { return value.has_value(); }
};

/// Provider-agnostic entry point for all model calls. Meters tokens, cost and
/// latency for every call into a session-wide meter and, optionally, a scoped
/// meter supplied by the caller (one per chat turn).
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, PriceTable prices, std::string default_model);

  Completion complete(CompletionRequest request, UsageMeter* scoped = nullptr);

  /// Runs `request`, parses the reply with `parse`, and on ParseError issues
  /// exactly one follow-up asking the model to reformat.
  template <typename T>
  Structured<T> complete_structured(CompletionRequest request,
                                    const std::function<T(const std::string&)>& parse,
                                    UsageMeter* scoped = nullptr);

  const std::string& default_model() const { return default_model_; }
  const PriceTable& prices() const { return prices_; }
  UsageMeter& meter() { return meter_; }
  const Backend& backend() const { return *backend_; }

  /// Follow-up request sent after an unparsable reply.
  static CompletionRequest reformat_request(const CompletionRequest& original,
                                            const std::string& bad_reply,
                                            const std::string& error);

 private:
  std::shared_ptr<Backend> backend_;
  PriceTable prices_;
  std::string default_model_;
  UsageMeter meter_;
};

template <typename T>
Structured<T> Gateway::complete_structured(CompletionRequest request,
                                           const std::function<T(const std::string&)>& parse,
                                           UsageMeter* scoped) {
  Structured<T> out;
  out.attempts.push_back(complete(request, scoped));
  try {
    out.value = parse(out.attempts.back().text);
    return out;
  } catch (const ParseError& first) {
    out.attempts.push_back(complete(reformat_request(request, out.attempts.back().text, first.what()), scoped));
  }
  try {
    out.value = parse(out.attempts.back().text);
  } catch (const ParseError& second) {
    out.error = second.what();
  }
  return out;
}

}  // namespace moldchat::llm
