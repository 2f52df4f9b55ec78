// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace moldchat::http {

struct BaseUrl {
  std::string origin;       // scheme://host[:port]
  std::string path_prefix;  // "" or "/v1"
};

/// Splits "https://api.example.com/v1" into origin and path prefix.
BaseUrl parse_base_url(const std::string& url);

struct Response {
  int status = 0;
  std::string body;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

/// POSTs a JSON body. Connection-level failures throw TransportError; HTTP
/// error statuses are returned to the caller.
Response post_json(const std::string& base_url, const std::string& path, const Headers& headers,
                   const std::string& body, std::chrono::seconds timeout);

bool tls_supported() noexcept;

}  // namespace moldchat::http
