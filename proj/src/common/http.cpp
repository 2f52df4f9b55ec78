// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/common/http.hpp"

#include <httplib.h>

#include "moldchat/common/error.hpp"

namespace moldchat::http {

BaseUrl parse_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("base URL must include a scheme: '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  BaseUrl out;
  if (path_start == std::string::npos) {
    out.origin = url;
  } else {
    out.origin = url.substr(0, path_start);
    out.path_prefix = url.substr(path_start);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  }
  return out;
}

Response post_json(const std::string& base_url, const std::string& path, const Headers& headers,
                   const std::string& body, std::chrono::seconds timeout) {
  const BaseUrl base = parse_base_url(base_url);
  if (base.origin.rfind("https://", 0) == 0 && !tls_supported()) {
    throw ConfigError("HTTPS endpoint configured but the build has no TLS support");
  }
  httplib::Client client(base.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers hdrs;
  for (const auto& [k, v] : headers) hdrs.emplace(k, v);
  auto result = client.Post(base.path_prefix + path, hdrs, body, "application/json");
  if (!result) {
    throw TransportError("POST " + base.origin + base.path_prefix + path + " failed: " +
                             httplib::to_string(result.error()),
                         1);
  }
  return Response{result->status, result->body};
}

bool tls_supported() noexcept {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
  return true;
#else
  return false;
#endif
}

}  // namespace moldchat::http
