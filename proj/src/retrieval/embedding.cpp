// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/retrieval/embedding.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "moldchat/common/error.hpp"
#include "moldchat/common/http.hpp"
#include "moldchat/common/text.hpp"

namespace moldchat::retrieval {

EmbeddingVector::EmbeddingVector(std::vector<double> raw) {
  if (raw.empty()) throw ValidationError("embedding has dimension 0");
  double ss = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v)) throw ValidationError("embedding has a non-finite entry");
    ss += v * v;
  }
  if (ss == 0.0) throw ValidationError("zero vector cannot be normalized");
  const double norm = std::sqrt(ss);
  for (double& v : raw) v /= norm;
  values_ = std::move(raw);
}

EmbeddingVector EmbeddingVector::from_normalized(std::vector<double> values) {
  double ss = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("embedding has a non-finite entry");
    ss += v * v;
  }
  if (values.empty() || std::abs(std::sqrt(ss) - 1.0) > 1e-6) {
    throw ValidationError("stored embedding is not unit norm");
  }
  EmbeddingVector out;
  out.values_ = std::move(values);
  return out;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw PreconditionError("cosine of vectors with dimensions " + std::to_string(a.dim()) + " and " +
                            std::to_string(b.dim()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a[i] * b[i];
  return dot;
}

namespace {

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "a",    "an",   "and",  "are",   "as",    "at",   "be",   "by",    "can",  "do",  "does", "for",
      "from", "how",  "i",    "in",    "is",    "it",   "me",   "my",    "of",   "on",  "or",   "should",
      "the",  "this", "to",   "was",   "what",  "when", "which", "with", "you",  "your", "we",  "our",
      "that", "these", "those", "be",  "been",  "will", "would", "there", "their", "if",  "into", "about"};
  return words;
}

}  // namespace

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw PreconditionError("embedding dimension must be positive");
}

std::vector<std::string> HashingEmbedder::tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && !stopwords().count(cur)) out.push_back(cur);
    cur.clear();
  };
  for (unsigned char c : text) {
    if (c >= 0x80 || std::isalnum(c)) {
      cur += static_cast<char>(c >= 0x80 ? c : std::tolower(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

EmbeddingVector HashingEmbedder::embed(const std::string& text) const {
  if (text::trim(text).empty()) throw PreconditionError("cannot embed empty text");
  std::vector<double> v(dim_, 0.0);
  auto tokens = tokenize(text);
  if (tokens.empty()) tokens.push_back(text::to_lower(text::trim(text)));
  for (const auto& tok : tokens) {
    const std::uint64_t h = text::fnv1a64(tok);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    v[h % dim_] += sign;
  }
  // Hash collisions between opposite-signed tokens can cancel everything;
  // fall back to a bucket derived from the whole text.
  bool all_zero = true;
  for (double x : v) all_zero = all_zero && x == 0.0;
  if (all_zero) v[text::fnv1a64(text) % dim_] = 1.0;
  return EmbeddingVector(std::move(v));
}

std::string HashingEmbedder::fingerprint() const { return "hash-tf-v1:d=" + std::to_string(dim_); }

RemoteEmbedderConfig RemoteEmbedderConfig::from_env() {
  RemoteEmbedderConfig c;
  auto env = [](const char* k) -> std::string {
    const char* v = std::getenv(k);
    return v ? v : "";
  };
  if (auto v = env("MOLDCHAT_EMBED_BASE_URL"); !v.empty()) {
    c.base_url = v;
  } else if (auto w = env("MOLDCHAT_LLM_BASE_URL"); !w.empty()) {
    c.base_url = w;
  }
  if (auto v = env("MOLDCHAT_EMBED_API_KEY"); !v.empty()) {
    c.api_key = v;
  } else {
    c.api_key = env("MOLDCHAT_LLM_API_KEY");
  }
  if (auto v = env("MOLDCHAT_EMBED_MODEL"); !v.empty()) c.model = v;
  if (auto v = env("MOLDCHAT_EMBED_DIM"); !v.empty()) c.dim = static_cast<std::size_t>(std::stoul(v));
  return c;
}

EmbeddingVector RemoteEmbedder::embed(const std::string& text) const {
  if (text::trim(text).empty()) throw PreconditionError("cannot embed empty text");
  const std::string body = nlohmann::json{{"model", config_.model}, {"input", text}}.dump();
  http::Headers headers;
  if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);
  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    try {
      auto resp = http::post_json(config_.base_url, "/embeddings", headers, body, config_.timeout);
      if (resp.status == 200) {
        auto doc = nlohmann::json::parse(resp.body);
        auto values = doc.at("data").at(0).at("embedding").get<std::vector<double>>();
        if (values.size() != config_.dim) {
          throw ConfigError("embedding endpoint returned dimension " + std::to_string(values.size()) +
                            ", configured " + std::to_string(config_.dim));
        }
        return EmbeddingVector(std::move(values));
      }
      last_error = "HTTP " + std::to_string(resp.status);
      if (resp.status != 429 && resp.status < 500) break;
    } catch (const TransportError& e) {
      last_error = e.what();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed embedding reply: ") + e.what(), "");
    }
    spdlog::warn("embedding request failed ({}), attempt {}/{}", last_error, attempt, config_.max_attempts);
    if (attempt < config_.max_attempts) std::this_thread::sleep_for(std::chrono::milliseconds(250 * attempt));
  }
  throw TransportError("embedding request failed: " + last_error, config_.max_attempts);
}

std::string RemoteEmbedder::fingerprint() const {
  return "remote:" + config_.model + ":d=" + std::to_string(config_.dim);
}

std::unique_ptr<Embedder> make_embedder(const std::string& kind) {
  if (kind.empty() || kind == "hash") return std::make_unique<HashingEmbedder>();
  if (text::starts_with_icase(kind, "hash-tf-v1:d=")) {
    return std::make_unique<HashingEmbedder>(std::stoul(kind.substr(13)));
  }
  if (kind == "remote" || text::starts_with_icase(kind, "remote:")) {
    auto cfg = RemoteEmbedderConfig::from_env();
    if (text::starts_with_icase(kind, "remote:")) {
      const std::string rest = kind.substr(7);
      const auto pos = rest.rfind(":d=");
      if (pos != std::string::npos) {
        cfg.model = rest.substr(0, pos);
        cfg.dim = std::stoul(rest.substr(pos + 3));
      }
    }
    return std::make_unique<RemoteEmbedder>(cfg);
  }
  throw ConfigError("unknown embedder '" + kind + "'");
}

}  // namespace moldchat::retrieval
