// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <vector>

namespace moldchat::retrieval {

/// Unit-L2-norm vector. Construction normalizes; zero or non-finite input is
/// rejected.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> raw);

  /// Wraps values that are already unit norm (e.g. loaded from disk) after
  /// checking the norm to 1e-6.
  static EmbeddingVector from_normalized(std::vector<double> values);

  std::size_t dim() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

/// Dot product of two unit vectors, accumulated left to right.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(const std::string& text) const = 0;
  virtual std::size_t dim() const = 0;
  /// Identifies the embedding space; stores refuse queries from another one.
  virtual std::string fingerprint() const = 0;
};

/// Deterministic offline embedder: lowercase word tokens minus stopwords,
/// each hashed to a signed bucket of a d-dimensional count vector.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim = 256);

  EmbeddingVector embed(const std::string& text) const override;
  std::size_t dim() const override { return dim_; }
  std::string fingerprint() const override;

  static std::vector<std::string> tokenize(const std::string& text);

 private:
  std::size_t dim_;
};

struct RemoteEmbedderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::string model = "text-embedding-3-small";
  std::size_t dim = 1536;
  int max_attempts = 3;
  std::chrono::seconds timeout{60};

  /// Reads MOLDCHAT_EMBED_BASE_URL (falls back to MOLDCHAT_LLM_BASE_URL),
  /// MOLDCHAT_EMBED_API_KEY (falls back to MOLDCHAT_LLM_API_KEY),
  /// MOLDCHAT_EMBED_MODEL and MOLDCHAT_EMBED_DIM.
  static RemoteEmbedderConfig from_env();
};

/// Client for an OpenAI-compatible /embeddings endpoint.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {}

  EmbeddingVector embed(const std::string& text) const override;
  std::size_t dim() const override { return config_.dim; }
  std::string fingerprint() const override;

 private:
  RemoteEmbedderConfig config_;
};

std::unique_ptr<Embedder> make_embedder(const std::string& fingerprint_or_kind);

}  // namespace moldchat::retrieval
