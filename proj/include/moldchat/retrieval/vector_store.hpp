// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "moldchat/retrieval/chunk.hpp"
#include "moldchat/retrieval/embedding.hpp"

namespace moldchat::retrieval {

struct ScoredChunk {
  const Chunk* chunk = nullptr;
  std::size_t index = 0;  // position in the store
  double score = 0.0;
};

/// Exact cosine store. Immutable once built; concurrent reads are safe.
class VectorStore {
 public:
  VectorStore() = default;
  VectorStore(std::string fingerprint, std::size_t dim);

  /// Embeds and appends every chunk.
  static VectorStore build(const std::vector<Chunk>& chunks, const Embedder& embedder);

  void add(Chunk chunk, EmbeddingVector vec);

  const std::string& fingerprint() const { return fingerprint_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return chunks_.size(); }
  bool empty() const { return chunks_.empty(); }
  const std::vector<Chunk>& chunks() const { return chunks_; }
  const std::vector<EmbeddingVector>& vectors() const { return vectors_; }

  /// k best chunks by cosine, descending; ties go to the lower chunk id.
  /// Throws ConfigError when `query_fingerprint` differs from the store's.
  std::vector<ScoredChunk> top_k(const EmbeddingVector& query, std::size_t k,
                                 const std::string& query_fingerprint) const;
  /// As above, restricted to chunks for which `keep` returns true.
  std::vector<ScoredChunk> top_k(const EmbeddingVector& query, std::size_t k, const std::string& query_fingerprint,
                                 const std::function<bool(const Chunk&)>& keep) const;

  void save(const std::filesystem::path& path) const;
  static VectorStore load(const std::filesystem::path& path);

  bool operator==(const VectorStore&) const = default;

 private:
  std::string fingerprint_;
  std::size_t dim_ = 0;
  std::vector<Chunk> chunks_;
  std::vector<EmbeddingVector> vectors_;
};

}  // namespace moldchat::retrieval
