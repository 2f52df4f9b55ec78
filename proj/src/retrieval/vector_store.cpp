// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/retrieval/vector_store.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "moldchat/common/error.hpp"

namespace moldchat::retrieval {

namespace {

constexpr char kMagic[4] = {'M', 'C', 'V', 'S'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw IoError("vector store file is truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_str(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_str(std::istream& in) {
  const std::uint64_t n = get_u64(in);
  if (n > (1ull << 32)) throw IoError("vector store string length is implausible");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) throw IoError("vector store file is truncated");
  return s;
}

void put_f64(std::ostream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

double get_f64(std::istream& in) {
  const std::uint64_t bits = get_u64(in);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace

VectorStore::VectorStore(std::string fingerprint, std::size_t dim) : fingerprint_(std::move(fingerprint)), dim_(dim) {}

VectorStore VectorStore::build(const std::vector<Chunk>& chunks, const Embedder& embedder) {
  VectorStore store(embedder.fingerprint(), embedder.dim());
  for (const auto& c : chunks) store.add(c, embedder.embed(c.text));
  return store;
}

void VectorStore::add(Chunk chunk, EmbeddingVector vec) {
  if (chunk.text.empty()) throw ValidationError("chunk " + std::to_string(chunk.id) + " has empty text");
  if (vec.dim() != dim_) {
    throw ValidationError("vector dimension " + std::to_string(vec.dim()) + " does not match store dimension " +
                          std::to_string(dim_));
  }
  chunks_.push_back(std::move(chunk));
  vectors_.push_back(std::move(vec));
}

std::vector<ScoredChunk> VectorStore::top_k(const EmbeddingVector& query, std::size_t k,
                                            const std::string& query_fingerprint) const {
  return top_k(query, k, query_fingerprint, nullptr);
}

std::vector<ScoredChunk> VectorStore::top_k(const EmbeddingVector& query, std::size_t k,
                                            const std::string& query_fingerprint,
                                            const std::function<bool(const Chunk&)>& keep) const {
  if (k == 0) throw PreconditionError("top_k needs k >= 1");
  if (empty()) throw PreconditionError("top_k on an empty store");
  if (query_fingerprint != fingerprint_) {
    throw ConfigError("query embedder '" + query_fingerprint + "' does not match store embedder '" + fingerprint_ +
                      "'");
  }
  std::vector<ScoredChunk> scored;
  scored.reserve(chunks_.size());
  for (std::size_t i = 0; i < chunks_.size(); ++i) {
    if (keep && !keep(chunks_[i])) continue;
    scored.push_back({&chunks_[i], i, cosine(vectors_[i], query)});
  }
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    [](const ScoredChunk& a, const ScoredChunk& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return a.chunk->id < b.chunk->id;
                    });
  scored.resize(n);
  return scored;
}

void VectorStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write vector store " + path.string());
  out.write(kMagic, 4);
  put_u64(out, kVersion);
  put_str(out, fingerprint_);
  put_u64(out, dim_);
  put_u64(out, chunks_.size());
  for (std::size_t i = 0; i < chunks_.size(); ++i) {
    const Chunk& c = chunks_[i];
    put_u64(out, static_cast<std::uint64_t>(c.id));
    put_str(out, std::string(to_string(c.source)));
    put_str(out, c.text);
    put_u64(out, c.meta.size());
    for (const auto& [k, v] : c.meta) {
      put_str(out, k);
      put_str(out, v);
    }
    for (double d : vectors_[i].values()) put_f64(out, d);
  }
  if (!out) throw IoError("failed writing vector store " + path.string());
}

VectorStore VectorStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vector store " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError(path.string() + " is not a vector store file");
  }
  const auto version = get_u64(in);
  if (version != kVersion) throw IoError("unsupported vector store version " + std::to_string(version));
  VectorStore store;
  store.fingerprint_ = get_str(in);
  store.dim_ = get_u64(in);
  const auto n = get_u64(in);
  for (std::uint64_t i = 0; i < n; ++i) {
    Chunk c;
    c.id = static_cast<std::int64_t>(get_u64(in));
    c.source = chunk_source_from_string(get_str(in));
    c.text = get_str(in);
    const auto m = get_u64(in);
    for (std::uint64_t j = 0; j < m; ++j) {
      std::string k = get_str(in);
      c.meta[k] = get_str(in);
    }
    std::vector<double> values(store.dim_);
    for (auto& d : values) d = get_f64(in);
    store.add(std::move(c), EmbeddingVector::from_normalized(std::move(values)));
  }
  return store;
}

}  // namespace moldchat::retrieval
