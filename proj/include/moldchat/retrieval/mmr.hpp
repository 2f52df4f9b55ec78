// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "moldchat/retrieval/chunk.hpp"
#include "moldchat/retrieval/embedding.hpp"

namespace moldchat::retrieval {

struct MMRConfig {
  double lambda = 0.5;
  std::size_t candidate_k = 20;
  std::size_t select_n = 7;

  /// Throws PreconditionError unless 0 <= lambda <= 1 and
  /// 1 <= select_n <= candidate_k.
  void validate() const;
};

struct MMRCandidate {
  Chunk chunk;
  EmbeddingVector vec;
};

/// Greedy maximal marginal relevance. Each round picks the remaining
/// candidate maximizing lambda*sim(d, q) - (1-lambda)*max_{s in S} sim(d, s),
/// where the max over an empty S is 0. Ties go to the higher query
/// similarity, then the lower chunk id. Returns positions into the input,
/// in selection order.
std::vector<std::size_t> mmr_select_indices(const std::vector<std::int64_t>& ids,
                                            const std::vector<EmbeddingVector>& vecs,
                                            const EmbeddingVector& query, const MMRConfig& config);

std::vector<Chunk> mmr_select(const std::vector<MMRCandidate>& candidates, const EmbeddingVector& query,
                              const MMRConfig& config);

}  // namespace moldchat::retrieval
