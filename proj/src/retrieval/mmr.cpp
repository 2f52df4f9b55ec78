// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/retrieval/mmr.hpp"

#include <algorithm>
#include <limits>

#include "moldchat/common/error.hpp"

namespace moldchat::retrieval {

void MMRConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw PreconditionError("MMR lambda must lie in [0, 1]");
  if (select_n == 0) throw PreconditionError("MMR select_n must be at least 1");
  if (select_n > candidate_k) throw PreconditionError("MMR select_n exceeds candidate_k");
}

std::vector<std::size_t> mmr_select_indices(const std::vector<std::int64_t>& ids,
                                            const std::vector<EmbeddingVector>& vecs,
                                            const EmbeddingVector& query, const MMRConfig& config) {
  config.validate();
  if (vecs.empty()) throw PreconditionError("mmr_select needs at least one candidate");
  if (ids.size() != vecs.size()) throw PreconditionError("mmr_select ids and vectors differ in length");

  const std::size_t n = vecs.size();
  std::vector<double> relevance(n);
  for (std::size_t i = 0; i < n; ++i) relevance[i] = cosine(vecs[i], query);

  // max_sim[i] tracks max over the selected set; updated incrementally.
  std::vector<double> max_sim(n, 0.0);
  std::vector<bool> taken(n, false);
  std::vector<std::size_t> order;
  const std::size_t want = std::min(config.select_n, n);

  while (order.size() < want) {
    std::size_t best = n;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double diversity = order.empty() ? 0.0 : max_sim[i];
      const double score = config.lambda * relevance[i] - (1.0 - config.lambda) * diversity;
      bool better = false;
      if (best == n || score > best_score) {
        better = true;
      } else if (score == best_score) {
        if (relevance[i] != relevance[best]) {
          better = relevance[i] > relevance[best];
        } else {
          better = ids[i] < ids[best];
        }
      }
      if (better) {
        best = i;
        best_score = score;
      }
    }
    taken[best] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double s = cosine(vecs[i], vecs[best]);
      max_sim[i] = order.empty() ? s : std::max(max_sim[i], s);
    }
    order.push_back(best);
  }
  return order;
}

std::vector<Chunk> mmr_select(const std::vector<MMRCandidate>& candidates, const EmbeddingVector& query,
                              const MMRConfig& config) {
  std::vector<std::int64_t> ids;
  std::vector<EmbeddingVector> vecs;
  ids.reserve(candidates.size());
  vecs.reserve(candidates.size());
  for (const auto& c : candidates) {
    ids.push_back(c.chunk.id);
    vecs.push_back(c.vec);
  }
  std::vector<Chunk> out;
  for (std::size_t i : mmr_select_indices(ids, vecs, query, config)) out.push_back(candidates[i].chunk);
  return out;
}

}  // namespace moldchat::retrieval
