// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moldchat/llm/gateway.hpp"
#include "moldchat/llm/prompts.hpp"
#include "moldchat/retrieval/mmr.hpp"
#include "moldchat/retrieval/vector_store.hpp"

namespace moldchat::retrieval {

inline constexpr const char* kTableRefusal = "I cannot answer that query because the defect type is not specific.";
inline constexpr const char* kManualRefusal = "The manual does not contain the information you mentioned about.";

/// What a retrieval call looked at; recorded in the turn trace.
struct RetrievalTrace {
  std::string kind;             // "table" or "manual"
  std::size_t candidates = 0;   // chunks scored by similarity search
  std::size_t selected = 0;     // chunks placed in the prompt
  std::vector<std::int64_t> chunk_ids;
  std::vector<double> scores;
  bool refused = false;
  bool summary_fallback = false;  // gateway failed; deterministic rendering used

  nlohmann::json to_json() const;
};

struct RetrievalResult {
  std::string text;
  RetrievalTrace trace;
  std::vector<llm::Completion> completions;
};

struct TableRetrieverConfig {
  std::size_t top_k = 2;
  double temperature = 0.7;
};

class TableRetriever {
 public:
  TableRetriever(std::shared_ptr<const VectorStore> store, std::shared_ptr<const Embedder> embedder,
                 llm::Gateway* gateway, std::shared_ptr<const llm::PromptLibrary> prompts,
                 TableRetrieverConfig config = {});

  /// Top-2 chunks, searched among the rows of the defects the subtask names,
  /// summarized into the priority-ordered adjustment listing.
  /// Refuses when the subtask names no known defect.
  RetrievalResult retrieve(const std::string& subtask, llm::UsageMeter* scoped = nullptr) const;

  /// Defects (canonical names) mentioned in `text`, matched on whole words
  /// against names and aliases.
  std::vector<std::string> mentioned_defects(const std::string& text) const;

  /// Priority-ordered listing built directly from chunk text.
  static std::string render_adjustments(const std::vector<const Chunk*>& chunks,
                                        const std::vector<std::string>& defects);

 private:
  std::shared_ptr<const VectorStore> store_;
  std::shared_ptr<const Embedder> embedder_;
  llm::Gateway* gateway_;
  std::shared_ptr<const llm::PromptLibrary> prompts_;
  TableRetrieverConfig config_;
};

struct ManualRetrieverConfig {
  MMRConfig mmr{0.5, 20, 7};
  double refusal_threshold = 0.15;
  double temperature = 0.7;
};

class ManualRetriever {
 public:
  ManualRetriever(std::shared_ptr<const VectorStore> store, std::shared_ptr<const Embedder> embedder,
                  llm::Gateway* gateway, std::shared_ptr<const llm::PromptLibrary> prompts,
                  ManualRetrieverConfig config = {});

  /// Top candidate_k pages by cosine, MMR down to select_n, then summarized
  /// with page references. Refuses when the best cosine is below threshold.
  RetrievalResult retrieve(const std::string& subtask, llm::UsageMeter* scoped = nullptr) const;

 private:
  std::shared_ptr<const VectorStore> store_;
  std::shared_ptr<const Embedder> embedder_;
  llm::Gateway* gateway_;
  std::shared_ptr<const llm::PromptLibrary> prompts_;
  ManualRetrieverConfig config_;
};

}  // namespace moldchat::retrieval
