// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/retrieval/retrievers.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

#include "moldchat/common/error.hpp"
#include "moldchat/common/text.hpp"

namespace moldchat::retrieval {

nlohmann::json RetrievalTrace::to_json() const {
  return {{"kind", kind},       {"candidates", candidates}, {"selected", selected},
          {"chunk_ids", chunk_ids}, {"scores", scores},     {"refused", refused},
          {"summary_fallback", summary_fallback}};
}

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

bool contains_word(const std::string& haystack_lower, const std::string& needle_lower) {
  if (needle_lower.empty()) return false;
  std::size_t pos = 0;
  while ((pos = haystack_lower.find(needle_lower, pos)) != std::string::npos) {
    const bool left = pos == 0 || !is_word_char(static_cast<unsigned char>(haystack_lower[pos - 1]));
    const std::size_t end = pos + needle_lower.size();
    auto boundary = [&](std::size_t i) {
      return i >= haystack_lower.size() || !is_word_char(static_cast<unsigned char>(haystack_lower[i]));
    };
    // A plural "s" after the name still counts as a mention.
    const bool right = boundary(end) || (haystack_lower[end] == 's' && boundary(end + 1));
    if (left && right) return true;
    pos = end;
  }
  return false;
}

llm::CompletionRequest summary_request(const llm::PromptLibrary& prompts, const std::string& name,
                                       const std::string& context, const std::string& subtask, double temperature) {
  llm::CompletionRequest req;
  req.messages.push_back(llm::ChatMessage::system(prompts.render(name, {{"context", context}})));
  req.messages.push_back(llm::ChatMessage::user(subtask));
  req.temperature = temperature;
  req.stage_tag = name;
  return req;
}

std::string paired(const std::string& subtask, const std::string& summary) {
  return "Task: " + subtask + "\n" + summary;
}

}  // namespace

TableRetriever::TableRetriever(std::shared_ptr<const VectorStore> store, std::shared_ptr<const Embedder> embedder,
                               llm::Gateway* gateway, std::shared_ptr<const llm::PromptLibrary> prompts,
                               TableRetrieverConfig config)
    : store_(std::move(store)),
      embedder_(std::move(embedder)),
      gateway_(gateway),
      prompts_(std::move(prompts)),
      config_(config) {
  if (!store_ || !embedder_ || !prompts_) throw PreconditionError("table retriever needs a store, embedder and prompts");
}

std::vector<std::string> TableRetriever::mentioned_defects(const std::string& text) const {
  const std::string lower = text::to_lower(text);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& c : store_->chunks()) {
    auto it = c.meta.find("defect");
    if (it == c.meta.end() || seen.count(it->second)) continue;
    std::vector<std::string> names{it->second};
    if (auto a = c.meta.find("aliases"); a != c.meta.end()) {
      for (const auto& alias : text::split(a->second, '|')) names.push_back(alias);
    }
    for (const auto& n : names) {
      if (contains_word(lower, text::to_lower(text::trim(n)))) {
        out.push_back(it->second);
        seen.insert(it->second);
        break;
      }
    }
  }
  return out;
}

std::string TableRetriever::render_adjustments(const std::vector<const Chunk*>& chunks,
                                               const std::vector<std::string>& defects) {
  std::string out = "Parameter Adjustments (sorted by adjustment order):";
  for (const auto& defect : defects) {
    std::map<std::string, std::string> direction;
    std::vector<std::pair<int, std::string>> order;
    for (const Chunk* c : chunks) {
      if (c->meta.count("defect") == 0 || c->meta.at("defect") != defect) continue;
      auto lines = text::split_lines(c->text);
      for (std::size_t i = 2; i < lines.size(); ++i) {
        const auto colon = lines[i].rfind(':');
        if (colon == std::string::npos) continue;
        const std::string param = text::trim(lines[i].substr(0, colon));
        const std::string value = text::trim(lines[i].substr(colon + 1));
        if (c->source == ChunkSource::kTableDirection) {
          direction[param] = value;
        } else if (c->source == ChunkSource::kTablePriority) {
          order.emplace_back(std::stoi(value), param);
        }
      }
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (defects.size() > 1) out += "\n" + defect + ":";
    int current = -1;
    for (const auto& [prio, param] : order) {
      const auto d = direction.find(param);
      const std::string verb = d == direction.end() ? "Adjust" : (d->second == "+" ? "Increase" : "Decrease");
      if (prio != current) {
        out += "\n(Priority: " + std::to_string(prio) + ") → ";
        current = prio;
      } else {
        out += ", ";
      }
      out += "(" + param + ", " + verb + ")";
    }
  }
  return out;
}

RetrievalResult TableRetriever::retrieve(const std::string& subtask, llm::UsageMeter* scoped) const {
  if (text::trim(subtask).empty()) throw PreconditionError("table retrieval needs a non-empty task");
  RetrievalResult result;
  result.trace.kind = "table";

  const auto query = embedder_->embed(subtask);
  const auto defects = mentioned_defects(subtask);
  // Named defects narrow the search to their rows; otherwise the whole table.
  const std::set<std::string> named(defects.begin(), defects.end());
  auto keep = [&](const Chunk& c) {
    auto it = c.meta.find("defect");
    return it != c.meta.end() && named.count(it->second) > 0;
  };
  const auto hits = named.empty() ? store_->top_k(query, config_.top_k, embedder_->fingerprint())
                                  : store_->top_k(query, config_.top_k, embedder_->fingerprint(), keep);
  result.trace.candidates = hits.size();
  result.trace.selected = hits.size();
  std::vector<const Chunk*> chunks;
  for (const auto& h : hits) {
    chunks.push_back(h.chunk);
    result.trace.chunk_ids.push_back(h.chunk->id);
    result.trace.scores.push_back(h.score);
  }

  if (defects.empty()) {
    result.trace.refused = true;
    result.text = paired(subtask, kTableRefusal);
    return result;
  }

  std::string context;
  for (const Chunk* c : chunks) context += (context.empty() ? "" : "\n\n") + c->text;

  if (gateway_) {
    try {
      auto completion = gateway_->complete(
          summary_request(*prompts_, "table_retriever", context, subtask, config_.temperature), scoped);
      result.completions.push_back(completion);
      if (!text::trim(completion.text).empty()) {
        result.text = paired(subtask, text::trim(completion.text));
        return result;
      }
    } catch (const Error& e) {
      spdlog::warn("table summary failed, using direct rendering: {}", e.what());
    }
  }
  result.trace.summary_fallback = true;
  result.text = paired(subtask, render_adjustments(chunks, defects));
  return result;
}

ManualRetriever::ManualRetriever(std::shared_ptr<const VectorStore> store, std::shared_ptr<const Embedder> embedder,
                                 llm::Gateway* gateway, std::shared_ptr<const llm::PromptLibrary> prompts,
                                 ManualRetrieverConfig config)
    : store_(std::move(store)),
      embedder_(std::move(embedder)),
      gateway_(gateway),
      prompts_(std::move(prompts)),
      config_(config) {
  if (!store_ || !embedder_ || !prompts_) throw PreconditionError("manual retriever needs a store, embedder and prompts");
  config_.mmr.validate();
}

RetrievalResult ManualRetriever::retrieve(const std::string& subtask, llm::UsageMeter* scoped) const {
  if (text::trim(subtask).empty()) throw PreconditionError("manual retrieval needs a non-empty task");
  RetrievalResult result;
  result.trace.kind = "manual";

  const auto query = embedder_->embed(subtask);
  const auto hits = store_->top_k(query, config_.mmr.candidate_k, embedder_->fingerprint());
  result.trace.candidates = hits.size();
  if (hits.empty() || hits.front().score < config_.refusal_threshold) {
    result.trace.refused = true;
    if (!hits.empty()) result.trace.scores.push_back(hits.front().score);
    result.text = paired(subtask, kManualRefusal);
    return result;
  }

  std::vector<std::int64_t> ids;
  std::vector<EmbeddingVector> vecs;
  for (const auto& h : hits) {
    ids.push_back(h.chunk->id);
    vecs.push_back(store_->vectors()[h.index]);
  }
  const auto picked = mmr_select_indices(ids, vecs, query, config_.mmr);
  result.trace.selected = picked.size();
  std::string context;
  for (std::size_t i : picked) {
    const Chunk* c = hits[i].chunk;
    result.trace.chunk_ids.push_back(c->id);
    result.trace.scores.push_back(hits[i].score);
    const auto page = c->page();
    context += (context.empty() ? "" : "\n\n");
    context += "[Page " + (page ? std::to_string(*page) : std::string("?")) + "]\n" + c->text;
  }

  if (gateway_) {
    try {
      auto completion = gateway_->complete(
          summary_request(*prompts_, "manual_retriever", context, subtask, config_.temperature), scoped);
      result.completions.push_back(completion);
      if (!text::trim(completion.text).empty()) {
        result.text = paired(subtask, text::trim(completion.text));
        return result;
      }
    } catch (const Error& e) {
      spdlog::warn("manual summary failed, returning the best page: {}", e.what());
    }
  }
  result.trace.summary_fallback = true;
  const Chunk* best = hits[picked.front()].chunk;
  const auto page = best->page();
  std::string excerpt = best->text.size() > 600 ? best->text.substr(0, 600) + "..." : best->text;
  result.text = paired(subtask, "Answer: " + excerpt + "\nReference: See page " +
                                    (page ? std::to_string(*page) : std::string("?")) + " for detail.");
  return result;
}

}  // namespace moldchat::retrieval
