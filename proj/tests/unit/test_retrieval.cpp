// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "moldchat/common/error.hpp"
#include "moldchat/llm/gateway.hpp"
#include "moldchat/llm/prompts.hpp"
#include "moldchat/retrieval/embedding.hpp"
#include "moldchat/retrieval/ingest.hpp"
#include "moldchat/retrieval/mmr.hpp"
#include "moldchat/retrieval/retrievers.hpp"
#include "moldchat/retrieval/vector_store.hpp"
#include "support.hpp"

using namespace moldchat;
using namespace moldchat::retrieval;

namespace {

EmbeddingVector random_vec(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(d);
  for (auto& x : v) x = g(rng);
  return EmbeddingVector(std::move(v));
}

struct Knowledge {
  std::shared_ptr<const HashingEmbedder> embedder = std::make_shared<HashingEmbedder>();
  std::shared_ptr<const VectorStore> table;
  std::shared_ptr<const VectorStore> manual;
  std::shared_ptr<const llm::PromptLibrary> prompts;

  Knowledge() {
    const auto dir = test::data_dir() / "knowledge";
    table = std::make_shared<VectorStore>(VectorStore::build(
        ingest_table_files(dir / "table_directions.csv", dir / "table_priorities.csv"), *embedder));
    manual = std::make_shared<VectorStore>(
        VectorStore::build(ingest_manual_file(dir / "manual_pages.jsonl"), *embedder));
    prompts = std::make_shared<llm::PromptLibrary>(llm::PromptLibrary::load(test::prompts_dir()));
  }
};

}  // namespace

TEST_CASE("embedding vectors are unit norm and cosine is symmetric") {
  EmbeddingVector v({3.0, 4.0});
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.8));
  EmbeddingVector w({1.0, 0.0});
  CHECK(cosine(v, w) == cosine(w, v));
  CHECK(cosine(v, v) == doctest::Approx(1.0));
  CHECK_THROWS_AS(EmbeddingVector(std::vector<double>{0.0, 0.0}), ValidationError);
  CHECK_THROWS(cosine(v, EmbeddingVector({1.0, 0.0, 0.0})));
  CHECK_THROWS(EmbeddingVector::from_normalized({1.0, 1.0}));
}

TEST_CASE("hashing embedder is deterministic and fingerprinted by dimension") {
  HashingEmbedder a(64), b(64), c(128);
  CHECK(a.embed("Burr on the parting line") == b.embed("Burr on the parting line"));
  CHECK(a.embed("burr").dim() == 64);
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint() != c.fingerprint());
  CHECK(cosine(a.embed("mold temperature for ABS"), a.embed("ABS mold temperature")) >
        cosine(a.embed("mold temperature for ABS"), a.embed("oil filter replacement")));
  auto rebuilt = make_embedder(a.fingerprint());
  CHECK(rebuilt->fingerprint() == a.fingerprint());
  CHECK_THROWS_AS(make_embedder("bogus"), ConfigError);
}

TEST_CASE("vector store top_k orders by cosine and breaks ties by id") {
  VectorStore store("f", 2);
  store.add(Chunk{5, "a", ChunkSource::kManualPage, {}}, EmbeddingVector({1.0, 0.0}));
  store.add(Chunk{2, "b", ChunkSource::kManualPage, {}}, EmbeddingVector({1.0, 0.0}));
  store.add(Chunk{9, "c", ChunkSource::kManualPage, {}}, EmbeddingVector({0.0, 1.0}));
  auto hits = store.top_k(EmbeddingVector({1.0, 0.1}), 2, "f");
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].chunk->id == 2);
  CHECK(hits[1].chunk->id == 5);
  CHECK(store.top_k(EmbeddingVector({1.0, 0.0}), 10, "f").size() == 3);
  CHECK_THROWS_AS(store.top_k(EmbeddingVector({1.0, 0.0}), 1, "other"), ConfigError);
  CHECK_THROWS(store.add(Chunk{1, "d", ChunkSource::kManualPage, {}}, EmbeddingVector({1.0, 0.0, 0.0})));
}

TEST_CASE("vector store round-trips bit-exactly") {
  Knowledge k;
  const auto dir = test::fresh_dir("store");
  k.manual->save(dir / "manual.json");
  auto loaded = VectorStore::load(dir / "manual.json");
  CHECK(loaded == *k.manual);
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded.vectors()[i].values() == k.manual->vectors()[i].values());
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("MMR matches brute-force greedy evaluation on random corpora") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<std::int64_t> ids;
    std::vector<EmbeddingVector> vecs;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back(static_cast<std::int64_t>(rng() % 50));
      // Duplicate vectors exercise the tie-break path.
      if (i > 0 && rng() % 4 == 0) {
        vecs.push_back(vecs[rng() % i]);
      } else {
        vecs.push_back(random_vec(rng, 8));
      }
    }
    const auto query = random_vec(rng, 8);
    const std::size_t select = 1 + rng() % 12;
    for (double lambda : {0.0, 0.3, 0.5, 0.7, 1.0}) {
      MMRConfig config{lambda, 12, select};
      CHECK(mmr_select_indices(ids, vecs, query, config) == test::brute_force_mmr(ids, vecs, query, lambda, select));
    }
  }
}

TEST_CASE("MMR with lambda one reproduces the relevance order") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    VectorStore store("f", 8);
    const std::size_t n = 2 + rng() % 11;
    for (std::size_t i = 0; i < n; ++i) {
      store.add(Chunk{static_cast<std::int64_t>(i), "c", ChunkSource::kManualPage, {}}, random_vec(rng, 8));
    }
    const auto query = random_vec(rng, 8);
    const auto hits = store.top_k(query, n, "f");
    std::vector<std::int64_t> ids;
    std::vector<EmbeddingVector> vecs;
    for (const auto& h : hits) {
      ids.push_back(h.chunk->id);
      vecs.push_back(store.vectors()[h.index]);
    }
    auto order = mmr_select_indices(ids, vecs, query, MMRConfig{1.0, 12, n});
    for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i] == i);
  }
}

TEST_CASE("MMR validates its configuration and inputs") {
  const std::vector<EmbeddingVector> one{EmbeddingVector({1.0, 0.0})};
  const EmbeddingVector q({1.0, 0.0});
  CHECK_THROWS_AS(mmr_select_indices({1}, one, q, MMRConfig{1.5, 20, 7}), PreconditionError);
  CHECK_THROWS_AS(mmr_select_indices({1}, one, q, MMRConfig{0.5, 20, 0}), PreconditionError);
  CHECK_THROWS_AS(mmr_select_indices({1}, one, q, MMRConfig{0.5, 5, 7}), PreconditionError);
  CHECK_THROWS_AS(mmr_select_indices({}, {}, q, MMRConfig{}), PreconditionError);
  CHECK_THROWS_AS(mmr_select_indices({1, 2}, one, q, MMRConfig{}), PreconditionError);
  CHECK(mmr_select_indices({1}, one, q, MMRConfig{}) == std::vector<std::size_t>{0});
}

TEST_CASE("MMR trades relevance for diversity below lambda one") {
  // Two near-duplicates and one orthogonal-ish candidate.
  std::vector<EmbeddingVector> vecs{EmbeddingVector({1.0, 0.0, 0.0}), EmbeddingVector({0.99, 0.01, 0.0}),
                                    EmbeddingVector({0.6, 0.0, 0.8})};
  EmbeddingVector q({1.0, 0.0, 0.2});
  CHECK(mmr_select_indices({1, 2, 3}, vecs, q, MMRConfig{1.0, 3, 2}) == std::vector<std::size_t>{0, 1});
  CHECK(mmr_select_indices({1, 2, 3}, vecs, q, MMRConfig{0.5, 3, 2}) == std::vector<std::size_t>{0, 2});
}

TEST_CASE("csv parsing handles quotes and embedded separators") {
  auto rows = parse_csv("a,\"b,c\",\"say \"\"hi\"\"\"\r\n1,,3\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == CsvRow{"a", "b,c", "say \"hi\""});
  CHECK(rows[1] == CsvRow{"1", "", "3"});
}

TEST_CASE("troubleshooting table ingestion") {
  const std::string dir_csv = "Defect,Speed,Pressure\nBurr|Flash,-,+\n";
  const std::string pri_csv = "Defect,Speed,Pressure\nBurr|Flash,2,1\n";
  auto table = parse_table(dir_csv, pri_csv);
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].defect == "Burr");
  CHECK(table.rows[0].aliases == std::vector<std::string>{"Flash"});
  auto chunks = ingest_table(dir_csv, pri_csv);
  REQUIRE(chunks.size() == 2);
  CHECK(chunks[0].source == ChunkSource::kTableDirection);
  CHECK(chunks[1].source == ChunkSource::kTablePriority);
  CHECK(chunks[1].text.find("Pressure: 1\nSpeed: 2") != std::string::npos);

  CHECK_THROWS(parse_table(dir_csv, "Defect,Pressure,Speed\nBurr|Flash,1,2\n"));
  CHECK_THROWS(parse_table("Defect,Speed\nBurr,x\n", "Defect,Speed\nBurr,1\n"));
  CHECK_THROWS(parse_table("Defect,Speed\nBurr,+\n", "Defect,Speed\nBurr,\n"));
  CHECK_THROWS(parse_table("Defect,Speed\nBurr,+\n", "Defect,Speed\nWarpage,1\n"));

  auto desk = ingest_table_files(test::data_dir() / "knowledge" / "table_directions.csv",
                                 test::data_dir() / "knowledge" / "table_priorities.csv");
  CHECK(desk.size() == 16);
}

TEST_CASE("manual ingestion keys chunks by page") {
  auto pages = ingest_manual("{\"page\": 7, \"content\": \"seven\"}\n\n{\"page\": 2, \"content\": \"two\"}\n");
  REQUIRE(pages.size() == 2);
  CHECK(pages[0].page() == 2);
  CHECK(pages[0].id == 2);
  CHECK(pages[1].text == "seven");
  CHECK(ingest_manual("{\"page\": 1}\n{\"page\": 4, \"content\": \"four\"}\n").size() == 1);
  CHECK_THROWS(ingest_manual("{\"page\": 0, \"content\": \"zero\"}\n"));
  CHECK_THROWS(ingest_manual("{\"page\": 1, \"content\": \"a\"}\n{\"page\": 1, \"content\": \"b\"}\n"));
  CHECK(ingest_manual_file(test::data_dir() / "knowledge" / "manual_pages.jsonl").size() == 22);
}

TEST_CASE("table retriever uses exactly two chunks and renders priorities without a gateway") {
  Knowledge k;
  TableRetriever retriever(k.table, k.embedder, nullptr, k.prompts);
  CHECK(retriever.mentioned_defects("Flash appears on the parting line") == std::vector<std::string>{"Burr"});
  CHECK(retriever.mentioned_defects("short shots and warpage").size() == 2);
  CHECK(retriever.mentioned_defects("flashing lights").empty());

  auto r = retriever.retrieve("Retrieve the process parameter adjustments for the burr defect");
  CHECK(r.trace.kind == "table");
  CHECK(r.trace.candidates == 2);
  CHECK(r.trace.selected == 2);
  CHECK(r.trace.chunk_ids.size() == 2);
  for (auto id : r.trace.chunk_ids) {
    const auto& chunks = k.table->chunks();
    auto it = std::find_if(chunks.begin(), chunks.end(), [&](const Chunk& c) { return c.id == id; });
    REQUIRE(it != chunks.end());
    CHECK(it->meta.at("defect") == "Burr");
  }
  CHECK(r.trace.summary_fallback);
  CHECK_FALSE(r.trace.refused);
  CHECK(r.text.find("(Priority: 1) → (Hold Pressure, Decrease)") != std::string::npos);
  CHECK(r.text.find("(Priority: 2) → (Injection Pressure 3, Decrease)") != std::string::npos);

  auto refused = retriever.retrieve("How do I fix my part?");
  CHECK(refused.trace.refused);
  CHECK(refused.trace.selected == 2);
  CHECK(refused.text.find(kTableRefusal) != std::string::npos);
  CHECK_THROWS_AS(retriever.retrieve("   "), PreconditionError);
}

TEST_CASE("table retriever summarizes through the gateway") {
  Knowledge k;
  std::string seen;
  auto backend = std::make_shared<test::CallbackBackend>([&](const llm::CompletionRequest& r) {
    seen = r.stage_tag;
    return llm::BackendReply{"summary text", {10, 2}};
  });
  llm::Gateway gw(backend, llm::PriceTable{}, "m");
  TableRetriever retriever(k.table, k.embedder, &gw, k.prompts);
  auto r = retriever.retrieve("sink mark adjustments");
  CHECK(seen == "table_retriever");
  CHECK_FALSE(r.trace.summary_fallback);
  CHECK(r.completions.size() == 1);
  CHECK(r.text.find("summary text") != std::string::npos);
}

TEST_CASE("manual retriever evaluates at most twenty candidates and selects at most seven") {
  Knowledge k;
  int calls = 0;
  auto backend = std::make_shared<test::CallbackBackend>([&](const llm::CompletionRequest& r) {
    ++calls;
    CHECK(r.stage_tag == "manual_retriever");
    return llm::BackendReply{"Answer: see page 21", {}};
  });
  llm::Gateway gw(backend, llm::PriceTable{}, "m");
  ManualRetriever retriever(k.manual, k.embedder, &gw, k.prompts);
  for (const char* q : {"What is the recommended mold temperature for ABS?", "How often should the oil filter be replaced?",
                        "purging procedure when changing resin", "heater alarm on barrel zone"}) {
    auto r = retriever.retrieve(q);
    CHECK(r.trace.kind == "manual");
    CHECK(r.trace.candidates <= 20);
    CHECK(r.trace.candidates == 20);
    CHECK(r.trace.selected <= 7);
    CHECK(r.trace.selected >= 1);
    CHECK(r.trace.chunk_ids.size() == r.trace.selected);
    CHECK_FALSE(r.trace.refused);
  }
  CHECK(calls == 4);

  ManualRetriever offline(k.manual, k.embedder, nullptr, k.prompts);
  auto r = offline.retrieve("How often should the oil filter be replaced?");
  CHECK(r.trace.summary_fallback);
  CHECK(r.text.find("Reference: See page") != std::string::npos);

  auto refused = offline.retrieve("what is the weather");
  CHECK(refused.trace.refused);
  CHECK(refused.text.find(kManualRefusal) != std::string::npos);
}
