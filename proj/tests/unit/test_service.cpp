// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include "moldchat/common/error.hpp"
#include "moldchat/service/config.hpp"
#include "moldchat/service/engine.hpp"
#include "moldchat/service/server.hpp"
#include "moldchat/service/sessions.hpp"
#include "support.hpp"

// After the project headers: resolv.h defines a _res macro that breaks Eigen.
#include <httplib.h>

using namespace moldchat;
using namespace moldchat::service;
namespace fs = std::filesystem;

namespace {

/// Sets an environment variable for the lifetime of the object.
struct ScopedEnv {
  std::string name;
  ScopedEnv(std::string n, const std::string& value) : name(std::move(n)) { ::setenv(name.c_str(), value.c_str(), 1); }
  ~ScopedEnv() { ::unsetenv(name.c_str()); }
};

nlohmann::json body_of(const httplib::Result& r) {
  REQUIRE(r);
  return nlohmann::json::parse(r->body);
}

/// Desk engine plus a served API on a free local port.
struct Server {
  std::unique_ptr<Engine> engine;
  SessionStore sessions;
  std::unique_ptr<ChatApi> api;
  int port = 0;

  explicit Server(std::unique_ptr<Engine> e, std::string token = {}, fs::path log_dir = {})
      : engine(std::move(e)), sessions(std::move(log_dir)) {
    api = std::make_unique<ChatApi>(*engine->pipeline, sessions,
                                    ApiOptions{std::move(token), engine->backend->name(), engine->tool_status});
    port = api->start_background("127.0.0.1");
  }
  ~Server() { api->stop(); }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(120, 0);
    return c;
  }
};

std::string chat_body(const std::string& message) { return nlohmann::json{{"message", message}}.dump(); }

}  // namespace

TEST_CASE("config rejects unknown keys and wrong types") {
  CHECK_THROWS_AS(ServiceConfig::from_json({{"colour", "blue"}}), ConfigError);
  CHECK_THROWS_AS(ServiceConfig::from_json({{"port", "eighty"}}), ConfigError);
  CHECK_THROWS_AS(ServiceConfig::from_json({{"fixtures", "one.json"}}), ConfigError);
  CHECK_THROWS_AS(ServiceConfig::from_json(nlohmann::json::array()), ConfigError);
  CHECK_THROWS_AS(ServiceConfig::load("/nonexistent/moldchat.json"), ConfigError);

  auto c = ServiceConfig::from_json({{"checkpoint", "models/x.json"}, {"replan_cap", 3}}, "/base");
  CHECK(c.checkpoint == fs::path("/base/models/x.json"));
  CHECK(c.replan_cap == 3);
  CHECK(c.react_cap == 6);
}

TEST_CASE("environment overrides config keys") {
  ServiceConfig c;
  {
    ScopedEnv a("MOLDCHAT_REPLAN_CAP", "2");
    ScopedEnv b("MOLDCHAT_FIXTURES", "one.json, two.json");
    ScopedEnv d("MOLDCHAT_AUTH_TOKEN", "secret");
    ScopedEnv e("MOLDCHAT_DIFFUSION_SEED", "18446744073709551615");
    c.apply_env();
  }
  CHECK(c.replan_cap == 2);
  CHECK(c.fixtures == std::vector<fs::path>{"one.json", "two.json"});
  CHECK(c.auth_token == "secret");
  CHECK(c.diffusion_seed == 18446744073709551615ULL);
  {
    ScopedEnv bad("MOLDCHAT_REACT_CAP", "six");
    CHECK_THROWS_AS(c.apply_env(), ConfigError);
  }
  for (const char* bad_seed : {"-1", "12x", "99999999999999999999999"}) {
    INFO(bad_seed);
    ScopedEnv bad("MOLDCHAT_DIFFUSION_SEED", bad_seed);
    CHECK_THROWS_AS(c.apply_env(), ConfigError);
  }
}

TEST_CASE("missing items lists every absent file and bad choice") {
  CHECK(test::desk_config().missing_items().empty());
  ServiceConfig c;
  c.checkpoint = "/nonexistent/ckpt.json";
  c.log_dir = "/nonexistent/logs";
  c.search_provider = "bing";
  const auto items = c.missing_items();
  CHECK(items == std::vector<std::string>{"checkpoint: /nonexistent/ckpt.json",
                                          "fixtures: (none configured for the scripted backend)",
                                          "search_provider: unknown value 'bing'"});
  c = ServiceConfig{};
  c.backend = "magic";
  CHECK(c.missing_items().back() == "backend: unknown value 'magic'");
  CHECK_THROWS_AS(build_engine(ServiceConfig{}), ConfigError);
}

TEST_CASE("http routes serve sessions, turns and traces") {
  Server s(test::desk_engine());
  auto cli = s.client();

  auto health = cli.Get("/api/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(body_of(health)["status"] == "ok");
  CHECK(body_of(health)["tools"]["diffusion_model"] == true);

  auto created = cli.Post("/api/sessions", "", "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const std::string id = body_of(created)["id"];
  CHECK(id == "s-000001");

  const auto turns = test::desk_turns(1);
  std::vector<std::int64_t> ids;
  for (const auto& t : turns) {
    auto r = cli.Post("/api/sessions/" + id + "/chat", chat_body(t.query), "application/json");
    REQUIRE(r);
    CHECK(r->status == 200);
    const auto b = body_of(r);
    CHECK_FALSE(b["failed"].get<bool>());
    CHECK(b["language"] == "English");
    CHECK_FALSE(b["reply"].get<std::string>().empty());
    ids.push_back(b["turn_id"]);
  }
  CHECK(ids == std::vector<std::int64_t>{1, 2, 3, 4});

  auto listed = body_of(cli.Get("/api/sessions"));
  REQUIRE(listed["sessions"].size() == 1);
  CHECK(listed["sessions"][0]["turns"] == turns.size());
  CHECK(listed["sessions"][0]["busy"] == false);

  auto history = body_of(cli.Get("/api/sessions/" + id + "/turns"));
  REQUIRE(history["turns"].size() == turns.size());
  for (std::size_t i = 0; i < turns.size(); ++i) {
    CHECK(history["turns"][i]["user_input"] == turns[i].query);
    CHECK(history["turns"][i]["status"] == "done");
  }

  for (auto turn_id : ids) {
    auto trace = body_of(cli.Get("/api/turns/" + std::to_string(turn_id) + "/trace"));
    CHECK(trace["session_id"] == id);
    REQUIRE(trace["stages"].is_array());
    CHECK(trace["stages"][0]["stage"] == "format");
    double total = 0.0;
    for (const auto& st : trace["stages"]) total += st["duration_s"].get<double>();
    CHECK(total <= trace["latency_s"].get<double>() + 1e-9);
    CHECK(trace["usage"]["input_tokens"].get<std::int64_t>() > 0);
  }

  CHECK(cli.Post("/api/sessions/" + id + "/chat", "not json", "application/json")->status == 400);
  CHECK(cli.Post("/api/sessions/" + id + "/chat", R"({"text": "hi"})", "application/json")->status == 400);
  CHECK(cli.Post("/api/sessions/s-999999/chat", chat_body("hi"), "application/json")->status == 404);
  CHECK(cli.Get("/api/sessions/s-999999/turns")->status == 404);
  CHECK(cli.Get("/api/turns/999/trace")->status == 404);
  CHECK(cli.Get("/api/turns/abc/trace")->status == 404);
  CHECK(cli.Get("/api/turns/1x/trace")->status == 404);
}

TEST_CASE("bearer token guards every route except health") {
  Server s(test::desk_engine(), "tok");
  auto cli = s.client();
  CHECK(cli.Get("/api/health")->status == 200);
  CHECK(cli.Get("/api/sessions")->status == 401);
  CHECK(cli.Post("/api/sessions", "", "application/json")->status == 401);
  CHECK(cli.Get("/api/sessions", {{"Authorization", "Bearer nope"}})->status == 401);
  CHECK(cli.Get("/api/sessions", {{"Authorization", "Bearer tok"}})->status == 200);
  CHECK(cli.Post("/api/sessions", {{"Authorization", "Bearer tok"}}, "", "application/json")->status == 201);
}

TEST_CASE("a second message while a turn is running gets 409") {
  std::mutex mu;
  std::condition_variable cv;
  bool released = false;
  std::atomic<bool> entered{false};
  auto desk = test::desk_backend();
  auto backend = std::make_shared<test::CallbackBackend>([&](const llm::CompletionRequest& r) {
    if (r.stage_tag == "task_formatter") {
      entered = true;
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return released; });
    }
    return desk->complete(r);
  });
  Server s(build_engine(test::desk_config(), backend));
  auto cli = s.client();
  const std::string id = body_of(cli.Post("/api/sessions", "", "application/json"))["id"];
  const std::string query = test::desk_turns(1)[0].query;

  int first_status = 0;
  std::thread first([&] {
    auto c = s.client();
    auto r = c.Post("/api/sessions/" + id + "/chat", chat_body(query), "application/json");
    first_status = r ? r->status : -1;
  });
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(30);
  while (!entered && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  REQUIRE(entered);

  CHECK(cli.Post("/api/sessions/" + id + "/chat", chat_body("again"), "application/json")->status == 409);
  auto listed = body_of(cli.Get("/api/sessions"));
  CHECK(listed["sessions"][0]["busy"] == true);
  auto pending = body_of(cli.Get("/api/sessions/" + id + "/turns"));
  REQUIRE(pending["turns"].size() == 1);
  CHECK(pending["turns"][0]["status"] == "pending");
  CHECK(pending["turns"][0]["user_input"] == query);

  {
    std::lock_guard lock(mu);
    released = true;
  }
  cv.notify_all();
  first.join();
  CHECK(first_status == 200);
  auto done = body_of(cli.Get("/api/sessions/" + id + "/turns"));
  REQUIRE(done["turns"].size() == 1);
  CHECK(done["turns"][0]["status"] == "done");
}

TEST_CASE("session logs replay to the same history and survive a restart") {
  const auto dir = test::fresh_dir("sessions");
  auto engine = test::desk_engine();
  std::string id;
  std::vector<std::int64_t> turn_ids;
  orchestrator::ChatHistory live;
  {
    SessionStore store(dir);
    id = store.create().id;
    for (const auto& t : test::desk_turns(1)) {
      auto out = store.chat(id, t.query, *engine->pipeline);
      REQUIRE(out.status == ChatStatus::kOk);
      turn_ids.push_back(out.record->turn_id);
    }
    CHECK(store.chat(id, "   ", *engine->pipeline).status == ChatStatus::kOk);
    CHECK(store.chat("s-424242", "hi", *engine->pipeline).status == ChatStatus::kNotFound);
    live = *store.history(id);
  }
  CHECK(live.size() == 8);
  CHECK(SessionStore::replay(dir / (id + ".jsonl")) == live);

  SessionStore reloaded(dir);
  CHECK(*reloaded.history(id) == live);
  REQUIRE(reloaded.list().size() == 1);
  CHECK(reloaded.list()[0].turns == 5);
  for (auto tid : turn_ids) CHECK(reloaded.turn(tid).has_value());
  CHECK(reloaded.create().id == "s-000002");
  auto next = reloaded.chat(id, "what is a burr?", *engine->pipeline);
  CHECK(next.record->turn_id == turn_ids.back() + 2);

  {
    std::ofstream torn(dir / (id + ".jsonl"), std::ios::app);
    torn << R"({"type": "turn", "turn_id": 9)";
  }
  SessionStore after_crash(dir);
  CHECK(after_crash.history(id)->size() == 10);
  CHECK_THROWS_AS(SessionStore::replay(dir / "none.jsonl"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("without a checkpoint the diffusion tool is unavailable but turns still finish") {
  auto config = test::desk_config();
  config.checkpoint.clear();
  auto engine = build_engine(config);
  CHECK(engine->tool_status.at("diffusion_model") == false);
  CHECK(engine->tool_status.at("table_retriever") == true);
  std::string query;
  for (const auto& t : eval::load_suite(test::data_dir() / "suites" / "desk.suite.json")) {
    if (t.id == "diffusion-01") query = t.query;
  }
  REQUIRE_FALSE(query.empty());
  orchestrator::ChatHistory h;
  auto turn = engine->pipeline->run_turn(query, h);
  CHECK_FALSE(turn.failed);
  CHECK(turn.trace.has_flag("tool_error"));
  CHECK_FALSE(turn.final_report.empty());
}
