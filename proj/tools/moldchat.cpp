// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

// moldchat command-line entry point.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "moldchat/common/error.hpp"
#include "moldchat/common/text.hpp"
#include "moldchat/diffusion/checkpoint.hpp"
#include "moldchat/diffusion/dataset.hpp"
#include "moldchat/eval/harness.hpp"
#include "moldchat/retrieval/ingest.hpp"
#include "moldchat/retrieval/vector_store.hpp"
#include "moldchat/service/engine.hpp"
#include "moldchat/service/server.hpp"
#include "moldchat/service/sessions.hpp"
#include "moldchat/surrogate/gbt.hpp"

namespace fs = std::filesystem;
using namespace moldchat;

namespace {

/// Options shared by every command that builds the chat engine.
struct EngineOptions {
  std::string config;
  std::string backend;
  std::vector<std::string> fixtures;
  std::string checkpoint;
  std::string surrogate;
  std::string log_dir;
  int replan_cap = 0;
  int react_cap = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config, "Service config file (JSON); default: bundled desk config")
        ->check(CLI::ExistingFile);
    cmd->add_option("--backend", backend, "Model backend: scripted or live");
    cmd->add_option("--fixture", fixtures, "Scripted fixture file(s), replacing the configured ones");
    cmd->add_option("--checkpoint", checkpoint, "Diffusion checkpoint");
    cmd->add_option("--surrogate", surrogate, "Surrogate model file");
    cmd->add_option("--log-dir", log_dir, "Session log directory");
    cmd->add_option("--replan-cap", replan_cap, "Planning rounds allowed per turn");
    cmd->add_option("--react-cap", react_cap, "ReAct rounds allowed per turn");
  }

  service::ServiceConfig resolve() const {
    service::ServiceConfig c;
    const fs::path bundled = fs::path(MOLDCHAT_DATA_DIR) / "desk.config.json";
    if (!config.empty()) {
      c = service::ServiceConfig::load(config);
    } else if (fs::exists(bundled)) {
      c = service::ServiceConfig::load(bundled);
    }
    c.apply_env();
    if (!backend.empty()) c.backend = backend;
    if (!fixtures.empty()) c.fixtures.assign(fixtures.begin(), fixtures.end());
    if (!checkpoint.empty()) c.checkpoint = checkpoint;
    if (!surrogate.empty()) c.surrogate = surrogate;
    if (!log_dir.empty()) c.log_dir = log_dir;
    if (replan_cap > 0) c.replan_cap = replan_cap;
    if (react_cap > 0) c.react_cap = react_cap;
    return c;
  }
};

void print_trace(const orchestrator::TurnTrace& trace) {
  for (const auto& s : trace.stages()) {
    std::cout << "  [" << s.stage << "]";
    if (s.detail.contains("tool")) std::cout << " " << s.detail.at("tool").get<std::string>();
    if (!s.flags.empty()) std::cout << " {" << text::join(s.flags, ",") << "}";
    std::cout << " " << text::fixed(s.duration.count(), 3) << "s\n";
  }
}

int cmd_chat(const EngineOptions& opts) {
  auto engine = service::build_engine(opts.resolve());
  orchestrator::ChatHistory history;
  std::optional<orchestrator::ChatTurn> last;
  std::cout << "moldchat (" << engine->backend->name() << " backend). :trace shows the last turn, :quit exits.\n";
  std::string line;
  while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
    const std::string cmd = text::trim(line);
    if (cmd == ":quit" || cmd == ":q") break;
    if (cmd == ":trace") {
      if (last) print_trace(last->trace);
      continue;
    }
    last = engine->pipeline->run_turn(line, history);
    std::cout << last->final_report << "\n";
    std::cout << "  (" << last->language << ", " << text::fixed(last->latency.count(), 2) << " s, $"
              << text::fixed(last->cost, 6) << ")\n";
  }
  return 0;
}

int cmd_serve(const EngineOptions& opts, const std::string& host, int port) {
  auto config = opts.resolve();
  if (!host.empty()) config.host = host;
  if (port > 0) config.port = port;
  auto engine = service::build_engine(config);
  service::SessionStore sessions(config.log_dir);
  service::ApiOptions api{config.auth_token, engine->backend->name(), engine->tool_status};
  service::ChatApi server(*engine->pipeline, sessions, api);
  server.listen(config.host, config.port);
  return 0;
}

int cmd_ingest(const std::string& directions, const std::string& priorities, const std::string& manual,
               const std::string& out_dir, const std::string& embedder_kind) {
  if (directions.empty() != priorities.empty()) {
    throw PreconditionError("--directions and --priorities must be given together");
  }
  if (directions.empty() && manual.empty()) throw PreconditionError("nothing to ingest");
  fs::create_directories(out_dir);
  auto embedder = retrieval::make_embedder(embedder_kind);
  if (!directions.empty()) {
    auto chunks = retrieval::ingest_table_files(directions, priorities);
    auto store = retrieval::VectorStore::build(chunks, *embedder);
    store.save(fs::path(out_dir) / "table.mcvs");
    std::cout << "table: " << chunks.size() << " chunks -> " << (fs::path(out_dir) / "table.mcvs").string() << "\n";
  }
  if (!manual.empty()) {
    auto chunks = retrieval::ingest_manual_file(manual);
    auto store = retrieval::VectorStore::build(chunks, *embedder);
    store.save(fs::path(out_dir) / "manual.mcvs");
    std::cout << "manual: " << chunks.size() << " pages -> " << (fs::path(out_dir) / "manual.mcvs").string()
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moldchat: injection-molding assistant, diffusion recommender and evaluation tools"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  // chat
  EngineOptions chat_opts;
  auto* chat = app.add_subcommand("chat", "Interactive chat in the terminal");
  chat_opts.add_to(chat);

  // serve
  EngineOptions serve_opts;
  std::string host;
  int port = 0;
  auto* serve = app.add_subcommand("serve", "Run the HTTP chat service");
  serve_opts.add_to(serve);
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");

  // ingest
  std::string directions, priorities, manual, out_dir = "stores", embedder_kind = "hash";
  auto* ingest = app.add_subcommand("ingest", "Build vector stores from the table CSVs and manual pages");
  ingest->add_option("--directions", directions, "Adjustment-direction CSV")->check(CLI::ExistingFile);
  ingest->add_option("--priorities", priorities, "Adjustment-priority CSV")->check(CLI::ExistingFile);
  ingest->add_option("--manual", manual, "Manual pages (JSONL)")->check(CLI::ExistingFile);
  ingest->add_option("--out-dir", out_dir, "Output directory");
  ingest->add_option("--embedder", embedder_kind, "Embedder: hash or remote");

  // synth-data
  std::size_t synth_rows = 2000;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth-data", "Write a synthetic two-class process dataset (TSV)");
  synth->add_option("--rows", synth_rows, "Number of rows");
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--out", synth_out, "Output TSV")->required();

  // train-diffusion
  std::string train_data, train_out, schedule_kind = "linear";
  diffusion::ModelSpec spec;
  bool scaled_beta = false;
  auto* train = app.add_subcommand("train-diffusion", "Train the conditional diffusion model");
  train->add_option("--data", train_data, "Training TSV")->required()->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "Checkpoint path")->required();
  train->add_option("--seed", spec.train.seed, "Random seed");
  train->add_option("--epochs", spec.train.epochs, "Epochs");
  train->add_option("--batch", spec.train.batch_size, "Batch size");
  train->add_option("--lr", spec.train.learning_rate, "Learning rate");
  train->add_option("--drop", spec.train.cond_drop_prob, "Condition drop probability");
  train->add_option("--ema", spec.train.ema_decay, "Weight EMA decay (0 disables)");
  train->add_option("--hidden", spec.train.topology.hidden, "Hidden width");
  train->add_option("--layers", spec.train.topology.layers, "Hidden layers");
  train->add_option("--steps", spec.steps, "Diffusion steps T");
  train->add_option("--schedule", schedule_kind, "linear or cosine");
  train->add_option("--beta-min", spec.beta_min, "First beta");
  train->add_option("--beta-max", spec.beta_max, "Last beta");
  train->add_flag("--scaled-beta", scaled_beta, "Stretch the default beta range by 1000 / steps");

  // sample
  std::string sample_ckpt, sample_surrogate;
  double mt = 0, mh = 0, ft = 0, fh = 0, guidance = diffusion::kDefaultGuidance;
  int product_class = 0;
  std::size_t n_candidates = diffusion::kDefaultCandidates;
  std::uint64_t sample_seed = 0;
  bool sample_json = false;
  auto* sample = app.add_subcommand("sample", "Generate process parameters for an environment");
  sample->add_option("--checkpoint", sample_ckpt, "Diffusion checkpoint")->required()->check(CLI::ExistingFile);
  sample->add_option("--surrogate", sample_surrogate, "Surrogate model; ranks candidates when given")
      ->check(CLI::ExistingFile);
  sample->add_option("--machine-temp", mt, "Machine temperature (C)")->required();
  sample->add_option("--machine-hum", mh, "Machine humidity (%)")->required();
  sample->add_option("--factory-temp", ft, "Factory temperature (C)")->required();
  sample->add_option("--factory-hum", fh, "Factory humidity (%)")->required();
  sample->add_option("--class", product_class, "0 good, 1 defective")->check(CLI::Range(0, 1));
  sample->add_option("--n", n_candidates, "Candidates")->check(CLI::PositiveNumber);
  sample->add_option("--guidance", guidance, "Guidance weight w");
  sample->add_option("--seed", sample_seed, "Random seed");
  sample->add_flag("--json", sample_json, "Print JSON");

  // fit-surrogate
  std::string fit_data, fit_out;
  surrogate::GBTHyper hyper;
  auto* fit = app.add_subcommand("fit-surrogate", "Fit the good-probability surrogate on a dataset");
  fit->add_option("--data", fit_data, "Training TSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--out", fit_out, "Model path (JSON)")->required();
  fit->add_option("--trees", hyper.trees, "Trees");
  fit->add_option("--depth", hyper.depth, "Tree depth");
  fit->add_option("--lr", hyper.learning_rate, "Learning rate");
  fit->add_option("--seed", hyper.seed, "Seed");

  // eval-run
  EngineOptions eval_opts;
  std::string suite_path, report_stem = "eval_report", human_path;
  bool no_judge = false;
  std::size_t concurrency = 1;
  auto* eval_run = app.add_subcommand("eval-run", "Run an evaluation suite and write the report");
  eval_opts.add_to(eval_run);
  eval_run->add_option("--suite", suite_path, "Suite file")->required()->check(CLI::ExistingFile);
  eval_run->add_option("--out", report_stem, "Report path without extension");
  eval_run->add_option("--human", human_path, "Human scores {id: score}")->check(CLI::ExistingFile);
  eval_run->add_flag("--no-judge", no_judge, "Skip judge scoring");
  eval_run->add_option("--concurrency", concurrency, "Tasks run at once")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*chat) return cmd_chat(chat_opts);
    if (*serve) return cmd_serve(serve_opts, host, port);
    if (*ingest) return cmd_ingest(directions, priorities, manual, out_dir, embedder_kind);
    if (*synth) {
      auto rows = diffusion::make_synthetic({}, synth_rows, synth_seed);
      diffusion::save_dataset(rows, synth_out);
      std::cout << "wrote " << rows.size() << " rows to " << synth_out << "\n";
      return 0;
    }
    if (*train) {
      if (scaled_beta) {
        auto scaled = diffusion::ModelSpec::scaled_for(spec.steps);
        spec.beta_min = scaled.beta_min;
        spec.beta_max = scaled.beta_max;
      }
      spec.kind = diffusion::schedule_kind_from_string(schedule_kind);
      auto data = diffusion::load_dataset(train_data);
      diffusion::TrainReport report;
      auto model = diffusion::fit_model(data, spec, &report, [&](int epoch, double loss) {
        if (epoch == 1 || epoch % 20 == 0 || epoch == spec.train.epochs) {
          std::cout << "epoch " << epoch << " loss " << text::fixed(loss, 5) << "\n";
        }
      });
      diffusion::save_checkpoint(model, train_out);
      std::cout << "saved " << train_out << " (" << report.steps << " steps)\n";
      return 0;
    }
    if (*sample) {
      auto model = diffusion::load_checkpoint(sample_ckpt);
      diffusion::EnvCondition cond{product_class == 1 ? diffusion::ProductClass::kDefective
                                                      : diffusion::ProductClass::kGood,
                                   ft, fh, mt, mh};
      auto cands = diffusion::generate_candidates(model.context(), cond, guidance, n_candidates, sample_seed);
      std::size_t best = 0;
      std::vector<double> scores;
      if (!sample_surrogate.empty()) {
        auto gbt = surrogate::GBTModel::load(sample_surrogate);
        std::vector<diffusion::ProcessParams> params;
        for (const auto& c : cands) params.push_back(c.params);
        auto ranking = surrogate::rank_candidates(gbt, cond, params);
        best = ranking.best;
        scores = ranking.scores;
      }
      if (sample_json) {
        nlohmann::json out{{"best_index", best}, {"best", cands[best].params.to_json()}, {"scores", scores}};
        out["candidates"] = nlohmann::json::array();
        for (const auto& c : cands) out["candidates"].push_back(c.params.to_json());
        std::cout << out.dump(2) << "\n";
      } else {
        std::cout << "candidate " << best << " of " << cands.size();
        if (!scores.empty()) std::cout << " (good probability " << text::fixed(scores[best], 3) << ")";
        std::cout << "\n" << cands[best].params.to_text(2) << "\n";
      }
      return 0;
    }
    if (*fit) {
      auto data = diffusion::load_dataset(fit_data);
      auto records = surrogate::to_labeled(data);
      auto model = surrogate::fit(records, hyper);
      std::size_t correct = 0;
      for (const auto& r : records) {
        const bool good = model.good_probability(r.features) >= 0.5;
        correct += good == (r.label == surrogate::Label::kGood) ? 1 : 0;
      }
      model.save(fit_out);
      std::cout << "saved " << fit_out << " (training accuracy "
                << text::fixed(static_cast<double>(correct) / static_cast<double>(records.size()), 4) << ")\n";
      return 0;
    }
    if (*eval_run) {
      auto engine = service::build_engine(eval_opts.resolve());
      auto tasks = eval::load_suite(suite_path);
      const auto& pipeline = *engine->pipeline;
      auto records = eval::run_suite(
          tasks,
          [&](const std::string& q) {
            orchestrator::ChatHistory h;
            return pipeline.run_turn(q, h);
          },
          concurrency);
      if (!no_judge) eval::judge_records(records, *engine->gateway, *engine->prompts);
      if (!human_path.empty()) eval::attach_human_scores(records, eval::load_human_scores(human_path));
      auto report = eval::aggregate(records);
      eval::write_report(report, records, report_stem);
      std::cout << report.to_tsv();
      std::cout << "wrote " << report_stem << ".json and " << report_stem << ".tsv\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
