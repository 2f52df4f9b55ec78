// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "moldchat/common/error.hpp"
#include "moldchat/diffusion/checkpoint.hpp"
#include "moldchat/diffusion/dataset.hpp"
#include "moldchat/diffusion/denoiser.hpp"
#include "moldchat/diffusion/normalizer.hpp"
#include "moldchat/diffusion/sampler.hpp"
#include "moldchat/diffusion/schedule.hpp"
#include "moldchat/diffusion/trainer.hpp"
#include "support.hpp"

using namespace moldchat;
using namespace moldchat::diffusion;

namespace {

Topology small_topology() {
  Topology t;
  t.hidden = 8;
  t.layers = 2;
  t.time_dim = 4;
  return t;
}

ModelSpec quick_spec(int epochs) {
  auto spec = ModelSpec::scaled_for(50);
  spec.train.epochs = epochs;
  spec.train.topology = small_topology();
  spec.train.seed = 3;
  return spec;
}

EnvCondition env(ProductClass c) { return EnvCondition{c, 25.0, 45.0, 24.0, 40.0}; }

}  // namespace

TEST_CASE("linear schedule endpoints and monotone alpha-bar") {
  auto s = make_schedule(1000);
  CHECK(s.beta_at(1) == doctest::Approx(1e-4));
  CHECK(s.beta_at(1000) == doctest::Approx(0.02));
  CHECK(s.alpha_bar_at(1) == doctest::Approx(1.0 - 1e-4));
  for (int t = 2; t <= 1000; ++t) {
    CHECK(s.alpha_bar_at(t) < s.alpha_bar_at(t - 1));
    CHECK(s.alpha_at(t) == doctest::Approx(1.0 - s.beta_at(t)));
    CHECK(s.sigma_at(t) * s.sigma_at(t) == doctest::Approx(s.beta_at(t)));
  }
  CHECK(s.alpha_bar_at(1000) < 1e-4);

  auto c = make_schedule(200, ScheduleKind::kCosine);
  for (int t = 1; t <= 200; ++t) {
    CHECK(c.beta_at(t) > 0.0);
    CHECK(c.beta_at(t) < 1.0);
  }
  CHECK(schedule_kind_from_string(to_string(ScheduleKind::kCosine)) == ScheduleKind::kCosine);
  CHECK_THROWS(make_schedule(0));
  CHECK_THROWS(make_schedule(10, ScheduleKind::kLinear, 0.5, 0.1));
}

TEST_CASE("scaled short schedule ends near pure noise") {
  auto spec = ModelSpec::scaled_for(200);
  CHECK(spec.steps == 200);
  CHECK(spec.beta_min == doctest::Approx(5e-4));
  CHECK(spec.beta_max == doctest::Approx(0.1));
  auto s = make_schedule(spec.steps, spec.kind, spec.beta_min, spec.beta_max);
  CHECK(s.alpha_bar_at(200) < 1e-3);
}

TEST_CASE("forward process closed form and step chain agree in distribution") {
  auto s = make_schedule(200);
  Eigen::VectorXd x0(2);
  x0 << 1.5, -0.5;
  Eigen::VectorXd eps = Eigen::VectorXd::Zero(2);
  CHECK(forward_sample(x0, 100, eps, s).isApprox(std::sqrt(s.alpha_bar_at(100)) * x0));
  CHECK_THROWS(forward_sample(x0, 0, eps, s));
  CHECK_THROWS(forward_sample(x0, 201, eps, s));

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 3000;
  const int t = 60;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x = x0;
    for (int k = 1; k <= t; ++k) {
      Eigen::VectorXd e(2);
      e << g(rng), g(rng);
      x = forward_step(x, k, e, s);
    }
    sum += x[0];
    sq += x[0] * x[0];
  }
  const double mean = sum / n;
  const double var = (sq - n * mean * mean) / (n - 1);
  const double want_var = 1.0 - s.alpha_bar_at(t);
  CHECK(std::abs(mean - std::sqrt(s.alpha_bar_at(t)) * x0[0]) < 4.0 * std::sqrt(want_var / n));
  CHECK(std::abs(var - want_var) < 4.0 * want_var * std::sqrt(2.0 / (n - 1)));
}

TEST_CASE("guidance combination is exact at the endpoints") {
  CHECK(guidance_combine(1.0, 0.5, 3.0) == 2.0);
  CHECK(guidance_combine(0.25, -4.0, 1.0) == 0.25);
  CHECK(guidance_combine(0.25, -4.0, 0.0) == -4.0);
  DenoiserNet net(small_topology(), 9);
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(10, -1.0, 1.0);
  Conditioning y{1, Eigen::Vector4d(0.2, 0.4, 0.6, 0.8)};
  CHECK(guided_epsilon(net, x, y, 17, 1.0) == net.predict(x, 17, y));
  CHECK(guided_epsilon(net, x, y, 17, 0.0) == net.predict(x, 17, std::nullopt));
  CHECK(net.predict(x, 17, y) != net.predict(x, 17, std::nullopt));
}

TEST_CASE("denoiser backward matches finite differences") {
  DenoiserNet net(small_topology(), 4);
  const int batch = 3;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd x(10, batch), d_out(10, batch);
  for (int i = 0; i < x.size(); ++i) {
    x.data()[i] = g(rng);
    d_out.data()[i] = g(rng);
  }
  CondBatch cond;
  cond.product_class = {0, 1, 1};
  cond.env = Eigen::MatrixXd::Random(4, batch);
  cond.null = {false, false, true};
  const std::vector<int> t{3, 25, 49};

  DenoiserNet::Cache cache;
  net.forward(x, t, cond, &cache);
  const auto grads = net.backward(cache, d_out);
  REQUIRE(grads.size() == net.tensors().size());

  auto objective = [&](const DenoiserNet& n) { return (n.forward(x, t, cond).array() * d_out.array()).sum(); };
  const double h = 1e-6;
  for (std::size_t k = 0; k < net.tensors().size(); ++k) {
    auto& value = net.tensors()[k].value;
    for (Eigen::Index i = 0; i < value.size(); i += std::max<Eigen::Index>(1, value.size() / 5)) {
      const double orig = value.data()[i];
      value.data()[i] = orig + h;
      const double up = objective(net);
      value.data()[i] = orig - h;
      const double down = objective(net);
      value.data()[i] = orig;
      const double numeric = (up - down) / (2 * h);
      INFO(net.tensors()[k].name << "[" << i << "]");
      CHECK(grads[k].data()[i] == doctest::Approx(numeric).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("normalizer round-trips and rejects constant columns") {
  auto rows = make_synthetic(SyntheticSpec{}, 300, 1);
  auto norm = Normalizer::fit(rows);
  const auto x = norm.normalize_params(rows[7].params);
  const auto back = norm.denormalize_params(x);
  for (std::size_t i = 0; i < kNumParams; ++i) CHECK(back[i] == doctest::Approx(rows[7].params[i]));
  const auto e = norm.normalize_env(rows[7].condition);
  for (int i = 0; i < 4; ++i) {
    CHECK(e[i] >= 0.0);
    CHECK(e[i] <= 1.0);
  }
  auto flat = rows;
  for (auto& r : flat) r.params[3] = 100.0;
  CHECK_THROWS_AS(Normalizer::fit(flat), ValidationError);
  CHECK_THROWS_AS(Normalizer::fit({}), ValidationError);
}

TEST_CASE("synthetic data is seeded and the dataset format round-trips") {
  SyntheticSpec spec;
  auto a = make_synthetic(spec, 400, 5);
  CHECK(a == make_synthetic(spec, 400, 5));
  CHECK(a != make_synthetic(spec, 400, 6));
  std::size_t defective = 0;
  for (const auto& r : a) defective += r.condition.product_class == ProductClass::kDefective;
  CHECK(defective > 140);
  CHECK(defective < 260);
  auto parsed = parse_dataset(format_dataset(a));
  REQUIRE(parsed.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < kNumParams; ++j) CHECK(parsed[i].params[j] == doctest::Approx(a[i].params[j]));
  }
  CHECK_THROWS(parse_dataset("not,a,dataset\n1,2\n"));
  const auto m = spec.mean(ProductClass::kDefective);
  CHECK(m[0] == doctest::Approx(spec.good_mean[0] + spec.defect_shift[0]));
  CHECK(spec.stddev()[0] == doctest::Approx(2.0));
}

TEST_CASE("machine limits clamp and report") {
  MachineLimits limits;
  ProcessParams p;
  p.values = {10, 10, 10, 10, 10, 10, 10, 10, 10, 40};
  p[0] = -5;
  auto clamped = limits.clamp(p);
  CHECK(clamped == std::vector<std::string>{"Injection Speed 1", "Hold Time"});
  CHECK(p[0] == 0.0);
  CHECK(p[9] == 30.0);
  CHECK(limits.contains(p));
  EnvBounds bounds;
  CHECK(bounds.violations(EnvCondition{ProductClass::kGood, 25, 120, 80, 40}).size() == 2);
}

TEST_CASE("training reduces loss and sampling is seed-deterministic") {
  auto data = make_synthetic(SyntheticSpec{}, 256, 2);
  TrainReport report;
  int hooks = 0;
  auto model = fit_model(data, quick_spec(15), &report, [&](int, double) { ++hooks; });
  REQUIRE(report.epoch_loss.size() == 15);
  CHECK(hooks == 15);
  CHECK(report.epoch_loss.back() < report.epoch_loss.front());
  CHECK(report.null_examples > 0);
  CHECK(report.conditional_examples > report.null_examples);
  CHECK(model.net.all_finite());

  auto again = fit_model(data, quick_spec(15));
  CHECK(again == model);

  const auto ctx = model.context();
  auto a = sample(ctx, env(ProductClass::kGood), 3.0, 42);
  auto b = sample(ctx, env(ProductClass::kGood), 3.0, 42);
  auto c = sample(ctx, env(ProductClass::kGood), 3.0, 43);
  CHECK(a.params == b.params);
  CHECK(a.params != c.params);
  CHECK(ctx.limits.contains(a.params));

  auto cands = generate_candidates(ctx, env(ProductClass::kGood), 3.0);
  CHECK(cands.size() == kDefaultCandidates);
  CHECK(cands.size() == 64);
  CHECK(cands[5].params == sample(ctx, env(ProductClass::kGood), 3.0, candidate_seed(0, 5)).params);
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 64; ++i) seeds.insert(candidate_seed(0, i));
  CHECK(seeds.size() == 64);
  CHECK_THROWS(generate_candidates(ctx, env(ProductClass::kGood), 3.0, 0));
}

TEST_CASE("checkpoint round-trips bit-exactly and rejects damage") {
  auto model = fit_model(make_synthetic(SyntheticSpec{}, 128, 4), quick_spec(2));
  const auto dir = test::fresh_dir("ckpt");
  save_checkpoint(model, dir / "m.json");
  auto loaded = load_checkpoint(dir / "m.json");
  CHECK(loaded == model);
  CHECK(loaded.schedule == model.schedule);
  CHECK(loaded.normalizer == model.normalizer);
  for (std::size_t k = 0; k < model.net.tensors().size(); ++k) {
    CHECK(loaded.net.tensors()[k].value == model.net.tensors()[k].value);
  }
  const auto ctx = loaded.context();
  CHECK(sample(ctx, env(ProductClass::kDefective), 3.0, 1).params ==
        sample(model.context(), env(ProductClass::kDefective), 3.0, 1).params);

  {
    std::ofstream out(dir / "bad.json");
    out << "{\"format\": \"something else\"}";
  }
  CHECK_THROWS(load_checkpoint(dir / "bad.json"));
  CHECK_THROWS(load_checkpoint(dir / "absent.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("training configuration is validated") {
  TrainConfig c;
  c.epochs = -1;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
  c = TrainConfig{};
  c.cond_drop_prob = 1.5;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
}
