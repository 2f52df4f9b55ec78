// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "moldchat/common/error.hpp"
#include "moldchat/diffusion/dataset.hpp"
#include "moldchat/surrogate/gbt.hpp"
#include "support.hpp"

using namespace moldchat;
using namespace moldchat::surrogate;
using diffusion::EnvCondition;
using diffusion::ProcessParams;
using diffusion::ProductClass;

namespace {

std::vector<LabeledRecord> threshold_data(std::size_t n, std::uint64_t seed) {
  // Good exactly when feature 6 exceeds 0.5.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<LabeledRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledRecord r;
    for (auto& f : r.features) f = u(rng);
    r.label = r.features[6] > 0.5 ? Label::kGood : Label::kDefective;
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("features are environment then parameters") {
  EnvCondition c{ProductClass::kGood, 1, 2, 3, 4};
  ProcessParams p;
  for (std::size_t i = 0; i < 10; ++i) p[i] = 10.0 + static_cast<double>(i);
  auto f = make_features(c, p);
  CHECK(f[0] == 1);
  CHECK(f[3] == 4);
  CHECK(f[4] == 10);
  CHECK(f[13] == 19);
  auto rows = diffusion::make_synthetic(diffusion::SyntheticSpec{}, 50, 1);
  auto labeled = to_labeled(rows);
  REQUIRE(labeled.size() == 50);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK((labeled[i].label == Label::kGood) == (rows[i].condition.product_class == ProductClass::kGood));
  }
}

TEST_CASE("boosting separates a threshold concept") {
  auto train = threshold_data(400, 1);
  auto test = threshold_data(400, 2);
  auto model = fit(train, GBTHyper{50, 2, 0.3, 1.0, 1e-3, 0});
  std::size_t right = 0;
  for (const auto& r : test) right += (model.good_probability(r.features) > 0.5) == (r.label == Label::kGood);
  CHECK(static_cast<double>(right) / test.size() >= 0.95);
  for (const auto& t : model.trees()) CHECK(t.depth() <= 2);
}

TEST_CASE("zero trees predict the weighted base rate") {
  auto data = threshold_data(100, 3);
  double good = 0.0;
  for (const auto& r : data) good += r.label == Label::kGood;
  auto model = fit(data, GBTHyper{0, 3, 0.1, 1.0, 1e-3, 0});
  CHECK(model.trees().empty());
  CHECK(model.good_probability(data[0].features) == doctest::Approx(good / 100.0).epsilon(1e-12));
  CHECK(model.raw_score(data[0].features) == doctest::Approx(std::log(good / (100.0 - good))));
}

TEST_CASE("a duplicated row acts like a doubled weight") {
  auto data = threshold_data(120, 4);
  auto duplicated = data;
  duplicated.push_back(data[17]);
  auto weighted = data;
  weighted[17].weight = 2.0;
  GBTHyper h{20, 3, 0.2, 1.0, 1e-3, 0};
  auto a = fit(duplicated, h);
  auto b = fit(weighted, h);
  for (const auto& r : threshold_data(50, 5)) {
    CHECK(a.good_probability(r.features) == doctest::Approx(b.good_probability(r.features)).epsilon(1e-9));
  }
}

TEST_CASE("probabilities are monotone across the learned threshold") {
  auto model = fit(threshold_data(600, 6), GBTHyper{60, 2, 0.2, 1.0, 1e-3, 0});
  Features x{};
  x.fill(0.5);
  double last = -1.0;
  for (double v = 0.0; v <= 1.0; v += 0.05) {
    x[6] = v;
    const double p = model.good_probability(x);
    CHECK(p >= last - 1e-12);
    last = p;
  }
  x[6] = 0.05;
  CHECK(model.good_probability(x) < 0.1);
  x[6] = 0.95;
  CHECK(model.good_probability(x) > 0.9);
}

TEST_CASE("ranking picks the brute-force argmax with the lowest index on ties") {
  struct SumScorer final : Scorer {
    double good_probability(const Features& x) const override { return std::round(x[4]) / 100.0; }
  } scorer;
  EnvCondition c{ProductClass::kGood, 20, 40, 20, 40};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 60.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ProcessParams> cands(64);
    for (auto& p : cands) p[0] = u(rng);
    auto r = rank_candidates(scorer, c, cands);
    REQUIRE(r.scores.size() == 64);
    std::size_t best = 0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      CHECK(r.scores[i] == scorer.good_probability(make_features(c, cands[i])));
      if (r.scores[i] > r.scores[best]) best = i;
    }
    CHECK(r.best == best);
  }
  std::vector<ProcessParams> tied(3);
  CHECK(rank_candidates(scorer, c, tied).best == 0);
  CHECK_THROWS_AS(rank_candidates(scorer, c, {}), PreconditionError);
}

TEST_CASE("model serialization round-trips bit-exactly") {
  auto model = fit(threshold_data(200, 9), GBTHyper{15, 3, 0.1, 1.0, 1e-3, 0});
  auto back = GBTModel::from_json(nlohmann::json::parse(model.to_json().dump()));
  CHECK(back == model);
  const auto dir = test::fresh_dir("gbt");
  model.save(dir / "s.json");
  CHECK(GBTModel::load(dir / "s.json") == model);
  CHECK_THROWS_AS(GBTModel::load(dir / "none.json"), IoError);
  auto doc = model.to_json();
  doc["n_features"] = 3;
  CHECK_THROWS_AS(GBTModel::from_json(doc), ValidationError);
  doc = model.to_json();
  doc["format"] = "other";
  CHECK_THROWS_AS(GBTModel::from_json(doc), ValidationError);
  CHECK_THROWS_AS(model.predict_good_probability({1.0, 2.0}), PreconditionError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("fitting validates its inputs") {
  auto data = threshold_data(50, 10);
  CHECK_THROWS_AS(fit(data, GBTHyper{-1}), PreconditionError);
  CHECK_THROWS_AS(fit(data, GBTHyper{10, 0}), PreconditionError);
  auto one_class = data;
  for (auto& r : one_class) r.label = Label::kGood;
  CHECK_THROWS_AS(fit(one_class), ValidationError);
  auto bad_weight = data;
  bad_weight[0].weight = 0.0;
  CHECK_THROWS_AS(fit(bad_weight), ValidationError);
  auto nan = data;
  nan[0].features[2] = std::nan("");
  CHECK_THROWS_AS(fit(nan), ValidationError);
}

TEST_CASE("bundled surrogate favours good-class parameters") {
  auto model = GBTModel::load(test::data_dir() / "models" / "surrogate.json");
  diffusion::SyntheticSpec spec;
  EnvCondition c{ProductClass::kGood, 25, 45, 25, 45};
  ProcessParams good, bad;
  good.values = spec.mean(ProductClass::kGood);
  bad.values = spec.mean(ProductClass::kDefective);
  CHECK(model.good_probability(make_features(c, good)) > 0.9);
  CHECK(model.good_probability(make_features(c, bad)) < 0.1);
}
