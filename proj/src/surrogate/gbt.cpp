// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/surrogate/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include "moldchat/common/error.hpp"

namespace moldchat::surrogate {

Features make_features(const diffusion::EnvCondition& condition, const diffusion::ProcessParams& params) {
  Features f{};
  const auto env = condition.env();
  for (std::size_t i = 0; i < diffusion::kNumEnv; ++i) f[i] = env[i];
  for (std::size_t i = 0; i < diffusion::kNumParams; ++i) f[diffusion::kNumEnv + i] = params[i];
  return f;
}

std::vector<LabeledRecord> to_labeled(const std::vector<diffusion::Record>& rows) {
  std::vector<LabeledRecord> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    out.push_back({make_features(r.condition, r.params),
                   r.condition.product_class == diffusion::ProductClass::kGood ? Label::kGood : Label::kDefective, 1.0});
  }
  return out;
}

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Builder {
  const std::vector<LabeledRecord>& rows;
  const std::vector<double>& grad;
  const std::vector<double>& hess;
  const GBTHyper& hyper;
  Tree tree;

  double leaf_value(double g, double h) const { return -g / (h + hyper.l2); }
  double score(double g, double h) const { return g * g / (h + hyper.l2); }

  int build(std::vector<std::size_t> idx, int depth) {
    double g = 0.0;
    double h = 0.0;
    for (std::size_t i : idx) {
      g += grad[i];
      h += hess[i];
    }
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, leaf_value(g, h)});
    if (depth >= hyper.depth || idx.size() < 2) return node_id;

    const double parent = score(g, h);
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> sorted = idx;
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        return rows[a].features[f] < rows[b].features[f];
      });
      double gl = 0.0;
      double hl = 0.0;
      for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
        gl += grad[sorted[k]];
        hl += hess[sorted[k]];
        const double v = rows[sorted[k]].features[f];
        const double next = rows[sorted[k + 1]].features[f];
        if (!(next > v)) continue;
        const double hr = h - hl;
        if (hl < hyper.min_child_hessian || hr < hyper.min_child_hessian) continue;
        const double gain = score(gl, hl) + score(g - gl, hr) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = v + (next - v) / 2.0;
        }
      }
    }
    if (best_feature < 0) return node_id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t i : idx) {
      (rows[i].features[static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right).push_back(i);
    }
    const int l = build(std::move(left), depth + 1);
    const int r = build(std::move(right), depth + 1);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    node.value = 0.0;
    return node_id;
  }
};

nlohmann::json node_to_json(const Tree& t, int id) {
  const TreeNode& n = t.nodes[static_cast<std::size_t>(id)];
  if (n.feature < 0) return {{"leaf", n.value}};
  return {{"feature", n.feature},
          {"threshold", n.threshold},
          {"left", node_to_json(t, n.left)},
          {"right", node_to_json(t, n.right)}};
}

int node_from_json(const nlohmann::json& j, Tree& t) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  if (j.contains("leaf")) {
    t.nodes[static_cast<std::size_t>(id)].value = j.at("leaf").get<double>();
    return id;
  }
  const int feature = j.at("feature").get<int>();
  if (feature < 0 || feature >= static_cast<int>(kNumFeatures)) {
    throw ValidationError("surrogate split feature " + std::to_string(feature) + " out of range");
  }
  const double threshold = j.at("threshold").get<double>();
  const int l = node_from_json(j.at("left"), t);
  const int r = node_from_json(j.at("right"), t);
  auto& n = t.nodes[static_cast<std::size_t>(id)];
  n.feature = feature;
  n.threshold = threshold;
  n.left = l;
  n.right = r;
  return id;
}

}  // namespace

double Tree::predict(const Features& x) const {
  int id = 0;
  while (true) {
    const TreeNode& n = nodes[static_cast<std::size_t>(id)];
    if (n.feature < 0) return n.value;
    id = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
}

int Tree::depth() const {
  std::function<int(int)> d = [&](int id) -> int {
    const TreeNode& n = nodes[static_cast<std::size_t>(id)];
    if (n.feature < 0) return 0;
    return 1 + std::max(d(n.left), d(n.right));
  };
  return nodes.empty() ? 0 : d(0);
}

GBTModel::GBTModel(std::vector<Tree> trees, double learning_rate, double base_score, int max_depth)
    : trees_(std::move(trees)), learning_rate_(learning_rate), base_score_(base_score), max_depth_(max_depth) {}

bool GBTModel::operator==(const GBTModel& other) const {
  return trees_ == other.trees_ && learning_rate_ == other.learning_rate_ && base_score_ == other.base_score_ &&
         max_depth_ == other.max_depth_;
}

double GBTModel::raw_score(const Features& x) const {
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return base_score_ + learning_rate_ * sum;
}

double GBTModel::good_probability(const Features& x) const { return sigmoid(raw_score(x)); }

double GBTModel::predict_good_probability(const std::vector<double>& features) const {
  if (features.size() != kNumFeatures) {
    throw PreconditionError("surrogate expects " + std::to_string(kNumFeatures) + " features, got " +
                            std::to_string(features.size()));
  }
  Features f{};
  std::copy(features.begin(), features.end(), f.begin());
  return good_probability(f);
}

nlohmann::json GBTModel::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(node_to_json(t, 0));
  return {{"format", "moldchat-gbt"},
          {"version", 1},
          {"n_features", kNumFeatures},
          {"learning_rate", learning_rate_},
          {"base_score", base_score_},
          {"max_depth", max_depth_},
          {"trees", trees}};
}

GBTModel GBTModel::from_json(const nlohmann::json& doc) {
  if (doc.value("format", std::string{}) != "moldchat-gbt") throw ValidationError("not a surrogate model document");
  if (doc.value("version", 0) != 1) throw ValidationError("unsupported surrogate model version");
  if (doc.at("n_features").get<std::size_t>() != kNumFeatures) throw ValidationError("surrogate feature count mismatch");
  std::vector<Tree> trees;
  const int max_depth = doc.at("max_depth").get<int>();
  for (const auto& j : doc.at("trees")) {
    Tree t;
    node_from_json(j, t);
    if (t.depth() > max_depth) throw ValidationError("surrogate tree deeper than its declared max depth");
    trees.push_back(std::move(t));
  }
  return GBTModel(std::move(trees), doc.at("learning_rate").get<double>(), doc.at("base_score").get<double>(), max_depth);
}

void GBTModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write surrogate model " + path.string());
  out << to_json().dump(1) << '\n';
}

GBTModel GBTModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open surrogate model " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("surrogate model " + path.string() + " is malformed: " + e.what());
  }
}

GBTModel fit(const std::vector<LabeledRecord>& records, const GBTHyper& hyper) {
  if (hyper.trees < 0 || hyper.depth < 1 || !(hyper.learning_rate > 0.0) || hyper.l2 < 0.0) {
    throw PreconditionError("invalid boosting hyperparameters");
  }
  double w_good = 0.0;
  double w_bad = 0.0;
  for (const auto& r : records) {
    if (!(r.weight > 0.0)) throw ValidationError("record weights must be positive");
    for (double v : r.features) {
      if (!std::isfinite(v)) throw ValidationError("surrogate features must be finite");
    }
    (r.label == Label::kGood ? w_good : w_bad) += r.weight;
  }
  if (w_good == 0.0 || w_bad == 0.0) throw ValidationError("surrogate training needs both good and defective records");

  const double base = std::log(w_good / w_bad);
  std::vector<double> raw(records.size(), base);
  std::vector<double> grad(records.size());
  std::vector<double> hess(records.size());
  std::vector<Tree> trees;
  std::vector<std::size_t> all(records.size());
  std::iota(all.begin(), all.end(), 0);

  for (int m = 0; m < hyper.trees; ++m) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      const double p = sigmoid(raw[i]);
      const double y = records[i].label == Label::kGood ? 1.0 : 0.0;
      grad[i] = records[i].weight * (p - y);
      hess[i] = records[i].weight * std::max(p * (1.0 - p), 1e-12);
    }
    Builder b{records, grad, hess, hyper, {}};
    b.build(all, 0);
    for (std::size_t i = 0; i < records.size(); ++i) raw[i] += hyper.learning_rate * b.tree.predict(records[i].features);
    trees.push_back(std::move(b.tree));
  }
  return GBTModel(std::move(trees), hyper.learning_rate, base, hyper.depth);
}

Ranking rank_candidates(const Scorer& model, const diffusion::EnvCondition& condition,
                        const std::vector<diffusion::ProcessParams>& candidates) {
  if (candidates.empty()) throw PreconditionError("rank_candidates needs at least one candidate");
  Ranking r;
  for (const auto& c : candidates) r.scores.push_back(model.good_probability(make_features(condition, c)));
  for (std::size_t i = 1; i < r.scores.size(); ++i) {
    if (r.scores[i] > r.scores[r.best]) r.best = i;
  }
  return r;
}

}  // namespace moldchat::surrogate
