// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/diffusion/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "moldchat/common/error.hpp"

namespace moldchat::diffusion {

void TrainConfig::validate() const {
  if (epochs < 0) throw PreconditionError("epochs must be >= 0");
  if (batch_size < 1) throw PreconditionError("batch size must be >= 1");
  if (!(learning_rate > 0.0)) throw PreconditionError("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw PreconditionError("momentum must lie in [0, 1)");
  if (!(cond_drop_prob >= 0.0 && cond_drop_prob <= 1.0)) throw PreconditionError("drop probability must lie in [0, 1]");
  if (!(ema_decay >= 0.0 && ema_decay < 1.0)) throw PreconditionError("ema_decay must lie in [0, 1)");
  if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0)) throw PreconditionError("final_lr_fraction must lie in (0, 1]");
}

DenoiserNet train(const std::vector<Record>& data, const Normalizer& norm, const NoiseSchedule& sched,
                  const TrainConfig& config, TrainReport* report, const EpochHook& hook) {
  config.validate();
  if (data.empty()) throw PreconditionError("training needs at least one record");

  std::mt19937_64 rng(config.seed);
  DenoiserNet net(config.topology, rng());
  const int x_dim = config.topology.x_dim;

  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd x0_all(x_dim, n);
  Eigen::MatrixXd env_all(config.topology.env_dim, n);
  std::vector<int> cls_all(data.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = data[static_cast<std::size_t>(i)];
    x0_all.col(i) = norm.normalize_params(r.params);
    env_all.col(i) = norm.normalize_env(r.condition);
    cls_all[static_cast<std::size_t>(i)] = static_cast<int>(r.condition.product_class);
  }

  std::vector<Eigen::MatrixXd> velocity;
  for (const auto& t : net.tensors()) velocity.push_back(Eigen::MatrixXd::Zero(t.value.rows(), t.value.cols()));

  DenoiserNet ema = net;

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> pick_t(1, sched.T);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batches_per_epoch = (data.size() + config.batch_size - 1) / config.batch_size;
  const double total_steps = static_cast<double>(batches_per_epoch) * config.epochs;
  TrainReport local;
  std::uint64_t step = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const auto b = static_cast<Eigen::Index>(end - start);
      Eigen::MatrixXd xt(x_dim, b);
      Eigen::MatrixXd eps(x_dim, b);
      std::vector<int> ts(static_cast<std::size_t>(b));
      CondBatch cond;
      cond.env.resize(config.topology.env_dim, b);
      cond.product_class.resize(static_cast<std::size_t>(b));
      cond.null.resize(static_cast<std::size_t>(b));
      for (Eigen::Index j = 0; j < b; ++j) {
        const std::size_t idx = order[start + static_cast<std::size_t>(j)];
        const auto ji = static_cast<std::size_t>(j);
        ts[ji] = pick_t(rng);
        for (int d = 0; d < x_dim; ++d) eps(d, j) = normal(rng);
        const double ab = sched.alpha_bar_at(ts[ji]);
        xt.col(j) = std::sqrt(ab) * x0_all.col(static_cast<Eigen::Index>(idx)) + std::sqrt(1.0 - ab) * eps.col(j);
        cond.product_class[ji] = cls_all[idx];
        cond.env.col(j) = env_all.col(static_cast<Eigen::Index>(idx));
        const bool drop = unit(rng) < config.cond_drop_prob;
        cond.null[ji] = drop;
        if (drop) {
          ++local.null_examples;
        } else {
          ++local.conditional_examples;
        }
      }

      DenoiserNet::Cache cache;
      const Eigen::MatrixXd pred = net.forward(xt, ts, cond, &cache);
      const Eigen::MatrixXd diff = pred - eps;
      const double count = static_cast<double>(diff.size());
      const double loss = diff.squaredNorm() / count;
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(step) + " (learning rate " + std::to_string(config.learning_rate) +
                           "); lower the learning rate or check the data for NaN");
      }
      loss_sum += loss * static_cast<double>(b);
      loss_count += static_cast<std::size_t>(b);

      auto grads = net.backward(cache, (2.0 / count) * diff);
      if (config.grad_clip > 0.0) {
        double sq = 0.0;
        for (const auto& g : grads) sq += g.squaredNorm();
        const double norm_g = std::sqrt(sq);
        if (norm_g > config.grad_clip) {
          for (auto& g : grads) g *= config.grad_clip / norm_g;
        }
      }
      const double progress = total_steps > 0 ? static_cast<double>(step) / total_steps : 0.0;
      const double lr = config.learning_rate * (1.0 - (1.0 - config.final_lr_fraction) * progress);
      auto& tensors = net.tensors();
      for (std::size_t i = 0; i < tensors.size(); ++i) {
        velocity[i] = config.momentum * velocity[i] - lr * grads[i];
        tensors[i].value += velocity[i];
      }
      if (config.ema_decay > 0.0) {
        // Short warm-up so early weights do not dominate small runs.
        const double d = std::min(config.ema_decay, (1.0 + static_cast<double>(step)) / (10.0 + static_cast<double>(step)));
        auto& avg = ema.tensors();
        for (std::size_t i = 0; i < tensors.size(); ++i) avg[i].value = d * avg[i].value + (1.0 - d) * tensors[i].value;
      }
      ++step;
    }
    const double mean_loss = loss_sum / static_cast<double>(loss_count);
    local.epoch_loss.push_back(mean_loss);
    spdlog::debug("diffusion epoch {} mean loss {:.6f}", epoch, mean_loss);
    if (hook) hook(epoch, mean_loss);
  }
  local.steps = step;
  DenoiserNet& result = config.ema_decay > 0.0 ? ema : net;
  if (!result.all_finite()) throw NumericError("training produced non-finite weights");
  if (report) *report = std::move(local);
  return result;
}

}  // namespace moldchat::diffusion
