// SPDX-License-Identifier: Apache-2.0
#include "blicer/crossenc/trainer.hpp"

#include "blicer/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace blicer::crossenc {

double bce_loss(double logit, double target) {
  if (!(target >= 0.0 && target <= 1.0)) throw DataError(fmt::format("BCE target {} outside [0, 1]", target));
  // -[v log s(u) + (1-v) log(1-s(u))] = max(u, 0) - u v + log(1 + exp(-|u|))
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

double bce_grad(double logit, double target) {
  if (!(target >= 0.0 && target <= 1.0)) throw DataError(fmt::format("BCE target {} outside [0, 1]", target));
  return sigmoid(logit) - target;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("train.batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("train.weight_decay must be >= 0");
}

TrainReport train(CrossEncoder& model, std::span<const EncodedExample> examples, const TrainConfig& cfg) {
  cfg.validate();
  if (examples.empty()) throw TrainingError("training set is empty");
  TrainReport report;
  if (cfg.epochs == 0) return report;

  const std::size_t n_params = model.parameter_count();
  std::vector<double> grad(n_params), m(n_params, 0.0), v(n_params, 0.0);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.shuffle_seed);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const auto& ex = examples[order[b]];
        const auto acts = model.forward(ex.ids);
        const double loss = bce_loss(acts.logit, ex.target);
        if (!std::isfinite(loss)) {
          throw TrainingError(fmt::format("non-finite loss at epoch {}, step {}, example '{}' (logit {}, target {})",
                                          epoch + 1, report.steps + 1, ex.label, acts.logit, ex.target));
        }
        loss_sum += loss;
        model.backward(acts, bce_grad(acts.logit, ex.target) * inv_batch, grad);
      }

      ++report.steps;
      const double t = static_cast<double>(report.steps);
      const double correction1 = 1.0 - std::pow(cfg.beta1, t);
      const double correction2 = 1.0 - std::pow(cfg.beta2, t);
      auto params = model.parameters();
      for (std::size_t i = 0; i < n_params; ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double m_hat = m[i] / correction1;
        const double v_hat = v[i] / correction2;
        params[i] -= cfg.learning_rate * (m_hat / (std::sqrt(v_hat) + cfg.adam_eps) + cfg.weight_decay * params[i]);
      }
    }
    report.epoch_losses.push_back(loss_sum / static_cast<double>(order.size()));
  }
  return report;
}

double mean_loss(const CrossEncoder& model, std::span<const EncodedExample> examples) {
  if (examples.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& ex : examples) sum += bce_loss(model.logit(ex.ids), ex.target);
  return sum / static_cast<double>(examples.size());
}

GradCheckReport grad_check(const CrossEncoder& model, const EncodedExample& example, const GradCheckOptions& opts) {
  const std::size_t n_params = model.parameter_count();
  std::vector<double> analytic(n_params, 0.0);
  const auto acts = model.forward(example.ids);
  model.backward(acts, bce_grad(acts.logit, example.target), analytic);

  std::vector<std::size_t> coords(n_params);
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  std::mt19937_64 rng(opts.seed);
  std::shuffle(coords.begin(), coords.end(), rng);
  coords.resize(std::min(opts.coordinates, n_params));

  CrossEncoder probe = model;
  auto params = probe.parameters();
  GradCheckReport report;
  for (std::size_t idx : coords) {
    const double saved = params[idx];
    params[idx] = saved + opts.step;
    const double up = bce_loss(probe.logit(example.ids), example.target);
    params[idx] = saved - opts.step;
    const double down = bce_loss(probe.logit(example.ids), example.target);
    params[idx] = saved;
    const double numeric = (up - down) / (2.0 * opts.step);
    const double a = analytic[idx];
    const double denom = std::max({std::abs(a), std::abs(numeric), opts.floor});
    const double rel = std::abs(a - numeric) / denom;
    report.coordinates.push_back({idx, a, numeric, rel});
    report.max_relative_error = std::max(report.max_relative_error, rel);
    report.max_abs_analytic = std::max(report.max_abs_analytic, std::abs(a));
  }
  std::sort(report.coordinates.begin(), report.coordinates.end(),
            [](const CoordinateError& x, const CoordinateError& y) { return x.relative_error > y.relative_error; });
  return report;
}

}  // namespace blicer::crossenc
