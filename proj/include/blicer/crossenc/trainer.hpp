// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "blicer/crossenc/model.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace blicer::crossenc {

/// Binary cross-entropy of sigmoid(logit) against a soft target v in [0, 1],
/// evaluated without forming sigmoid(logit) explicitly. Throws DataError for
/// v outside [0, 1].
double bce_loss(double logit, double target);
/// d bce_loss / d logit = sigmoid(logit) - target.
double bce_grad(double logit, double target);

struct TrainConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 256;
  /// From-scratch toy model default; pretrained fine-tuning uses 1.2e-5.
  double learning_rate = 3e-4;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t shuffle_seed = 0;

  void validate() const;
};

inline constexpr double kPretrainedLearningRate = 1.2e-5;
inline constexpr double kToyLearningRate = 3e-4;

struct EncodedExample {
  std::vector<TokenId> ids;
  double target = 0.0;
  /// Shown in diagnostics only.
  std::string label;
};

struct TrainReport {
  std::vector<double> epoch_losses;
  std::size_t steps = 0;
};

/// AdamW over seeded per-epoch shuffles of `examples`; gradients are averaged
/// over each batch. Throws TrainingError on an empty set or a non-finite loss.
TrainReport train(CrossEncoder& model, std::span<const EncodedExample> examples, const TrainConfig& cfg);

/// Mean BCE of the model over `examples`, no update.
double mean_loss(const CrossEncoder& model, std::span<const EncodedExample> examples);

struct CoordinateError {
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  double max_abs_analytic = 0.0;
  /// Sorted by relative error, largest first.
  std::vector<CoordinateError> coordinates;
};

struct GradCheckOptions {
  std::size_t coordinates = 200;
  double step = 1e-5;
  /// Denominator floor for the relative error of near-zero gradients.
  double floor = 1e-6;
  std::uint64_t seed = 0;
};

/// Analytic BCE gradient against central finite differences on a random
/// subset of parameter coordinates.
GradCheckReport grad_check(const CrossEncoder& model, const EncodedExample& example,
                           const GradCheckOptions& opts = {});

}  // namespace blicer::crossenc
