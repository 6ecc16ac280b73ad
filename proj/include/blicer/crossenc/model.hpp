// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale cross-encoder: character embeddings plus learned positions, a
// stack of pre-LayerNorm transformer encoder layers (multi-head
// self-attention, GELU feed-forward), a final LayerNorm, and a scalar head
// read at the CLS position. All arithmetic is in double precision.
#pragma once

#include "blicer/crossenc/tokenizer.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace blicer::crossenc {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t max_len = 64;
  std::size_t width = 64;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t ff = 128;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

double sigmoid(double x);

class CrossEncoder {
 public:
  struct LayerCache {
    Matrix x_in, xhat1, a1, q, k, v, o, h_mid, xhat2, a2, u, g;
    Eigen::VectorXd rstd1, rstd2;
    std::vector<Matrix> probs;
  };

  /// Everything the backward pass needs from one forward pass.
  struct Activations {
    std::vector<TokenId> ids;
    std::vector<LayerCache> layers;
    RowVector xhat_final;
    double rstd_final = 0.0;
    RowVector z_final;
    double logit = 0.0;
  };

  CrossEncoder() = default;
  /// Uniform [-0.05, 0.05] embeddings and weight matrices, unit LayerNorm
  /// gains, and zeros for every bias and for the output head.
  explicit CrossEncoder(const ModelConfig& cfg);
  CrossEncoder(const ModelConfig& cfg, std::vector<double> parameters);

  const ModelConfig& config() const noexcept { return cfg_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<const double> parameters() const noexcept { return params_; }
  std::span<double> parameters() noexcept { return params_; }

  /// Trailing PAD ids are dropped before the forward pass; padding is only
  /// ever appended, so the CLS output is unchanged by it.
  double logit(std::span<const TokenId> ids) const;
  Activations forward(std::span<const TokenId> ids) const;
  /// Adds dlogit * d(logit)/d(parameters) to `grad`.
  void backward(const Activations& acts, double dlogit, std::span<double> grad) const;

  friend bool operator==(const CrossEncoder& a, const CrossEncoder& b) {
    return a.cfg_ == b.cfg_ && a.params_ == b.params_;
  }

 private:
  struct LayerOffsets {
    std::size_t ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo, ln2_g, ln2_b, w1, b1, w2, b2;
  };
  struct Layout {
    std::size_t tok = 0, pos = 0;
    std::vector<LayerOffsets> layers;
    std::size_t lnf_g = 0, lnf_b = 0, head_w = 0, head_b = 0;
    std::size_t total = 0;
  };

  static Layout make_layout(const ModelConfig& cfg);
  void initialize();

  ModelConfig cfg_;
  Layout layout_;
  std::vector<double> params_;
};

}  // namespace blicer::crossenc
