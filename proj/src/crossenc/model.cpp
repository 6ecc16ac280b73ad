// SPDX-License-Identifier: Apache-2.0
#include "blicer/crossenc/model.hpp"

#include "blicer/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace blicer::crossenc {

namespace {

using CMatrixMap = Eigen::Map<const Matrix>;
using MatrixMap = Eigen::Map<Matrix>;
using CRowMap = Eigen::Map<const RowVector>;
using RowMap = Eigen::Map<RowVector>;

constexpr double kLayerNormEps = 1e-5;
constexpr double kInitRange = 0.05;
const double kGeluC = std::sqrt(2.0 / M_PI);
constexpr double kGeluA = 0.044715;

double gelu(double x) { return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x))); }

double gelu_grad(double x) {
  const double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
}

void layer_norm(const Matrix& x, const CRowMap& gain, const CRowMap& bias, Matrix& xhat, Eigen::VectorXd& rstd,
                Matrix& y) {
  const auto n = x.rows();
  const auto d = static_cast<double>(x.cols());
  xhat.resize(n, x.cols());
  rstd.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mean = x.row(r).sum() / d;
    const auto centered = (x.row(r).array() - mean).matrix();
    const double var = centered.squaredNorm() / d;
    rstd[r] = 1.0 / std::sqrt(var + kLayerNormEps);
    xhat.row(r) = centered * rstd[r];
  }
  y = (xhat.array().rowwise() * gain.array()).rowwise() + bias.array();
}

// Returns d(input) and accumulates the gain/bias gradients.
Matrix layer_norm_backward(const Matrix& dy, const Matrix& xhat, const Eigen::VectorXd& rstd,
                           const CRowMap& gain, RowMap dgain, RowMap dbias) {
  dgain += (dy.array() * xhat.array()).colwise().sum().matrix();
  dbias += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * gain.array();
  const double d = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_dxhat = dxhat.row(r).sum() / d;
    const double mean_dxhat_xhat = dxhat.row(r).dot(xhat.row(r)) / d;
    dx.row(r) = rstd[r] * (dxhat.row(r).array() - mean_dxhat - xhat.row(r).array() * mean_dxhat_xhat).matrix();
  }
  return dx;
}

void softmax_rows(Matrix& s) {
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double max = s.row(r).maxCoeff();
    s.row(r) = (s.row(r).array() - max).exp().matrix();
    s.row(r) /= s.row(r).sum();
  }
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void ModelConfig::validate() const {
  if (vocab_size < static_cast<std::size_t>(CharTokenizer::kFirstChar)) {
    throw ConfigError("model vocabulary must hold at least the special tokens");
  }
  if (max_len < CharTokenizer::kMinLength) {
    throw ConfigError(fmt::format("model.max_len={} is below {}", max_len, CharTokenizer::kMinLength));
  }
  if (width == 0) throw ConfigError("model.width must be >= 1");
  if (layers == 0) throw ConfigError("model.layers must be >= 1");
  if (heads == 0 || width % heads != 0) {
    throw ConfigError(fmt::format("model.heads={} must divide model.width={}", heads, width));
  }
  if (ff == 0) throw ConfigError("model.ff must be >= 1");
}

CrossEncoder::Layout CrossEncoder::make_layout(const ModelConfig& cfg) {
  Layout l;
  std::size_t at = 0;
  auto take = [&at](std::size_t n) {
    const std::size_t start = at;
    at += n;
    return start;
  };
  const std::size_t d = cfg.width;
  const std::size_t f = cfg.ff;
  l.tok = take(cfg.vocab_size * d);
  l.pos = take(cfg.max_len * d);
  for (std::size_t i = 0; i < cfg.layers; ++i) {
    LayerOffsets o{};
    o.ln1_g = take(d);
    o.ln1_b = take(d);
    o.wq = take(d * d);
    o.bq = take(d);
    o.wk = take(d * d);
    o.bk = take(d);
    o.wv = take(d * d);
    o.bv = take(d);
    o.wo = take(d * d);
    o.bo = take(d);
    o.ln2_g = take(d);
    o.ln2_b = take(d);
    o.w1 = take(d * f);
    o.b1 = take(f);
    o.w2 = take(f * d);
    o.b2 = take(d);
    l.layers.push_back(o);
  }
  l.lnf_g = take(d);
  l.lnf_b = take(d);
  l.head_w = take(d);
  l.head_b = take(1);
  l.total = at;
  return l;
}

CrossEncoder::CrossEncoder(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  layout_ = make_layout(cfg_);
  params_.assign(layout_.total, 0.0);
  initialize();
}

CrossEncoder::CrossEncoder(const ModelConfig& cfg, std::vector<double> parameters) : cfg_(cfg) {
  cfg_.validate();
  layout_ = make_layout(cfg_);
  if (parameters.size() != layout_.total) {
    throw DataError(fmt::format("checkpoint has {} parameters, configuration needs {}", parameters.size(),
                                layout_.total));
  }
  params_ = std::move(parameters);
}

void CrossEncoder::initialize() {
  std::mt19937_64 rng(cfg_.seed);
  std::uniform_real_distribution<double> uniform(-kInitRange, kInitRange);
  auto fill = [&](std::size_t offset, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) params_[offset + i] = uniform(rng);
  };
  auto ones = [&](std::size_t offset, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) params_[offset + i] = 1.0;
  };
  const std::size_t d = cfg_.width;
  const std::size_t f = cfg_.ff;
  fill(layout_.tok, cfg_.vocab_size * d);
  fill(layout_.pos, cfg_.max_len * d);
  for (const auto& o : layout_.layers) {
    ones(o.ln1_g, d);
    fill(o.wq, d * d);
    fill(o.wk, d * d);
    fill(o.wv, d * d);
    fill(o.wo, d * d);
    ones(o.ln2_g, d);
    fill(o.w1, d * f);
    fill(o.w2, f * d);
  }
  ones(layout_.lnf_g, d);
}

double CrossEncoder::logit(std::span<const TokenId> ids) const { return forward(ids).logit; }

CrossEncoder::Activations CrossEncoder::forward(std::span<const TokenId> ids) const {
  const std::size_t n = unpadded_length(ids);
  if (n == 0) throw DataError("cannot score an empty token sequence");
  if (n > cfg_.max_len) throw DataError(fmt::format("sequence of {} ids exceeds max_len {}", n, cfg_.max_len));

  const auto d = static_cast<Eigen::Index>(cfg_.width);
  const auto f = static_cast<Eigen::Index>(cfg_.ff);
  const auto heads = static_cast<Eigen::Index>(cfg_.heads);
  const Eigen::Index hd = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const double* p = params_.data();

  Activations acts;
  acts.ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n));

  const CMatrixMap tok(p + layout_.tok, static_cast<Eigen::Index>(cfg_.vocab_size), d);
  const CMatrixMap pos(p + layout_.pos, static_cast<Eigen::Index>(cfg_.max_len), d);
  Matrix x(static_cast<Eigen::Index>(n), d);
  for (std::size_t t = 0; t < n; ++t) {
    const TokenId id = acts.ids[t];
    if (id < 0 || static_cast<std::size_t>(id) >= cfg_.vocab_size) {
      throw DataError(fmt::format("token id {} outside the model vocabulary", id));
    }
    x.row(static_cast<Eigen::Index>(t)) = tok.row(id) + pos.row(static_cast<Eigen::Index>(t));
  }

  acts.layers.resize(cfg_.layers);
  for (std::size_t li = 0; li < cfg_.layers; ++li) {
    const auto& o = layout_.layers[li];
    auto& c = acts.layers[li];
    c.x_in = x;
    layer_norm(x, CRowMap(p + o.ln1_g, d), CRowMap(p + o.ln1_b, d), c.xhat1, c.rstd1, c.a1);
    c.q.noalias() = c.a1 * CMatrixMap(p + o.wq, d, d);
    c.q.rowwise() += CRowMap(p + o.bq, d);
    c.k.noalias() = c.a1 * CMatrixMap(p + o.wk, d, d);
    c.k.rowwise() += CRowMap(p + o.bk, d);
    c.v.noalias() = c.a1 * CMatrixMap(p + o.wv, d, d);
    c.v.rowwise() += CRowMap(p + o.bv, d);

    c.o.resize(x.rows(), d);
    c.probs.resize(cfg_.heads);
    for (Eigen::Index h = 0; h < heads; ++h) {
      Matrix s = c.q.middleCols(h * hd, hd) * c.k.middleCols(h * hd, hd).transpose();
      s *= scale;
      softmax_rows(s);
      c.o.middleCols(h * hd, hd).noalias() = s * c.v.middleCols(h * hd, hd);
      c.probs[static_cast<std::size_t>(h)] = std::move(s);
    }
    c.h_mid = c.x_in;
    c.h_mid.noalias() += c.o * CMatrixMap(p + o.wo, d, d);
    c.h_mid.rowwise() += CRowMap(p + o.bo, d);

    layer_norm(c.h_mid, CRowMap(p + o.ln2_g, d), CRowMap(p + o.ln2_b, d), c.xhat2, c.rstd2, c.a2);
    c.u.noalias() = c.a2 * CMatrixMap(p + o.w1, d, f);
    c.u.rowwise() += CRowMap(p + o.b1, f);
    c.g = c.u.unaryExpr([](double v) { return gelu(v); });
    x = c.h_mid;
    x.noalias() += c.g * CMatrixMap(p + o.w2, f, d);
    x.rowwise() += CRowMap(p + o.b2, d);
  }

  // Final LayerNorm and head, CLS row only.
  const RowVector cls = x.row(0);
  const double mean = cls.sum() / static_cast<double>(d);
  const RowVector centered = (cls.array() - mean).matrix();
  acts.rstd_final = 1.0 / std::sqrt(centered.squaredNorm() / static_cast<double>(d) + kLayerNormEps);
  acts.xhat_final = centered * acts.rstd_final;
  acts.z_final = (acts.xhat_final.array() * CRowMap(p + layout_.lnf_g, d).array() +
                  CRowMap(p + layout_.lnf_b, d).array())
                     .matrix();
  acts.logit = acts.z_final.dot(CRowMap(p + layout_.head_w, d)) + p[layout_.head_b];
  return acts;
}

void CrossEncoder::backward(const Activations& acts, double dlogit, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw DataError("gradient buffer size mismatch");
  const auto d = static_cast<Eigen::Index>(cfg_.width);
  const auto f = static_cast<Eigen::Index>(cfg_.ff);
  const auto heads = static_cast<Eigen::Index>(cfg_.heads);
  const Eigen::Index hd = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const auto n = static_cast<Eigen::Index>(acts.ids.size());
  const double* p = params_.data();
  double* g = grad.data();

  RowMap(g + layout_.head_w, d) += dlogit * acts.z_final;
  g[layout_.head_b] += dlogit;
  const RowVector dz = dlogit * CRowMap(p + layout_.head_w, d);

  RowMap(g + layout_.lnf_g, d) += (dz.array() * acts.xhat_final.array()).matrix();
  RowMap(g + layout_.lnf_b, d) += dz;
  const RowVector dxhat = (dz.array() * CRowMap(p + layout_.lnf_g, d).array()).matrix();
  const double mean_dxhat = dxhat.sum() / static_cast<double>(d);
  const double mean_dxhat_xhat = dxhat.dot(acts.xhat_final) / static_cast<double>(d);

  Matrix dx = Matrix::Zero(n, d);
  dx.row(0) =
      acts.rstd_final * (dxhat.array() - mean_dxhat - acts.xhat_final.array() * mean_dxhat_xhat).matrix();

  for (std::size_t li = cfg_.layers; li-- > 0;) {
    const auto& o = layout_.layers[li];
    const auto& c = acts.layers[li];

    // Feed-forward block: x = h_mid + gelu(LN2(h_mid) W1 + b1) W2 + b2.
    MatrixMap(g + o.w2, f, d).noalias() += c.g.transpose() * dx;
    RowMap(g + o.b2, d) += dx.colwise().sum();
    Matrix du = dx * CMatrixMap(p + o.w2, f, d).transpose();
    du.array() *= c.u.unaryExpr([](double v) { return gelu_grad(v); }).array();
    MatrixMap(g + o.w1, d, f).noalias() += c.a2.transpose() * du;
    RowMap(g + o.b1, f) += du.colwise().sum();
    const Matrix da2 = du * CMatrixMap(p + o.w1, d, f).transpose();
    Matrix dh = dx + layer_norm_backward(da2, c.xhat2, c.rstd2, CRowMap(p + o.ln2_g, d), RowMap(g + o.ln2_g, d),
                                         RowMap(g + o.ln2_b, d));

    // Attention block: h_mid = x_in + attn(LN1(x_in)) Wo + bo.
    MatrixMap(g + o.wo, d, d).noalias() += c.o.transpose() * dh;
    RowMap(g + o.bo, d) += dh.colwise().sum();
    const Matrix d_o = dh * CMatrixMap(p + o.wo, d, d).transpose();
    Matrix dq(n, d), dk(n, d), dv(n, d);
    for (Eigen::Index h = 0; h < heads; ++h) {
      const Matrix& prob = c.probs[static_cast<std::size_t>(h)];
      const auto doh = d_o.middleCols(h * hd, hd);
      dv.middleCols(h * hd, hd).noalias() = prob.transpose() * doh;
      const Matrix dprob = doh * c.v.middleCols(h * hd, hd).transpose();
      const Eigen::VectorXd row_dot = (dprob.array() * prob.array()).rowwise().sum();
      Matrix ds = (prob.array() * (dprob.array().colwise() - row_dot.array())).matrix();
      ds *= scale;
      dq.middleCols(h * hd, hd).noalias() = ds * c.k.middleCols(h * hd, hd);
      dk.middleCols(h * hd, hd).noalias() = ds.transpose() * c.q.middleCols(h * hd, hd);
    }
    MatrixMap(g + o.wq, d, d).noalias() += c.a1.transpose() * dq;
    RowMap(g + o.bq, d) += dq.colwise().sum();
    MatrixMap(g + o.wk, d, d).noalias() += c.a1.transpose() * dk;
    RowMap(g + o.bk, d) += dk.colwise().sum();
    MatrixMap(g + o.wv, d, d).noalias() += c.a1.transpose() * dv;
    RowMap(g + o.bv, d) += dv.colwise().sum();
    Matrix da1 = dq * CMatrixMap(p + o.wq, d, d).transpose();
    da1.noalias() += dk * CMatrixMap(p + o.wk, d, d).transpose();
    da1.noalias() += dv * CMatrixMap(p + o.wv, d, d).transpose();
    dx = dh + layer_norm_backward(da1, c.xhat1, c.rstd1, CRowMap(p + o.ln1_g, d), RowMap(g + o.ln1_g, d),
                                  RowMap(g + o.ln1_b, d));
  }

  MatrixMap dtok(g + layout_.tok, static_cast<Eigen::Index>(cfg_.vocab_size), d);
  MatrixMap dpos(g + layout_.pos, static_cast<Eigen::Index>(cfg_.max_len), d);
  for (Eigen::Index t = 0; t < n; ++t) {
    dtok.row(acts.ids[static_cast<std::size_t>(t)]) += dx.row(t);
    dpos.row(t) += dx.row(t);
  }
}

}  // namespace blicer::crossenc
