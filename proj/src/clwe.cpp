// SPDX-License-Identifier: Apache-2.0
#include "blicer/clwe.hpp"

#include "blicer/error.hpp"

#include <fmt/format.h>

#include <Eigen/SVD>

#include <algorithm>
#include <functional>
#include <numeric>

namespace blicer {

double LinearMap::orthogonality_error() const {
  const Matrix gram = matrix.transpose() * matrix;
  return (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

ProcrustesResult fit_procrustes(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const Lexicon& seed) {
  if (seed.empty()) throw DataError("Procrustes needs a non-empty seed lexicon");
  if (src.dim() != tgt.dim()) {
    throw DataError(fmt::format("dimension mismatch: source d={} vs target d={}", src.dim(), tgt.dim()));
  }
  if (!src.unit_normalized || !tgt.unit_normalized) {
    throw DataError("Procrustes expects unit-normalized spaces");
  }
  const auto d = static_cast<Eigen::Index>(src.dim());
  Matrix cross = Matrix::Zero(d, d);
  for (const auto& p : seed) {
    const auto i = static_cast<Eigen::Index>(src.vocab.rank_of(p.src, "source"));
    const auto j = static_cast<Eigen::Index>(tgt.vocab.rank_of(p.tgt, "target"));
    cross.noalias() += src.matrix.row(i).transpose() * tgt.matrix.row(j);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ProcrustesResult result;
  result.map.matrix = svd.matrixU() * svd.matrixV().transpose();
  result.map.orthogonal = true;
  result.underdetermined = seed.size() < src.dim();
  return result;
}

EmbeddingSpace apply_map(const EmbeddingSpace& space, const LinearMap& map) {
  if (static_cast<Eigen::Index>(space.dim()) != map.matrix.rows()) {
    throw DataError(fmt::format("cannot apply a {}x{} map to d={} vectors", map.matrix.rows(),
                                map.matrix.cols(), space.dim()));
  }
  EmbeddingSpace out;
  out.vocab = space.vocab;
  out.matrix = space.matrix * map.matrix;
  out.unit_normalized = false;
  return unit_normalize(std::move(out));
}

std::string_view to_string(ScoreScaling s) {
  switch (s) {
    case ScoreScaling::None: return "none";
    case ScoreScaling::MinMaxGlobal: return "minmax_global";
    case ScoreScaling::MinMaxPerQuery: return "minmax_per_query";
  }
  return "?";
}

ScoreScaling parse_score_scaling(std::string_view s) {
  if (s == "none") return ScoreScaling::None;
  if (s == "minmax_global") return ScoreScaling::MinMaxGlobal;
  if (s == "minmax_per_query") return ScoreScaling::MinMaxPerQuery;
  throw ConfigError(fmt::format("unknown scaling '{}' (none|minmax_global|minmax_per_query)", s));
}

namespace {

double top_k_mean(std::vector<double>& values, std::size_t k) {
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k - 1), values.end(),
                   std::greater<>());
  std::sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += values[i];
  return sum / static_cast<double>(k);
}

// For every row of `a`, the mean of its k largest dot products with rows of `b`.
Vector neighbourhood_terms(const Matrix& a, const Matrix& b, std::size_t k) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();
  // Keep each similarity block around 32 MB.
  const Eigen::Index block = std::max<Eigen::Index>(1, (Eigen::Index{1} << 22) / std::max<Eigen::Index>(m, 1));
  Vector out(n);
  std::vector<double> row(static_cast<std::size_t>(m));
  Matrix sims;
  for (Eigen::Index start = 0; start < n; start += block) {
    const Eigen::Index rows = std::min(block, n - start);
    sims.noalias() = a.middleRows(start, rows) * b.transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      std::copy(sims.row(r).data(), sims.row(r).data() + m, row.begin());
      out[start + r] = top_k_mean(row, k);
    }
  }
  return out;
}

void check_compatible(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const CslsConfig& cfg) {
  if (src.dim() != tgt.dim()) {
    throw DataError(fmt::format("dimension mismatch: source d={} vs target d={}", src.dim(), tgt.dim()));
  }
  if (cfg.k == 0) throw ConfigError("csls.k must be >= 1");
  if (cfg.k > src.size() || cfg.k > tgt.size()) {
    throw ConfigError(fmt::format("csls.k={} exceeds a vocabulary size (source {}, target {})", cfg.k,
                                  src.size(), tgt.size()));
  }
  if (!src.unit_normalized || !tgt.unit_normalized) throw DataError("CSLS expects unit-normalized spaces");
}

std::vector<Candidate> best_of(const Vector& scores, std::size_t n) {
  std::vector<Candidate> all(static_cast<std::size_t>(scores.size()));
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = {j, scores[static_cast<Eigen::Index>(j)]};
  const std::size_t keep = std::min(n, all.size());
  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), better);
  all.resize(keep);
  return all;
}

}  // namespace

CslsIndex::CslsIndex(std::shared_ptr<const EmbeddingSpace> src, std::shared_ptr<const EmbeddingSpace> tgt,
                     CslsConfig cfg)
    : src_(std::move(src)), tgt_(std::move(tgt)), cfg_(cfg) {
  check_compatible(*src_, *tgt_, cfg_);
  src_gamma_ = neighbourhood_terms(src_->matrix, tgt_->matrix, cfg_.k);
  tgt_gamma_ = neighbourhood_terms(tgt_->matrix, src_->matrix, cfg_.k);
}

CslsIndex::CslsIndex(EmbeddingSpace src, EmbeddingSpace tgt, CslsConfig cfg)
    : CslsIndex(std::make_shared<const EmbeddingSpace>(std::move(src)),
                std::make_shared<const EmbeddingSpace>(std::move(tgt)), cfg) {}

CslsIndex::CslsIndex(std::shared_ptr<const EmbeddingSpace> src, std::shared_ptr<const EmbeddingSpace> tgt,
                     CslsConfig cfg, Vector src_gamma, Vector tgt_gamma)
    : src_(std::move(src)),
      tgt_(std::move(tgt)),
      cfg_(cfg),
      src_gamma_(std::move(src_gamma)),
      tgt_gamma_(std::move(tgt_gamma)) {}

double CslsIndex::cosine(std::size_t i, std::size_t j) const {
  return src_->matrix.row(static_cast<Eigen::Index>(i)).dot(tgt_->matrix.row(static_cast<Eigen::Index>(j)));
}

double CslsIndex::score(std::size_t i, std::size_t j) const {
  return cosine(i, j) - tgt_gamma_[static_cast<Eigen::Index>(j)] - src_gamma_[static_cast<Eigen::Index>(i)];
}

double CslsIndex::score(const WordPair& pair) const {
  return score(src_->vocab.rank_of(pair.src, "source"), tgt_->vocab.rank_of(pair.tgt, "target"));
}

Vector CslsIndex::scores_for_source(std::size_t i) const {
  Vector cos = tgt_->matrix * src_->matrix.row(static_cast<Eigen::Index>(i)).transpose();
  return (cos - tgt_gamma_).array() - src_gamma_[static_cast<Eigen::Index>(i)];
}

Vector CslsIndex::scores_for_target(std::size_t j) const {
  Vector cos = src_->matrix * tgt_->matrix.row(static_cast<Eigen::Index>(j)).transpose();
  return (cos - src_gamma_).array() - tgt_gamma_[static_cast<Eigen::Index>(j)];
}

std::vector<Candidate> CslsIndex::top_targets(std::size_t i, std::size_t n) const {
  return best_of(scores_for_source(i), n);
}

std::vector<Candidate> CslsIndex::top_sources(std::size_t j, std::size_t n) const {
  return best_of(scores_for_target(j), n);
}

CslsIndex CslsIndex::reversed() const { return CslsIndex(tgt_, src_, cfg_, tgt_gamma_, src_gamma_); }

double neighbourhood_similarity(const Vector& v, const EmbeddingSpace& space, std::size_t k) {
  if (k == 0 || k > space.size()) {
    throw ConfigError(fmt::format("k={} outside [1, {}]", k, space.size()));
  }
  if (static_cast<std::size_t>(v.size()) != space.dim()) {
    throw DataError(fmt::format("dimension mismatch: vector d={} vs space d={}", v.size(), space.dim()));
  }
  Vector sims = space.matrix * v;
  std::vector<double> values(sims.data(), sims.data() + sims.size());
  return top_k_mean(values, k);
}

double csls_score(const Vector& x, const Vector& y, const EmbeddingSpace& src_space,
                  const EmbeddingSpace& tgt_space, const CslsConfig& cfg) {
  check_compatible(src_space, tgt_space, cfg);
  if (x.size() != y.size() || static_cast<std::size_t>(x.size()) != src_space.dim()) {
    throw DataError("dimension mismatch between query vectors and spaces");
  }
  return x.dot(y) - neighbourhood_similarity(y, src_space, cfg.k) - neighbourhood_similarity(x, tgt_space, cfg.k);
}

std::vector<std::vector<ScoredWord>> csls_topk(std::span<const std::string> queries, const CslsIndex& index,
                                               std::size_t n_top) {
  if (n_top == 0) throw ConfigError("n_top must be >= 1");
  std::vector<std::vector<ScoredWord>> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    const std::size_t i = index.src().vocab.rank_of(q, "source");
    std::vector<ScoredWord> row;
    for (const auto& c : index.top_targets(i, n_top)) {
      row.push_back({index.tgt().vocab.word(c.index), c.index, c.score});
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<double> scale_scores(std::span<const double> scores, ScoreScaling mode) {
  if (scores.empty()) throw DataError("cannot scale an empty score list");
  std::vector<double> out(scores.begin(), scores.end());
  if (mode == ScoreScaling::None) return out;
  const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
  const double min = *lo;
  const double range = *hi - min;
  for (double& v : out) v = range > 0.0 ? (v - min) / range : 0.5;
  return out;
}

std::vector<std::vector<double>> scale_grouped(const std::vector<std::vector<double>>& groups,
                                               ScoreScaling mode) {
  std::vector<std::vector<double>> out;
  out.reserve(groups.size());
  if (mode != ScoreScaling::MinMaxGlobal) {
    for (const auto& g : groups) out.push_back(g.empty() ? g : scale_scores(g, mode));
    return out;
  }
  std::vector<double> flat;
  for (const auto& g : groups) flat.insert(flat.end(), g.begin(), g.end());
  if (flat.empty()) return groups;
  const auto scaled = scale_scores(flat, mode);
  auto it = scaled.begin();
  for (const auto& g : groups) {
    out.emplace_back(it, it + static_cast<std::ptrdiff_t>(g.size()));
    it += static_cast<std::ptrdiff_t>(g.size());
  }
  return out;
}

std::string format_topk_tsv(std::span<const std::string> queries,
                            const std::vector<std::vector<ScoredWord>>& results) {
  std::string out;
  for (std::size_t q = 0; q < queries.size() && q < results.size(); ++q) {
    for (const auto& c : results[q]) out += fmt::format("{}\t{}\t{:.8f}\n", queries[q], c.word, c.score);
  }
  return out;
}

}  // namespace blicer
