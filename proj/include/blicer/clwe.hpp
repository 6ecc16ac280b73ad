// SPDX-License-Identifier: Apache-2.0
//
// Cross-lingual space induction (orthogonal Procrustes) and CSLS retrieval.
//
// CSLS of a source word x and a target word y:
//
//   f_C(x, y) = cos(x, y) - gamma_src(y) - gamma_tgt(x)
//
// where gamma_src(y) is the mean cosine of y to its k nearest source
// vectors and gamma_tgt(x) the mean cosine of x to its k nearest target
// vectors. The range for unit vectors is [-3, 1].
#pragma once

#include "blicer/embedding.hpp"
#include "blicer/lexicon.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace blicer {

struct LinearMap {
  Matrix matrix;
  bool orthogonal = false;

  /// max |W^T W - I|.
  double orthogonality_error() const;
};

struct ProcrustesResult {
  LinearMap map;
  /// Set when the seed lexicon has fewer pairs than the dimension.
  bool underdetermined = false;
};

/// Orthogonal W minimizing ||X_seed W - Y_seed||_F, via the SVD of
/// X_seed^T Y_seed = U S V^T, W = U V^T.
ProcrustesResult fit_procrustes(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const Lexicon& seed);

/// Rows of `space` multiplied by `map`, re-normalized to unit length.
EmbeddingSpace apply_map(const EmbeddingSpace& space, const LinearMap& map);

enum class ScoreScaling { None, MinMaxGlobal, MinMaxPerQuery };

std::string_view to_string(ScoreScaling s);
ScoreScaling parse_score_scaling(std::string_view s);

struct CslsConfig {
  std::size_t k = 10;
  ScoreScaling scaling = ScoreScaling::MinMaxGlobal;
};

/// Target (or source) index with its raw CSLS score.
struct Candidate {
  std::size_t index = 0;
  double score = 0.0;
};

/// Precomputed neighbourhood terms over an aligned, unit-normalized pair of
/// spaces. Immutable after construction and safe for concurrent reads.
class CslsIndex {
 public:
  CslsIndex(std::shared_ptr<const EmbeddingSpace> src, std::shared_ptr<const EmbeddingSpace> tgt,
            CslsConfig cfg);
  CslsIndex(EmbeddingSpace src, EmbeddingSpace tgt, CslsConfig cfg);

  const EmbeddingSpace& src() const noexcept { return *src_; }
  const EmbeddingSpace& tgt() const noexcept { return *tgt_; }
  const CslsConfig& config() const noexcept { return cfg_; }

  /// Mean cosine of source word i to its k nearest targets.
  double src_neighbourhood(std::size_t i) const { return src_gamma_[i]; }
  /// Mean cosine of target word j to its k nearest sources.
  double tgt_neighbourhood(std::size_t j) const { return tgt_gamma_[j]; }

  double cosine(std::size_t i, std::size_t j) const;
  double score(std::size_t i, std::size_t j) const;
  double score(const WordPair& pair) const;

  /// f_C(i, *) over the whole target vocabulary.
  Vector scores_for_source(std::size_t i) const;
  /// f_C(*, j) over the whole source vocabulary.
  Vector scores_for_target(std::size_t j) const;

  /// Best `n` targets for source word i: descending score, ties by lower rank.
  std::vector<Candidate> top_targets(std::size_t i, std::size_t n) const;
  /// Best `n` sources for target word j, same ordering rule.
  std::vector<Candidate> top_sources(std::size_t j, std::size_t n) const;

  /// Same spaces with roles swapped; score(j, i) on the result equals
  /// score(i, j) here.
  CslsIndex reversed() const;

 private:
  CslsIndex(std::shared_ptr<const EmbeddingSpace> src, std::shared_ptr<const EmbeddingSpace> tgt,
            CslsConfig cfg, Vector src_gamma, Vector tgt_gamma);

  std::shared_ptr<const EmbeddingSpace> src_;
  std::shared_ptr<const EmbeddingSpace> tgt_;
  CslsConfig cfg_;
  Vector src_gamma_;
  Vector tgt_gamma_;
};

/// Mean of the k largest dot products between `v` and the rows of `space`.
double neighbourhood_similarity(const Vector& v, const EmbeddingSpace& space, std::size_t k);

/// Raw CSLS of two standalone vectors against the given spaces.
double csls_score(const Vector& x, const Vector& y, const EmbeddingSpace& src_space,
                  const EmbeddingSpace& tgt_space, const CslsConfig& cfg);

struct ScoredWord {
  std::string word;
  std::size_t rank = 0;
  double score = 0.0;
};

/// Per query, the `n_top` best targets by raw CSLS. Throws DataError for an
/// unknown query word.
std::vector<std::vector<ScoredWord>> csls_topk(std::span<const std::string> queries, const CslsIndex& index,
                                               std::size_t n_top);

/// Affine min-max scaling to [0, 1]; a constant population maps to 0.5.
/// `MinMaxPerQuery` treats the list as one query's population.
std::vector<double> scale_scores(std::span<const double> scores, ScoreScaling mode);

/// Scales a population grouped by query: globally over all groups for
/// MinMaxGlobal, per group for MinMaxPerQuery.
std::vector<std::vector<double>> scale_grouped(const std::vector<std::vector<double>>& groups,
                                               ScoreScaling mode);

/// `query<TAB>target<TAB>score` per candidate.
std::string format_topk_tsv(std::span<const std::string> queries,
                            const std::vector<std::vector<ScoredWord>>& results);

}  // namespace blicer
