// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "blicer/embedding.hpp"
#include "blicer/lexicon.hpp"
#include "blicer/rerank.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace blicer {

struct EvalResult {
  std::string direction;
  double p_at_1 = 0.0;
  double p_at_5 = 0.0;
  double mrr = 0.0;
  std::size_t n_queries = 0;

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

/// Fraction of gold source words with any gold target among their top `k`
/// predictions. Gold words without predictions count as misses; predicted
/// queries absent from `gold` are a DataError.
double precision_at_k(const std::vector<RankedPrediction>& predictions, const Lexicon& gold, std::size_t k);

/// Mean over gold source words of 1 / (best rank of a gold target), 0 when
/// none is listed.
double mean_reciprocal_rank(const std::vector<RankedPrediction>& predictions, const Lexicon& gold);

EvalResult evaluate(const std::vector<RankedPrediction>& predictions, const Lexicon& gold);

/// `direction<TAB>P@1<TAB>P@5<TAB>MRR<TAB>n`.
std::string format_eval_tsv(const std::vector<EvalResult>& results);
std::string format_eval_table(const std::vector<EvalResult>& results);

struct SynthSpec {
  std::size_t src_vocab = 500;
  std::size_t tgt_vocab = 500;
  std::size_t dim = 32;
  std::uint64_t seed = 1;
  double noise = 0.3;
  std::size_t n_train = 150;
  std::size_t n_dev = 0;
  std::size_t n_test = 200;
  std::string src_lang = "en";
  std::string tgt_lang = "de";

  void validate() const;
};

struct SyntheticBenchmark {
  EmbeddingSpace src;
  EmbeddingSpace tgt;
  Lexicon train;
  Lexicon dev;
  Lexicon test;
  Matrix rotation;
};

/// Source rows are unit-normalized Gaussian vectors named s0000, s0001, ...;
/// target row i (for i < min(vocab sizes)) is the source row times a random
/// rotation plus N(0, noise^2) per coordinate, unit-normalized, named t0000,
/// ... Gold pairs (s_i, t_i) are split disjointly into train, dev and test by
/// a seeded permutation.
SyntheticBenchmark generate_synthetic(const SynthSpec& spec);

/// Orthogonalized seeded Gaussian d x d matrix (QR with a sign-fixed R).
Matrix random_rotation(std::size_t dim, std::uint64_t seed);

}  // namespace blicer
