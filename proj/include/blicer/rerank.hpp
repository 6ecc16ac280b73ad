// SPDX-License-Identifier: Apache-2.0
//
// Retrieve-and-rerank inference: CSLS candidates, cross-encoder rescoring,
// and linear interpolation of the two scores.
#pragma once

#include "blicer/clwe.hpp"
#include "blicer/crossenc/scorer.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace blicer {

inline constexpr double kSupervisedLambda = 0.31;
inline constexpr double kSemiSupervisedLambda = 0.50;

struct RerankConfig {
  double lambda = kSupervisedLambda;
  std::size_t n_cand = 28;

  void validate() const;
};

struct RankedCandidate {
  std::string word;
  std::size_t csls_rank = 0;  // position in the first-stage list
  double raw_csls = 0.0;
  double f_c = 0.0;      // scaled CSLS
  double f_tilde = 0.0;  // symmetric cross-encoder score
  double f_mix = 0.0;
};

struct RankedPrediction {
  std::string query;
  std::vector<RankedCandidate> candidates;
};

/// Top `n_cand` targets of `query` by raw CSLS.
std::vector<ScoredWord> retrieve_candidates(const std::string& query, const CslsIndex& index, std::size_t n_cand);

/// (1 - lambda) * f_c + lambda * f_tilde.
double mix_scores(double f_c, double f_tilde, double lambda);

/// Candidate lists, scaled CSLS and cross-encoder scores for a query set,
/// computed once so that several lambda values can be applied cheaply.
struct ScoredCandidates {
  std::vector<std::string> queries;
  std::vector<std::vector<ScoredWord>> retrieved;
  std::vector<std::vector<double>> f_c;
  /// Empty when no scorer was used.
  std::vector<std::vector<double>> f_tilde;
};

/// `scorer` may be null: then f_tilde is left empty.
ScoredCandidates score_candidates(std::span<const std::string> queries, const CslsIndex& index,
                                  crossenc::PairScorer* scorer, std::size_t n_cand);

/// Mixes and sorts (f_mix descending, ties by first-stage rank). Without
/// cross-encoder scores, f_tilde is reported equal to f_c.
std::vector<RankedPrediction> rank(const ScoredCandidates& scored, double lambda);

/// Full pipeline. With lambda == 0 the scorer is never invoked.
std::vector<RankedPrediction> translate(std::span<const std::string> queries, const CslsIndex& index,
                                        crossenc::PairScorer* scorer, const RerankConfig& cfg);

/// `query<TAB>rank<TAB>candidate<TAB>f_c<TAB>f_tilde<TAB>f_mix`, rank from 1.
std::string format_predictions(const std::vector<RankedPrediction>& predictions);
std::vector<RankedPrediction> parse_predictions(std::string_view text, std::string_view source_name = "<memory>");

}  // namespace blicer
