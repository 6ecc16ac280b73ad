// SPDX-License-Identifier: Apache-2.0
//
// Score polarisation and assembly of cross-encoder training examples from
// positive and negative lexicons.
#pragma once

#include "blicer/clwe.hpp"
#include "blicer/lexicon.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace blicer {

enum class Polarity { Positive, Negative };
enum class Direction { Forward, Reversed };

std::string_view to_string(Polarity p);
std::string_view to_string(Direction d);

struct PolarisationParams {
  double alpha = 0.7;

  void validate() const;
};

/// g+(z) = alpha*z - alpha + 1 for positives, g-(z) = alpha*z for negatives.
/// Throws DataError if z is outside [0, 1].
double polarise(double z, const PolarisationParams& params, Polarity polarity);

struct TrainingExample {
  WordPair pair;
  double target = 0.0;
  Polarity polarity = Polarity::Positive;
  Direction direction = Direction::Forward;
  /// Language of pair.src and pair.tgt, in pair order.
  LanguagePair langs;

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

using TrainingSet = std::vector<TrainingExample>;
using PairScores = std::unordered_map<WordPair, double, WordPairHash>;

/// Raw CSLS for every pair of `positives` and `negatives`, min-max scaled
/// over their union (MinMaxGlobal / MinMaxPerQuery) or left raw (None).
/// Per-query scaling groups pairs by source word.
PairScores scaled_pair_scores(const Lexicon& positives, const Lexicon& negatives, const CslsIndex& index,
                              ScoreScaling scaling);

/// Per positive: n_rep forward + n_rep reversed copies targeted g+(score);
/// per negative: one forward + one reversed copy targeted g-(score).
TrainingSet assemble_training_set(const Lexicon& positives, const Lexicon& negatives, const PairScores& scores,
                                  const PolarisationParams& params, std::size_t n_rep);

struct ZeroShotDictionary {
  Lexicon positives;  // pivot -> language
  Lexicon negatives;
  PairScores scores;
};

/// Union of two pivot dictionaries' training sets. The pivot (source) sides
/// must not share a word.
TrainingSet assemble_zero_shot(const ZeroShotDictionary& first, const ZeroShotDictionary& second,
                               const PolarisationParams& params, std::size_t n_rep);

/// `src<TAB>tgt<TAB>target<TAB>polarity<TAB>direction<TAB>src_lang<TAB>tgt_lang`.
std::string format_training_set(const TrainingSet& set);
/// Accepts the 7-column form, or the 5-column form with `default_langs`
/// (swapped for reversed rows).
TrainingSet parse_training_set(std::string_view text, const LanguagePair& default_langs,
                               std::string_view source_name = "<memory>");
void write_training_set(const TrainingSet& set, const std::filesystem::path& path);
TrainingSet read_training_set(const std::filesystem::path& path, const LanguagePair& default_langs);

}  // namespace blicer
