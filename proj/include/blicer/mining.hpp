// SPDX-License-Identifier: Apache-2.0
//
// Positive-set augmentation with high-confidence "silver" pairs and
// margin-based hard-negative mining over a CSLS index.
#pragma once

#include "blicer/clwe.hpp"
#include "blicer/lexicon.hpp"

#include <cstddef>
#include <string_view>

namespace blicer {

enum class NegativeCap { PerSide, Total };

std::string_view to_string(NegativeCap c);
NegativeCap parse_negative_cap(std::string_view s);

struct MiningConfig {
  double delta = 0.1;
  std::size_t n_neg = 28;
  std::size_t n_freq = 20000;
  std::size_t n_aug = 0;
  NegativeCap cap = NegativeCap::PerSide;

  void validate() const;
};

/// Forward and backward CSLS argmax for the `n_freq` most frequent words on
/// each side, pooled and deduplicated. Pairs already in `seed` and pairs that
/// reuse a seed source word or a seed target word are dropped. The `n_aug`
/// best remaining pairs are returned, ordered by descending raw CSLS (ties by
/// source rank, then target rank).
Lexicon augment_silver(const CslsIndex& index, const Lexicon& seed, const MiningConfig& cfg);

/// For every positive (x+, y+): target words y- with f_C(x+, y-) >= f_C(x+, y+) - delta
/// and source words x- with f_C(x-, y+) >= f_C(x+, y+) - delta, capped at
/// `n_neg` best candidates (per side or in total), emitted as (x+, y-) and
/// (x-, y+). Pairs present in `positives` are never emitted.
Lexicon mine_negatives(const Lexicon& positives, const CslsIndex& index, const MiningConfig& cfg);

}  // namespace blicer
