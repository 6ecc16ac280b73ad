// SPDX-License-Identifier: Apache-2.0
#include "blicer/mining.hpp"

#include "blicer/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <tuple>
#include <unordered_set>

namespace blicer {

std::string_view to_string(NegativeCap c) { return c == NegativeCap::PerSide ? "per_side" : "total"; }

NegativeCap parse_negative_cap(std::string_view s) {
  if (s == "per_side") return NegativeCap::PerSide;
  if (s == "total") return NegativeCap::Total;
  throw ConfigError(fmt::format("mining.neg_cap: unknown value '{}' (per_side|total)", s));
}

void MiningConfig::validate() const {
  if (!(delta >= 0.0 && delta <= 2.0)) throw ConfigError(fmt::format("mining.delta={} outside [0, 2]", delta));
  if (n_neg == 0) throw ConfigError("mining.n_neg must be >= 1");
  if (n_freq == 0) throw ConfigError("mining.n_freq must be >= 1");
}

namespace {

struct Silver {
  std::size_t src;
  std::size_t tgt;
  double score;
};

}  // namespace

Lexicon augment_silver(const CslsIndex& index, const Lexicon& seed, const MiningConfig& cfg) {
  cfg.validate();
  const auto& sv = index.src().vocab;
  const auto& tv = index.tgt().vocab;
  if (cfg.n_freq > sv.size() || cfg.n_freq > tv.size()) {
    throw ConfigError(fmt::format("mining.n_freq={} exceeds a vocabulary size (source {}, target {})",
                                  cfg.n_freq, sv.size(), tv.size()));
  }
  Lexicon out({sv.language_tag(), tv.language_tag()});
  if (cfg.n_aug == 0) return out;

  std::vector<Silver> pool;
  pool.reserve(2 * cfg.n_freq);
  for (std::size_t i = 0; i < cfg.n_freq; ++i) {
    const auto best = index.top_targets(i, 1).front();
    pool.push_back({i, best.index, best.score});
  }
  for (std::size_t j = 0; j < cfg.n_freq; ++j) {
    const auto best = index.top_sources(j, 1).front();
    pool.push_back({best.index, j, best.score});
  }
  std::sort(pool.begin(), pool.end(), [](const Silver& a, const Silver& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.src, a.tgt) < std::tie(b.src, b.tgt);
  });

  std::unordered_set<std::string> seed_sources;
  std::unordered_set<std::string> seed_targets;
  for (const auto& p : seed) {
    seed_sources.insert(p.src);
    seed_targets.insert(p.tgt);
  }
  for (const auto& s : pool) {
    if (out.size() >= cfg.n_aug) break;
    WordPair pair{sv.word(s.src), tv.word(s.tgt)};
    if (seed.contains(pair)) continue;
    if (seed_sources.contains(pair.src) || seed_targets.contains(pair.tgt)) continue;
    out.insert(std::move(pair));
  }
  return out;
}

namespace {

struct NegativeCandidate {
  bool target_side;
  std::size_t rank;
  double score;
};

void keep_best(std::vector<NegativeCandidate>& c, std::size_t n) {
  std::sort(c.begin(), c.end(), [](const NegativeCandidate& a, const NegativeCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.target_side != b.target_side) return a.target_side;
    return a.rank < b.rank;
  });
  if (c.size() > n) c.resize(n);
}

}  // namespace

Lexicon mine_negatives(const Lexicon& positives, const CslsIndex& index, const MiningConfig& cfg) {
  cfg.validate();
  const auto& sv = index.src().vocab;
  const auto& tv = index.tgt().vocab;
  Lexicon out({sv.language_tag(), tv.language_tag()});

  for (const auto& pos : positives) {
    const std::size_t x = sv.rank_of(pos.src, "source");
    const std::size_t y = tv.rank_of(pos.tgt, "target");
    const Vector row = index.scores_for_source(x);
    const Vector col = index.scores_for_target(y);
    // Both vectors contain f_C(x+, y+); read it from one of them.
    const double threshold = row[static_cast<Eigen::Index>(y)] - cfg.delta;

    std::vector<NegativeCandidate> tgt_side;
    for (std::size_t j = 0; j < tv.size(); ++j) {
      const double s = row[static_cast<Eigen::Index>(j)];
      if (j != y && s >= threshold) tgt_side.push_back({true, j, s});
    }
    std::vector<NegativeCandidate> src_side;
    for (std::size_t i = 0; i < sv.size(); ++i) {
      const double s = col[static_cast<Eigen::Index>(i)];
      if (i != x && s >= threshold) src_side.push_back({false, i, s});
    }

    std::vector<NegativeCandidate> chosen;
    if (cfg.cap == NegativeCap::PerSide) {
      keep_best(tgt_side, cfg.n_neg);
      keep_best(src_side, cfg.n_neg);
      chosen = std::move(tgt_side);
      chosen.insert(chosen.end(), src_side.begin(), src_side.end());
    } else {
      chosen = std::move(tgt_side);
      chosen.insert(chosen.end(), src_side.begin(), src_side.end());
      keep_best(chosen, cfg.n_neg);
    }

    for (const auto& c : chosen) {
      WordPair neg = c.target_side ? WordPair{pos.src, tv.word(c.rank)} : WordPair{sv.word(c.rank), pos.tgt};
      if (positives.contains(neg)) continue;
      out.insert(std::move(neg));
    }
  }
  return out;
}

}  // namespace blicer
