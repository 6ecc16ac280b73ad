// SPDX-License-Identifier: Apache-2.0
#include "blicer/error.hpp"
#include "blicer/mining.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <map>
#include <random>
#include <set>

using namespace blicer;

namespace {

struct Instance {
  EmbeddingSpace src;
  EmbeddingSpace tgt;
};

Instance random_instance(std::uint64_t seed, std::size_t nx, std::size_t ny, std::size_t d) {
  std::mt19937_64 rng(seed);
  return {oracle::random_space(rng, nx, d, "en", 'x'), oracle::random_space(rng, ny, d, "de", 'y')};
}

// Forward and backward argmax over the brute-force matrix, pooled and sorted.
std::vector<WordPair> silver_oracle(const Instance& in, std::size_t k, std::size_t n_freq, const Lexicon& seed,
                                    std::size_t n_aug) {
  const auto m = oracle::csls_matrix(in.src, in.tgt, k);
  std::map<std::pair<std::size_t, std::size_t>, double> pool;
  for (std::size_t i = 0; i < n_freq; ++i) {
    const auto order = oracle::argsort_desc(m[i]);
    pool[{i, order[0]}] = m[i][order[0]];
  }
  for (std::size_t j = 0; j < n_freq; ++j) {
    std::vector<double> col;
    for (std::size_t i = 0; i < in.src.size(); ++i) col.push_back(m[i][j]);
    const auto order = oracle::argsort_desc(col);
    pool[{order[0], j}] = col[order[0]];
  }
  std::vector<std::tuple<double, std::size_t, std::size_t>> sorted;
  for (const auto& [key, s] : pool) sorted.emplace_back(-s, key.first, key.second);
  std::sort(sorted.begin(), sorted.end());
  std::set<std::string> seed_src, seed_tgt;
  for (const auto& p : seed) {
    seed_src.insert(p.src);
    seed_tgt.insert(p.tgt);
  }
  std::vector<WordPair> out;
  for (const auto& [s, i, j] : sorted) {
    if (out.size() == n_aug) break;
    WordPair p{in.src.vocab.word(i), in.tgt.vocab.word(j)};
    if (seed_src.count(p.src) || seed_tgt.count(p.tgt)) continue;
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST_SUITE("mining") {

TEST_CASE("n_aug = 0 yields no silver pairs") {
  const auto in = random_instance(1, 20, 20, 4);
  const CslsIndex index(in.src, in.tgt, {3, ScoreScaling::None});
  MiningConfig cfg;
  cfg.n_freq = 20;
  cfg.n_aug = 0;
  CHECK(augment_silver(index, Lexicon({"en", "de"}), cfg).empty());
}

TEST_CASE("identical spaces give identity silver pairs") {
  std::mt19937_64 rng(2);
  Instance in;
  in.src = oracle::random_space(rng, 25, 6, "en", 'x');
  in.tgt = in.src;
  in.tgt.vocab = Vocabulary("de", oracle::words('y', 25));
  const CslsIndex index(in.src, in.tgt, {5, ScoreScaling::None});
  MiningConfig cfg;
  cfg.n_freq = 25;
  cfg.n_aug = 10;
  const Lexicon empty({"en", "de"});
  const auto silver = augment_silver(index, empty, cfg);
  REQUIRE(silver.size() == 10);
  for (const auto& p : silver) CHECK(p.src.substr(1) == p.tgt.substr(1));
  CHECK(silver.pairs() == silver_oracle(in, 5, 25, empty, 10));
}

TEST_CASE("silver pairs match the brute-force oracle") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto in = random_instance(seed, 30, 35, 5);
    const CslsIndex index(in.src, in.tgt, {4, ScoreScaling::None});
    const Lexicon seed_lex({"en", "de"}, {{"x0", "y3"}, {"x5", "y5"}});
    MiningConfig cfg;
    cfg.n_freq = 20;
    cfg.n_aug = 12;
    CHECK(augment_silver(index, seed_lex, cfg).pairs() == silver_oracle(in, 4, 20, seed_lex, 12));
  }
}

TEST_CASE("silver pairs never contradict the seed") {
  std::mt19937_64 rng(2);
  Instance in;
  in.src = oracle::random_space(rng, 10, 4, "en", 'x');
  in.tgt = in.src;
  in.tgt.vocab = Vocabulary("de", oracle::words('y', 10));
  const CslsIndex index(in.src, in.tgt, {2, ScoreScaling::None});
  const Lexicon seed({"en", "de"}, {{"x0", "y1"}});
  MiningConfig cfg;
  cfg.n_freq = 10;
  cfg.n_aug = 100;
  const auto silver = augment_silver(index, seed, cfg);
  CHECK_FALSE(silver.contains({"x0", "y0"}));
  CHECK_FALSE(silver.contains({"x1", "y1"}));
  for (const auto& p : silver) {
    CHECK(p.src != "x0");
    CHECK(p.tgt != "y1");
  }
}

TEST_CASE("n_freq above a vocabulary size is rejected") {
  const auto in = random_instance(1, 10, 8, 3);
  const CslsIndex index(in.src, in.tgt, {2, ScoreScaling::None});
  MiningConfig cfg;
  cfg.n_freq = 9;
  cfg.n_aug = 1;
  CHECK_THROWS_AS(augment_silver(index, Lexicon({"en", "de"}), cfg), ConfigError);
}

TEST_CASE("a target scoring above the positive is a negative") {
  bool found = false;
  for (std::uint64_t seed = 0; seed < 50 && !found; ++seed) {
    const auto in = random_instance(seed, 15, 15, 4);
    const auto m = oracle::csls_matrix(in.src, in.tgt, 3);
    for (std::size_t p = 0; p < 15 && !found; ++p) {
      for (std::size_t q = 0; q < 15 && !found; ++q) {
        const double gap = m[0][q] - m[0][p];
        if (q == p || gap <= 0.0 || gap > 0.1) continue;
        found = true;
        const CslsIndex index(in.src, in.tgt, {3, ScoreScaling::None});
        const Lexicon pos({"en", "de"}, {{"x0", in.tgt.vocab.word(p)}});
        MiningConfig cfg;
        cfg.delta = 0.1;
        cfg.n_neg = 15;
        CHECK(mine_negatives(pos, index, cfg).contains({"x0", in.tgt.vocab.word(q)}));
      }
    }
  }
  CHECK(found);
}

TEST_CASE("delta = 0 with the positive on top mines nothing") {
  std::mt19937_64 rng(2);
  Instance in;
  in.src = oracle::random_space(rng, 10, 6, "en", 'x');
  in.tgt = in.src;
  in.tgt.vocab = Vocabulary("de", oracle::words('y', 10));
  const CslsIndex index(in.src, in.tgt, {2, ScoreScaling::None});
  const auto m = oracle::csls_matrix(in.src, in.tgt, 2);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    bool top = true;
    for (std::size_t j = 0; j < 10; ++j) top = top && (j == i || m[i][j] < m[i][i]);
    for (std::size_t j = 0; j < 10; ++j) top = top && (j == i || m[j][i] < m[i][i]);
    if (!top) continue;
    ++checked;
    const Lexicon pos({"en", "de"}, {{in.src.vocab.word(i), in.tgt.vocab.word(i)}});
    MiningConfig cfg;
    cfg.delta = 0.0;
    CHECK(mine_negatives(pos, index, cfg).empty());
  }
  CHECK(checked > 0);
}

TEST_CASE("pairs already positive are excluded") {
  const auto in = random_instance(3, 12, 12, 3);
  const CslsIndex index(in.src, in.tgt, {3, ScoreScaling::None});
  Lexicon pos({"en", "de"});
  for (std::size_t i = 0; i < 6; ++i) pos.insert({in.src.vocab.word(i), in.tgt.vocab.word(i)});
  pos.insert({"x0", "y1"});
  MiningConfig cfg;
  cfg.delta = 2.0;
  cfg.n_neg = 100;
  const auto neg = mine_negatives(pos, index, cfg);
  CHECK(neg.size() > 0);
  for (const auto& p : neg) CHECK_FALSE(pos.contains(p));
}

TEST_CASE("caps are applied per side or in total") {
  const auto in = random_instance(4, 20, 20, 3);
  const CslsIndex index(in.src, in.tgt, {3, ScoreScaling::None});
  const Lexicon pos({"en", "de"}, {{"x0", "y0"}});
  MiningConfig cfg;
  cfg.delta = 2.0;
  cfg.n_neg = 4;
  const auto per_side = mine_negatives(pos, index, cfg);
  std::size_t tgt_side = 0, src_side = 0;
  for (const auto& p : per_side) (p.src == "x0" ? tgt_side : src_side) += 1;
  CHECK(tgt_side == 4);
  CHECK(src_side == 4);
  cfg.cap = NegativeCap::Total;
  CHECK(mine_negatives(pos, index, cfg).size() == 4);
  CHECK(parse_negative_cap(to_string(NegativeCap::Total)) == NegativeCap::Total);
  CHECK_THROWS_AS(parse_negative_cap("both"), ConfigError);
}

TEST_CASE("per-side cap keeps the highest scoring candidates") {
  const auto in = random_instance(6, 30, 30, 4);
  const CslsIndex index(in.src, in.tgt, {3, ScoreScaling::None});
  const auto m = oracle::csls_matrix(in.src, in.tgt, 3);
  const Lexicon pos({"en", "de"}, {{"x2", "y7"}});
  MiningConfig cfg;
  cfg.delta = 2.0;
  cfg.n_neg = 5;
  const auto neg = mine_negatives(pos, index, cfg);
  auto row = m[2];
  row[7] = -1e9;
  const auto order = oracle::argsort_desc(row);
  for (std::size_t r = 0; r < 5; ++r) CHECK(neg.contains({"x2", in.tgt.vocab.word(order[r])}));
}

TEST_CASE("mined negatives satisfy the margin and avoid positives") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto in = random_instance(seed + 40, 25, 30, 5);
    const CslsIndex index(in.src, in.tgt, {5, ScoreScaling::None});
    Lexicon pos({"en", "de"});
    for (std::size_t i = 0; i < 8; ++i) pos.insert({in.src.vocab.word(i), in.tgt.vocab.word(i)});
    MiningConfig cfg;
    cfg.delta = 0.15;
    cfg.n_neg = 6;
    const auto neg = mine_negatives(pos, index, cfg);
    CHECK(oracle::unsupported_negatives(pos, neg, in.src, in.tgt, 5, 0.15, 1e-12) == 0);
    for (const auto& p : neg) CHECK_FALSE(pos.contains(p));
  }
}

TEST_CASE("unknown positive word is a data error") {
  const auto in = random_instance(1, 5, 5, 3);
  const CslsIndex index(in.src, in.tgt, {2, ScoreScaling::None});
  CHECK_THROWS_AS(mine_negatives(Lexicon({"en", "de"}, {{"x0", "nope"}}), index, MiningConfig{}), DataError);
}

TEST_CASE("mining config validation") {
  MiningConfig cfg;
  cfg.delta = 2.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.delta = 0.1;
  cfg.n_neg = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

}
