// SPDX-License-Identifier: Apache-2.0
#include "blicer/error.hpp"
#include "blicer/training_set.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <map>
#include <random>

using namespace blicer;

namespace {

PairScores uniform_scores(const Lexicon& pos, const Lexicon& neg, double value) {
  PairScores s;
  for (const auto& p : pos) s[p] = value;
  for (const auto& p : neg) s[p] = value;
  return s;
}

Lexicon numbered(const std::string& a, const std::string& b, std::size_t n, std::size_t offset = 0) {
  Lexicon lex({"en", "de"});
  for (std::size_t i = 0; i < n; ++i) {
    lex.insert({a + std::to_string(i + offset), b + std::to_string(i + offset)});
  }
  return lex;
}

}  // namespace

TEST_SUITE("training_set") {

TEST_CASE("polarisation at alpha = 0.7") {
  const PolarisationParams p{0.7};
  CHECK(polarise(0.5, p, Polarity::Positive) == doctest::Approx(0.65).epsilon(1e-15));
  CHECK(polarise(0.5, p, Polarity::Negative) == doctest::Approx(0.35).epsilon(1e-15));
}

TEST_CASE("polarisation endpoints") {
  for (double z = 0.0; z <= 1.0; z += 0.125) {
    CHECK(polarise(z, {1.0}, Polarity::Positive) == z);
    CHECK(polarise(z, {1.0}, Polarity::Negative) == z);
    CHECK(polarise(z, {0.0}, Polarity::Positive) == 1.0);
    CHECK(polarise(z, {0.0}, Polarity::Negative) == 0.0);
  }
}

TEST_CASE("polarisation brackets z and is monotone") {
  for (int a = 0; a <= 10; ++a) {
    const PolarisationParams p{a / 10.0};
    double prev_pos = -1.0, prev_neg = -1.0;
    for (int i = 0; i <= 100; ++i) {
      const double z = i / 100.0;
      const double gp = polarise(z, p, Polarity::Positive);
      const double gn = polarise(z, p, Polarity::Negative);
      CHECK(gn <= z);
      CHECK(z <= gp);
      CHECK(std::abs((gp - gn) - (1.0 - p.alpha)) < 1e-12);
      CHECK(gp >= prev_pos);
      CHECK(gn >= prev_neg);
      prev_pos = gp;
      prev_neg = gn;
    }
  }
}

TEST_CASE("polarisation rejects bad inputs") {
  CHECK_THROWS_AS(polarise(1.2, {0.5}, Polarity::Positive), DataError);
  CHECK_THROWS_AS(polarise(-0.1, {0.5}, Polarity::Negative), DataError);
  CHECK_THROWS_AS(polarise(0.5, {1.5}, Polarity::Negative), ConfigError);
}

TEST_CASE("assembled size counts both directions") {
  const auto pos = numbered("p", "q", 2);
  const auto neg = numbered("n", "m", 3);
  const auto set = assemble_training_set(pos, neg, uniform_scores(pos, neg, 0.5), {0.7}, 4);
  CHECK(set.size() == 22);
}

TEST_CASE("size formula on random triples") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> count(0, 30), rep(1, 9);
  for (int t = 0; t < 50; ++t) {
    const auto np = count(rng), nn = count(rng), r = rep(rng);
    const auto pos = numbered("p", "q", np);
    const auto neg = numbered("n", "m", nn);
    const auto set = assemble_training_set(pos, neg, uniform_scores(pos, neg, 0.3), {0.7}, r);
    CHECK(set.size() == 2 * r * np + 2 * nn);
  }
}

TEST_CASE("reversed twins carry identical targets") {
  const auto pos = numbered("p", "q", 3);
  const auto neg = numbered("n", "m", 2);
  PairScores scores;
  double z = 0.1;
  for (const auto& p : pos) scores[p] = (z += 0.2);
  for (const auto& p : neg) scores[p] = (z -= 0.3);
  const auto set = assemble_training_set(pos, neg, scores, {0.7}, 2);
  std::map<std::pair<std::string, std::string>, double> forward;
  for (const auto& e : set) {
    if (e.direction == Direction::Forward) forward[{e.pair.src, e.pair.tgt}] = e.target;
  }
  for (const auto& e : set) {
    if (e.direction != Direction::Reversed) continue;
    CHECK(forward.at({e.pair.tgt, e.pair.src}) == e.target);
    CHECK(e.langs == LanguagePair{"de", "en"});
  }
  bool has_reverse = false;
  for (const auto& e : set) has_reverse = has_reverse || (e.pair == WordPair{"q0", "p0"});
  CHECK(has_reverse);
}

TEST_CASE("alpha = 0 gives binary targets") {
  const auto pos = numbered("p", "q", 4);
  const auto neg = numbered("n", "m", 5);
  PairScores scores;
  double z = 0.0;
  for (const auto& p : pos) scores[p] = (z += 0.1);
  for (const auto& p : neg) scores[p] = (z += 0.1);
  for (const auto& e : assemble_training_set(pos, neg, scores, {0.0}, 3)) {
    CHECK(e.target == (e.polarity == Polarity::Positive ? 1.0 : 0.0));
  }
}

TEST_CASE("assembly errors") {
  const auto pos = numbered("p", "q", 2);
  const auto neg = numbered("n", "m", 2);
  auto scores = uniform_scores(pos, neg, 0.5);
  scores.erase(WordPair{"n1", "m1"});
  CHECK_THROWS_AS(assemble_training_set(pos, neg, scores, {0.7}, 2), DataError);
  const auto overlap = numbered("p", "q", 1);
  CHECK_THROWS_AS(assemble_training_set(pos, overlap, uniform_scores(pos, overlap, 0.5), {0.7}, 2), DataError);
  CHECK_THROWS_AS(assemble_training_set(pos, neg, uniform_scores(pos, neg, 0.5), {0.7}, 0), ConfigError);
}

TEST_CASE("scaled scores span [0, 1] over the union") {
  std::mt19937_64 rng(12);
  const auto src = oracle::random_space(rng, 15, 4, "en", 'x');
  const auto tgt = oracle::random_space(rng, 15, 4, "de", 'y');
  const CslsIndex index(src, tgt, {3, ScoreScaling::None});
  Lexicon pos({"en", "de"}), neg({"en", "de"});
  for (std::size_t i = 0; i < 5; ++i) pos.insert({src.vocab.word(i), tgt.vocab.word(i)});
  for (std::size_t i = 5; i < 12; ++i) neg.insert({src.vocab.word(i), tgt.vocab.word(i + 1)});
  const auto scores = scaled_pair_scores(pos, neg, index, ScoreScaling::MinMaxGlobal);
  const auto m = oracle::csls_matrix(src, tgt, 3);
  std::vector<double> raw;
  std::vector<WordPair> all(pos.begin(), pos.end());
  all.insert(all.end(), neg.begin(), neg.end());
  for (const auto& p : all) raw.push_back(m[*src.vocab.find(p.src)][*tgt.vocab.find(p.tgt)]);
  const auto expected = oracle::min_max(raw);
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(scores.at(all[i]) == doctest::Approx(expected[i]).epsilon(1e-9));
}

TEST_CASE("zero-shot assembly unions two pivot dictionaries") {
  const Lexicon a({"en", "de"}, {{"a1", "x1"}, {"a2", "x2"}, {"a3", "x3"}});
  const Lexicon b({"en", "fr"}, {{"b1", "y1"}, {"b2", "y2"}, {"b3", "y3"}});
  ZeroShotDictionary first{a, Lexicon({"en", "de"}), uniform_scores(a, Lexicon(), 0.5)};
  ZeroShotDictionary second{b, Lexicon({"en", "fr"}), uniform_scores(b, Lexicon(), 0.5)};
  const auto set = assemble_zero_shot(first, second, {0.7}, 1);
  CHECK(set.size() == 12);
  std::size_t french = 0;
  for (const auto& e : set) french += (e.langs.src == "fr" || e.langs.tgt == "fr") ? 1 : 0;
  CHECK(french == 6);
}

TEST_CASE("zero-shot dictionaries may not share a pivot word") {
  const Lexicon a({"en", "de"}, {{"the", "der"}});
  const Lexicon b({"en", "fr"}, {{"the", "le"}});
  ZeroShotDictionary first{a, Lexicon({"en", "de"}), uniform_scores(a, Lexicon(), 0.5)};
  ZeroShotDictionary second{b, Lexicon({"en", "fr"}), uniform_scores(b, Lexicon(), 0.5)};
  CHECK_THROWS_AS(assemble_zero_shot(first, second, {0.7}, 1), DataError);
}

TEST_CASE("training-set TSV round-trip") {
  const auto pos = numbered("p", "q", 2);
  const auto neg = numbered("n", "m", 2);
  PairScores scores;
  double z = 0.0;
  for (const auto& p : pos) scores[p] = (z += 0.3);
  for (const auto& p : neg) scores[p] = (z -= 0.1);
  const auto set = assemble_training_set(pos, neg, scores, {0.7}, 2);
  CHECK(parse_training_set(format_training_set(set), {"xx", "yy"}) == set);
  const auto path = std::filesystem::temp_directory_path() / "blicer_training.tsv";
  write_training_set(set, path);
  CHECK(read_training_set(path, {"en", "de"}) == set);
  std::filesystem::remove(path);
}

TEST_CASE("five-column rows take the default languages") {
  const auto set = parse_training_set("dog\thund\t0.9\tpositive\tforward\nhund\tdog\t0.9\tpositive\treversed\n",
                                      {"en", "de"});
  REQUIRE(set.size() == 2);
  CHECK(set[0].langs == LanguagePair{"en", "de"});
  CHECK(set[1].langs == LanguagePair{"de", "en"});
  CHECK_THROWS_AS(parse_training_set("a\tb\t0.5\tmaybe\tforward\n", {"en", "de"}), ParseError);
  CHECK_THROWS_AS(parse_training_set("a\tb\t0.5\n", {"en", "de"}), ParseError);
}

}
