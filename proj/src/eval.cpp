// SPDX-License-Identifier: Apache-2.0
#include "blicer/eval.hpp"

#include "blicer/error.hpp"

#include <fmt/format.h>

#include <Eigen/QR>

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace blicer {

namespace {

// Best 1-based rank of any gold target for each gold source word; 0 = miss.
std::unordered_map<std::string, std::size_t> best_gold_ranks(const std::vector<RankedPrediction>& predictions,
                                                             const Lexicon& gold) {
  const auto golds = gold.targets_by_source();
  std::unordered_map<std::string, std::size_t> best;
  for (const auto& [src, _] : golds) best[src] = 0;
  for (const auto& p : predictions) {
    auto it = golds.find(p.query);
    if (it == golds.end()) {
      throw DataError(fmt::format("predicted query '{}' has no gold translation", p.query));
    }
    const std::unordered_set<std::string> targets(it->second.begin(), it->second.end());
    for (std::size_t r = 0; r < p.candidates.size(); ++r) {
      if (targets.contains(p.candidates[r].word)) {
        auto& b = best[p.query];
        if (b == 0 || r + 1 < b) b = r + 1;
        break;
      }
    }
  }
  return best;
}

}  // namespace

double precision_at_k(const std::vector<RankedPrediction>& predictions, const Lexicon& gold, std::size_t k) {
  const auto best = best_gold_ranks(predictions, gold);
  if (best.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& [_, r] : best) hits += (r != 0 && r <= k) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(best.size());
}

double mean_reciprocal_rank(const std::vector<RankedPrediction>& predictions, const Lexicon& gold) {
  const auto best = best_gold_ranks(predictions, gold);
  if (best.empty()) return 0.0;
  // Sum in gold order so the result does not depend on hash iteration order.
  double sum = 0.0;
  for (const auto& src : gold.source_words()) {
    const std::size_t r = best.at(src);
    if (r != 0) sum += 1.0 / static_cast<double>(r);
  }
  return sum / static_cast<double>(best.size());
}

EvalResult evaluate(const std::vector<RankedPrediction>& predictions, const Lexicon& gold) {
  EvalResult r;
  r.direction = gold.direction().src + "-" + gold.direction().tgt;
  r.p_at_1 = precision_at_k(predictions, gold, 1);
  r.p_at_5 = precision_at_k(predictions, gold, 5);
  r.mrr = mean_reciprocal_rank(predictions, gold);
  r.n_queries = gold.source_words().size();
  return r;
}

std::string format_eval_tsv(const std::vector<EvalResult>& results) {
  std::string out;
  for (const auto& r : results) {
    out += fmt::format("{}\t{:.6f}\t{:.6f}\t{:.6f}\t{}\n", r.direction, r.p_at_1, r.p_at_5, r.mrr, r.n_queries);
  }
  return out;
}

std::string format_eval_table(const std::vector<EvalResult>& results) {
  std::string out = fmt::format("{:<12} {:>8} {:>8} {:>8} {:>6}\n", "direction", "P@1", "P@5", "MRR", "n");
  for (const auto& r : results) {
    out += fmt::format("{:<12} {:>8.2f} {:>8.2f} {:>8.2f} {:>6}\n", r.direction, 100.0 * r.p_at_1,
                       100.0 * r.p_at_5, 100.0 * r.mrr, r.n_queries);
  }
  return out;
}

void SynthSpec::validate() const {
  if (src_vocab == 0 || tgt_vocab == 0) throw ConfigError("synth vocabulary sizes must be >= 1");
  if (dim == 0) throw ConfigError("synth.dim must be >= 1");
  if (!(noise >= 0.0)) throw ConfigError(fmt::format("synth.noise={} must be >= 0", noise));
  const std::size_t gold = std::min(src_vocab, tgt_vocab);
  if (n_train + n_dev + n_test > gold) {
    throw ConfigError(fmt::format("synth splits overlap: train {} + dev {} + test {} > {} gold pairs", n_train,
                                  n_dev, n_test, gold));
  }
}

Matrix random_rotation(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

namespace {

std::vector<std::string> synthetic_words(char prefix, std::size_t n) {
  const std::size_t width = std::max<std::size_t>(4, fmt::format("{}", n > 0 ? n - 1 : 0).size());
  std::vector<std::string> words;
  words.reserve(n);
  for (std::size_t i = 0; i < n; ++i) words.push_back(fmt::format("{}{:0{}}", prefix, i, width));
  return words;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

SyntheticBenchmark generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const auto d = static_cast<Eigen::Index>(spec.dim);
  SyntheticBenchmark b;
  b.rotation = random_rotation(spec.dim, stream_seed(spec.seed, 1));

  std::mt19937_64 rng(stream_seed(spec.seed, 2));
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix src(static_cast<Eigen::Index>(spec.src_vocab), d);
  for (Eigen::Index i = 0; i < src.rows(); ++i)
    for (Eigen::Index j = 0; j < d; ++j) src(i, j) = normal(rng);
  for (Eigen::Index i = 0; i < src.rows(); ++i) src.row(i).normalize();

  Matrix tgt(static_cast<Eigen::Index>(spec.tgt_vocab), d);
  const auto gold = static_cast<Eigen::Index>(std::min(spec.src_vocab, spec.tgt_vocab));
  for (Eigen::Index i = 0; i < tgt.rows(); ++i) {
    if (i < gold) {
      tgt.row(i) = src.row(i) * b.rotation;
      for (Eigen::Index j = 0; j < d; ++j) tgt(i, j) += spec.noise * normal(rng);
    } else {
      for (Eigen::Index j = 0; j < d; ++j) tgt(i, j) = normal(rng);
    }
  }

  b.src.vocab = Vocabulary(spec.src_lang, synthetic_words('s', spec.src_vocab));
  b.src.matrix = std::move(src);
  b.src.unit_normalized = true;
  b.tgt.vocab = Vocabulary(spec.tgt_lang, synthetic_words('t', spec.tgt_vocab));
  b.tgt.matrix = std::move(tgt);
  b.tgt = unit_normalize(std::move(b.tgt));

  std::vector<std::size_t> order(static_cast<std::size_t>(gold));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 split_rng(stream_seed(spec.seed, 3));
  std::shuffle(order.begin(), order.end(), split_rng);

  const LanguagePair dir{spec.src_lang, spec.tgt_lang};
  b.train = Lexicon(dir);
  b.dev = Lexicon(dir);
  b.test = Lexicon(dir);
  std::size_t at = 0;
  auto fill = [&](Lexicon& lex, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++at) {
      lex.insert({b.src.vocab.word(order[at]), b.tgt.vocab.word(order[at])});
    }
  };
  fill(b.train, spec.n_train);
  fill(b.dev, spec.n_dev);
  fill(b.test, spec.n_test);
  return b;
}

}  // namespace blicer
