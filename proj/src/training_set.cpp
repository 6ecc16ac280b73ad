// SPDX-License-Identifier: Apache-2.0
#include "blicer/training_set.hpp"

#include "blicer/error.hpp"

#include <fmt/format.h>

#include <algorithm>

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace blicer {

std::string_view to_string(Polarity p) { return p == Polarity::Positive ? "positive" : "negative"; }
std::string_view to_string(Direction d) { return d == Direction::Forward ? "forward" : "reversed"; }

void PolarisationParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError(fmt::format("mining.alpha={} outside [0, 1]", alpha));
}

double polarise(double z, const PolarisationParams& params, Polarity polarity) {
  if (!(z >= 0.0 && z <= 1.0)) throw DataError(fmt::format("polarise: z={} outside [0, 1]", z));
  params.validate();
  const double a = params.alpha;
  // a*z - a + 1 rearranged so that a = 1 and a = 0 are exact and g+ >= z survives rounding
  if (polarity == Polarity::Negative) return a * z;
  return std::min(1.0, z + (1.0 - a) * (1.0 - z));
}

PairScores scaled_pair_scores(const Lexicon& positives, const Lexicon& negatives, const CslsIndex& index,
                              ScoreScaling scaling) {
  std::vector<WordPair> pairs;
  pairs.reserve(positives.size() + negatives.size());
  pairs.insert(pairs.end(), positives.begin(), positives.end());
  pairs.insert(pairs.end(), negatives.begin(), negatives.end());

  PairScores out;
  if (pairs.empty()) return out;
  if (scaling == ScoreScaling::MinMaxPerQuery) {
    std::unordered_map<std::string, std::vector<std::size_t>> groups;
    std::vector<std::string> order;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      auto [it, fresh] = groups.try_emplace(pairs[i].src);
      if (fresh) order.push_back(pairs[i].src);
      it->second.push_back(i);
    }
    for (const auto& src : order) {
      const auto& members = groups[src];
      std::vector<double> raw;
      for (auto i : members) raw.push_back(index.score(pairs[i]));
      const auto scaled = scale_scores(raw, scaling);
      for (std::size_t m = 0; m < members.size(); ++m) out[pairs[members[m]]] = scaled[m];
    }
    return out;
  }
  std::vector<double> raw;
  raw.reserve(pairs.size());
  for (const auto& p : pairs) raw.push_back(index.score(p));
  const auto scaled = scale_scores(raw, scaling);
  for (std::size_t i = 0; i < pairs.size(); ++i) out[pairs[i]] = scaled[i];
  return out;
}

namespace {

double lookup(const PairScores& scores, const WordPair& p) {
  auto it = scores.find(p);
  if (it == scores.end()) throw DataError(fmt::format("no score for pair ({}, {})", p.src, p.tgt));
  return it->second;
}

void append(TrainingSet& out, const Lexicon& lex, const PairScores& scores, const PolarisationParams& params,
            Polarity polarity, std::size_t copies) {
  const LanguagePair fwd = lex.direction();
  const LanguagePair rev = fwd.reversed();
  for (const auto& p : lex) {
    const double target = polarise(lookup(scores, p), params, polarity);
    for (std::size_t r = 0; r < copies; ++r) out.push_back({p, target, polarity, Direction::Forward, fwd});
    for (std::size_t r = 0; r < copies; ++r) {
      out.push_back({p.reversed(), target, polarity, Direction::Reversed, rev});
    }
  }
}

}  // namespace

TrainingSet assemble_training_set(const Lexicon& positives, const Lexicon& negatives, const PairScores& scores,
                                  const PolarisationParams& params, std::size_t n_rep) {
  params.validate();
  if (n_rep == 0) throw ConfigError("mining.n_rep must be >= 1");
  for (const auto& n : negatives) {
    if (positives.contains(n)) {
      throw DataError(fmt::format("pair ({}, {}) is both positive and negative", n.src, n.tgt));
    }
  }
  TrainingSet out;
  out.reserve(2 * n_rep * positives.size() + 2 * negatives.size());
  append(out, positives, scores, params, Polarity::Positive, n_rep);
  append(out, negatives, scores, params, Polarity::Negative, 1);
  return out;
}

TrainingSet assemble_zero_shot(const ZeroShotDictionary& first, const ZeroShotDictionary& second,
                               const PolarisationParams& params, std::size_t n_rep) {
  std::unordered_set<std::string> pivots;
  for (const auto& p : first.positives) pivots.insert(p.src);
  for (const auto& p : second.positives) {
    if (pivots.contains(p.src)) {
      throw DataError(fmt::format("zero-shot dictionaries share the pivot word '{}'", p.src));
    }
  }
  TrainingSet out = assemble_training_set(first.positives, first.negatives, first.scores, params, n_rep);
  TrainingSet more = assemble_training_set(second.positives, second.negatives, second.scores, params, n_rep);
  out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  return out;
}

std::string format_training_set(const TrainingSet& set) {
  fmt::memory_buffer out;
  for (const auto& e : set) {
    fmt::format_to(std::back_inserter(out), "{}\t{}\t{}\t{}\t{}\t{}\t{}\n", e.pair.src, e.pair.tgt, e.target,
                   to_string(e.polarity), to_string(e.direction), e.langs.src, e.langs.tgt);
  }
  return fmt::to_string(out);
}

TrainingSet parse_training_set(std::string_view text, const LanguagePair& default_langs,
                               std::string_view source_name) {
  TrainingSet out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      auto tab = line.find('\t', start);
      f.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (f.size() != 5 && f.size() != 7) {
      throw ParseError(fmt::format("{}:{}: expected 5 or 7 tab-separated fields, found {}", source_name,
                                   line_no, f.size()));
    }
    TrainingExample e;
    e.pair = {f[0], f[1]};
    auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), e.target);
    if (ec != std::errc() || ptr != f[2].data() + f[2].size() || !(e.target >= 0.0 && e.target <= 1.0)) {
      throw ParseError(fmt::format("{}:{}: bad target '{}'", source_name, line_no, f[2]));
    }
    if (f[3] == "positive") e.polarity = Polarity::Positive;
    else if (f[3] == "negative") e.polarity = Polarity::Negative;
    else throw ParseError(fmt::format("{}:{}: bad polarity '{}'", source_name, line_no, f[3]));
    if (f[4] == "forward") e.direction = Direction::Forward;
    else if (f[4] == "reversed") e.direction = Direction::Reversed;
    else throw ParseError(fmt::format("{}:{}: bad direction '{}'", source_name, line_no, f[4]));
    if (f.size() == 7) {
      e.langs = {f[5], f[6]};
    } else {
      e.langs = e.direction == Direction::Forward ? default_langs : default_langs.reversed();
    }
    out.push_back(std::move(e));
  }
  return out;
}

void write_training_set(const TrainingSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write training set '{}'", path.string()));
  out << format_training_set(set);
}

TrainingSet read_training_set(const std::filesystem::path& path, const LanguagePair& default_langs) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open training set '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_training_set(buf.str(), default_langs, path.string());
}

}  // namespace blicer
