// SPDX-License-Identifier: Apache-2.0
#include "blicer/rerank.hpp"

#include "blicer/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <sstream>

namespace blicer {

void RerankConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError(fmt::format("rerank.lambda={} outside [0, 1]", lambda));
  if (n_cand == 0) throw ConfigError("rerank.n_cand must be >= 1");
}

std::vector<ScoredWord> retrieve_candidates(const std::string& query, const CslsIndex& index, std::size_t n_cand) {
  return csls_topk(std::span<const std::string>(&query, 1), index, n_cand).front();
}

double mix_scores(double f_c, double f_tilde, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError(fmt::format("lambda={} outside [0, 1]", lambda));
  return (1.0 - lambda) * f_c + lambda * f_tilde;
}

ScoredCandidates score_candidates(std::span<const std::string> queries, const CslsIndex& index,
                                  crossenc::PairScorer* scorer, std::size_t n_cand) {
  ScoredCandidates out;
  out.queries.assign(queries.begin(), queries.end());
  out.retrieved = csls_topk(queries, index, n_cand);

  std::vector<std::vector<double>> raw;
  raw.reserve(out.retrieved.size());
  for (const auto& list : out.retrieved) {
    std::vector<double> r;
    for (const auto& c : list) r.push_back(c.score);
    raw.push_back(std::move(r));
  }
  out.f_c = scale_grouped(raw, index.config().scaling);

  if (scorer != nullptr) {
    std::vector<WordPair> pairs;
    for (std::size_t q = 0; q < queries.size(); ++q) {
      for (const auto& c : out.retrieved[q]) pairs.push_back({queries[q], c.word});
    }
    const LanguagePair langs{index.src().vocab.language_tag(), index.tgt().vocab.language_tag()};
    const auto flat = crossenc::symmetric_scores(*scorer, pairs, langs);
    auto it = flat.begin();
    for (const auto& list : out.retrieved) {
      out.f_tilde.emplace_back(it, it + static_cast<std::ptrdiff_t>(list.size()));
      it += static_cast<std::ptrdiff_t>(list.size());
    }
  }
  return out;
}

std::vector<RankedPrediction> rank(const ScoredCandidates& scored, double lambda) {
  std::vector<RankedPrediction> out;
  out.reserve(scored.queries.size());
  const bool have_ce = !scored.f_tilde.empty();
  for (std::size_t q = 0; q < scored.queries.size(); ++q) {
    RankedPrediction pred{scored.queries[q], {}};
    for (std::size_t c = 0; c < scored.retrieved[q].size(); ++c) {
      RankedCandidate rc;
      rc.word = scored.retrieved[q][c].word;
      rc.csls_rank = c;
      rc.raw_csls = scored.retrieved[q][c].score;
      rc.f_c = scored.f_c[q][c];
      rc.f_tilde = have_ce ? scored.f_tilde[q][c] : rc.f_c;
      rc.f_mix = have_ce ? mix_scores(rc.f_c, rc.f_tilde, lambda) : rc.f_c;
      pred.candidates.push_back(std::move(rc));
    }
    std::stable_sort(pred.candidates.begin(), pred.candidates.end(),
                     [](const RankedCandidate& a, const RankedCandidate& b) {
                       if (a.f_mix != b.f_mix) return a.f_mix > b.f_mix;
                       return a.csls_rank < b.csls_rank;
                     });
    out.push_back(std::move(pred));
  }
  return out;
}

std::vector<RankedPrediction> translate(std::span<const std::string> queries, const CslsIndex& index,
                                        crossenc::PairScorer* scorer, const RerankConfig& cfg) {
  cfg.validate();
  crossenc::PairScorer* used = cfg.lambda == 0.0 ? nullptr : scorer;
  if (used == nullptr && cfg.lambda != 0.0) throw ConfigError("rerank.lambda > 0 needs a scorer");
  return rank(score_candidates(queries, index, used, cfg.n_cand), cfg.lambda);
}

std::string format_predictions(const std::vector<RankedPrediction>& predictions) {
  fmt::memory_buffer out;
  for (const auto& p : predictions) {
    for (std::size_t r = 0; r < p.candidates.size(); ++r) {
      const auto& c = p.candidates[r];
      fmt::format_to(std::back_inserter(out), "{}\t{}\t{}\t{:.8f}\t{:.8f}\t{:.8f}\n", p.query, r + 1, c.word, c.f_c,
                     c.f_tilde, c.f_mix);
    }
  }
  return fmt::to_string(out);
}

std::vector<RankedPrediction> parse_predictions(std::string_view text, std::string_view source_name) {
  std::vector<RankedPrediction> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto number = [&](const std::string& s, double& v) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParseError(fmt::format("{}:{}: bad number '{}'", source_name, line_no, s));
    }
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream fields(line);
    for (std::string s; std::getline(fields, s, '\t');) f.push_back(s);
    if (f.size() != 6) {
      throw ParseError(fmt::format("{}:{}: expected 6 tab-separated fields, found {}", source_name, line_no, f.size()));
    }
    if (out.empty() || out.back().query != f[0]) out.push_back({f[0], {}});
    RankedCandidate c;
    c.word = f[2];
    double rank = 0.0;
    number(f[1], rank);
    c.csls_rank = out.back().candidates.size();
    number(f[3], c.f_c);
    number(f[4], c.f_tilde);
    number(f[5], c.f_mix);
    out.back().candidates.push_back(std::move(c));
  }
  return out;
}

}  // namespace blicer
