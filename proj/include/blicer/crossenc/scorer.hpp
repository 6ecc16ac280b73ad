// SPDX-License-Identifier: Apache-2.0
//
// Pair scorers: the built-in cross-encoder, or an external process speaking
// a line protocol (`src<TAB>tgt` in, one decimal score in [0, 1] out).
#pragma once

#include "blicer/crossenc/model.hpp"
#include "blicer/crossenc/templates.hpp"
#include "blicer/crossenc/tokenizer.hpp"
#include "blicer/crossenc/trainer.hpp"
#include "blicer/lexicon.hpp"
#include "blicer/training_set.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace blicer::crossenc {

/// Template rendering plus tokenization of a word pair.
class PairEncoder {
 public:
  PairEncoder(Template tmpl, LanguageNameTable names, CharTokenizer tokenizer);

  /// Tokenizer vocabulary drawn from the rendered texts of `examples`.
  static PairEncoder for_training_set(const TrainingSet& examples, const Template& tmpl,
                                      const LanguageNameTable& names, std::size_t max_len);

  std::vector<TokenId> encode(const WordPair& pair, const LanguagePair& langs) const;
  std::vector<EncodedExample> encode(const TrainingSet& examples) const;

  const Template& templ() const noexcept { return template_; }
  const LanguageNameTable& names() const noexcept { return names_; }
  const CharTokenizer& tokenizer() const noexcept { return tokenizer_; }

 private:
  Template template_;
  LanguageNameTable names_;
  CharTokenizer tokenizer_;
};

class PairScorer {
 public:
  virtual ~PairScorer() = default;
  /// One score in [0, 1] per pair; `langs` are the languages of
  /// (pair.src, pair.tgt).
  virtual std::vector<double> score(std::span<const WordPair> pairs, const LanguagePair& langs) = 0;
};

/// (score(pi) + score(pi*)) / 2 per pair. Symmetric in pi and pi* bit for bit
/// whenever the scorer is deterministic per input.
std::vector<double> symmetric_scores(PairScorer& scorer, std::span<const WordPair> pairs, const LanguagePair& langs);

class ModelScorer final : public PairScorer {
 public:
  ModelScorer(PairEncoder encoder, CrossEncoder model);

  /// sigmoid(logit) of one pair; independent of any batching.
  double score_one(const WordPair& pair, const LanguagePair& langs) const;
  double symmetric_score(const WordPair& pair, const LanguagePair& langs) const;
  std::vector<double> score(std::span<const WordPair> pairs, const LanguagePair& langs) override;

  const PairEncoder& encoder() const noexcept { return encoder_; }
  const CrossEncoder& model() const noexcept { return model_; }
  CrossEncoder& model() noexcept { return model_; }

 private:
  PairEncoder encoder_;
  CrossEncoder model_;
};

/// Runs `/bin/sh -c command` once per score() call.
class ExternalScorer final : public PairScorer {
 public:
  explicit ExternalScorer(std::string command) : command_(std::move(command)) {}
  std::vector<double> score(std::span<const WordPair> pairs, const LanguagePair& langs) override;

 private:
  std::string command_;
};

/// Sends `pairs` through the line protocol and validates the reply. Throws
/// ScorerProtocolError.
std::vector<double> external_score(const std::string& command, std::span<const WordPair> pairs);

/// Binary checkpoint: a JSON header (model, tokenizer, template, language
/// names) followed by the raw parameters. Round-trips bit-exactly.
void save_checkpoint(const ModelScorer& scorer, const std::filesystem::path& path);
ModelScorer load_checkpoint(const std::filesystem::path& path);

}  // namespace blicer::crossenc
