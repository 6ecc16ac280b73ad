// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace blicer {

struct WordPair {
  std::string src;
  std::string tgt;

  WordPair reversed() const { return {tgt, src}; }
  friend bool operator==(const WordPair&, const WordPair&) = default;
  friend auto operator<=>(const WordPair&, const WordPair&) = default;
};

struct WordPairHash {
  std::size_t operator()(const WordPair& p) const noexcept {
    const std::size_t a = std::hash<std::string>{}(p.src);
    const std::size_t b = std::hash<std::string>{}(p.tgt);
    return a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  }
};

/// (source language tag, target language tag).
struct LanguagePair {
  std::string src;
  std::string tgt;

  LanguagePair reversed() const { return {tgt, src}; }
  friend bool operator==(const LanguagePair&, const LanguagePair&) = default;
};

/// Duplicate-free, insertion-ordered set of directed word pairs.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(LanguagePair direction) : direction_(std::move(direction)) {}
  Lexicon(LanguagePair direction, const std::vector<WordPair>& pairs);

  const LanguagePair& direction() const noexcept { return direction_; }
  const std::vector<WordPair>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }

  /// Returns false (and leaves the lexicon unchanged) for a duplicate.
  bool insert(WordPair pair);
  bool contains(const WordPair& pair) const { return members_.contains(pair); }

  /// Distinct source words in first-appearance order.
  std::vector<std::string> source_words() const;
  /// Gold targets per source word.
  std::unordered_map<std::string, std::vector<std::string>> targets_by_source() const;

  auto begin() const noexcept { return pairs_.begin(); }
  auto end() const noexcept { return pairs_.end(); }

  friend bool operator==(const Lexicon& a, const Lexicon& b) {
    return a.direction_ == b.direction_ && a.pairs_ == b.pairs_;
  }

 private:
  LanguagePair direction_;
  std::vector<WordPair> pairs_;
  std::unordered_set<WordPair, WordPairHash> members_;
};

struct ParsedLexicon {
  Lexicon lexicon;
  std::size_t duplicates_dropped = 0;
};

/// One pair per non-empty line: `src<TAB>tgt` (any whitespace accepted).
ParsedLexicon parse_lexicon(const std::filesystem::path& path, std::string src_tag, std::string tgt_tag);
ParsedLexicon parse_lexicon_text(std::string_view text, std::string src_tag, std::string tgt_tag,
                                 std::string_view source_name = "<memory>");

void write_lexicon(const Lexicon& lexicon, const std::filesystem::path& path);
std::string format_lexicon(const Lexicon& lexicon);

/// Swaps every pair and the direction tags.
Lexicon reverse_lexicon(const Lexicon& lexicon);

}  // namespace blicer
