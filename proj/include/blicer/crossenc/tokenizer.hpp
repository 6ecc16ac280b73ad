// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace blicer::crossenc {

using TokenId = int;

/// Character-level tokenizer over Unicode code points.
///
/// A pair of texts becomes `CLS a1..an SEP b1..bm SEP PAD..` of exactly
/// max_len ids. When the texts do not fit, characters are dropped from the
/// right end of the longer text (the first text on a tie) until they do; the
/// structure tokens are never dropped.
class CharTokenizer {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kCls = 2;
  static constexpr TokenId kSep = 3;
  static constexpr TokenId kFirstChar = 4;
  static constexpr std::size_t kMinLength = 8;

  CharTokenizer() = default;
  /// Vocabulary = every code point occurring in `corpus`, in code point order.
  CharTokenizer(std::span<const std::string> corpus, std::size_t max_len);
  /// Rebuilds from an explicit code point list (e.g. a checkpoint).
  CharTokenizer(std::vector<char32_t> chars, std::size_t max_len);

  std::size_t max_len() const noexcept { return max_len_; }
  std::size_t vocab_size() const noexcept { return chars_.size() + kFirstChar; }
  const std::vector<char32_t>& chars() const noexcept { return chars_; }

  TokenId id_of(char32_t c) const;
  std::vector<TokenId> encode_pair(std::string_view a, std::string_view b) const;

 private:
  std::vector<char32_t> chars_;
  std::unordered_map<char32_t, TokenId> ids_;
  std::size_t max_len_ = 64;
};

/// UTF-8 decoding; invalid bytes become U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view s);

/// Number of leading ids before trailing padding.
std::size_t unpadded_length(std::span<const TokenId> ids);

}  // namespace blicer::crossenc
