// SPDX-License-Identifier: Apache-2.0
#include "blicer/crossenc/tokenizer.hpp"

#include "blicer/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

namespace blicer::crossenc {

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(U'\uFFFD');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::size_t unpadded_length(std::span<const TokenId> ids) {
  std::size_t n = ids.size();
  while (n > 0 && ids[n - 1] == CharTokenizer::kPad) --n;
  return n;
}

CharTokenizer::CharTokenizer(std::span<const std::string> corpus, std::size_t max_len) {
  std::set<char32_t> seen;
  for (const auto& text : corpus) {
    for (char32_t c : decode_utf8(text)) seen.insert(c);
  }
  *this = CharTokenizer(std::vector<char32_t>(seen.begin(), seen.end()), max_len);
}

CharTokenizer::CharTokenizer(std::vector<char32_t> chars, std::size_t max_len)
    : chars_(std::move(chars)), max_len_(max_len) {
  if (max_len_ < kMinLength) {
    throw ConfigError(fmt::format("model.max_len={} is below the minimum of {}", max_len_, kMinLength));
  }
  for (std::size_t i = 0; i < chars_.size(); ++i) {
    if (!ids_.emplace(chars_[i], static_cast<TokenId>(i) + kFirstChar).second) {
      throw DataError(fmt::format("duplicate code point U+{:04X} in tokenizer vocabulary",
                                  static_cast<std::uint32_t>(chars_[i])));
    }
  }
}

TokenId CharTokenizer::id_of(char32_t c) const {
  auto it = ids_.find(c);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<TokenId> CharTokenizer::encode_pair(std::string_view a, std::string_view b) const {
  auto ca = decode_utf8(a);
  auto cb = decode_utf8(b);
  const std::size_t budget = max_len_ - 3;
  while (ca.size() + cb.size() > budget) {
    if (ca.size() >= cb.size()) ca.pop_back();
    else cb.pop_back();
  }
  std::vector<TokenId> ids;
  ids.reserve(max_len_);
  ids.push_back(kCls);
  for (char32_t c : ca) ids.push_back(id_of(c));
  ids.push_back(kSep);
  for (char32_t c : cb) ids.push_back(id_of(c));
  ids.push_back(kSep);
  ids.resize(max_len_, kPad);
  return ids;
}

}  // namespace blicer::crossenc
