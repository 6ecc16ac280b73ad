// SPDX-License-Identifier: Apache-2.0
#include "blicer/embedding.hpp"

#include "blicer/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace blicer {

Vocabulary::Vocabulary(std::string language_tag, std::vector<std::string> words)
    : language_tag_(std::move(language_tag)), words_(std::move(words)) {
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i].empty()) throw DataError(fmt::format("empty word at rank {}", i));
    if (!index_.emplace(words_[i], i).second) {
      throw DataError(fmt::format("duplicate word '{}' in vocabulary", words_[i]));
    }
  }
}

std::optional<std::size_t> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::rank_of(std::string_view word, std::string_view side) const {
  if (auto r = find(word)) return *r;
  throw DataError(fmt::format("word '{}' not found in {} vocabulary{}", word, side,
                              language_tag_.empty() ? "" : " (" + language_tag_ + ")"));
}

namespace {

std::string_view rstrip(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::size_t parse_positive(std::string_view field, std::string_view source, const char* what) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || value == 0) {
    throw ParseError(fmt::format("{}:1: bad header: {} '{}' is not a positive integer", source,
                                 what, field));
  }
  return value;
}

EmbeddingSpace parse_stream(std::istream& in, std::size_t max_vocab, std::string language_tag,
                            std::string_view source) {
  if (max_vocab == 0) throw DataError("max_vocab must be positive");

  std::string line;
  if (!std::getline(in, line)) throw ParseError(fmt::format("{}: empty file, missing header", source));
  std::string_view header = rstrip(line);
  auto space = header.find(' ');
  if (space == std::string_view::npos || header.find(' ', space + 1) != std::string_view::npos) {
    throw ParseError(fmt::format("{}:1: bad header '{}', expected 'count dim'", source, header));
  }
  const std::size_t count = parse_positive(header.substr(0, space), source, "count");
  const std::size_t dim = parse_positive(header.substr(space + 1), source, "dim");

  const std::size_t keep = std::min(count, max_vocab);
  std::vector<std::string> words;
  words.reserve(keep);
  Matrix matrix(static_cast<Eigen::Index>(keep), static_cast<Eigen::Index>(dim));
  std::unordered_map<std::string, std::size_t> seen;
  seen.reserve(keep);

  std::size_t line_no = 1;
  while (words.size() < keep) {
    if (!std::getline(in, line)) {
      throw ParseError(fmt::format("{}: header announces {} vectors but file ends after {}", source,
                                   count, words.size()));
    }
    ++line_no;
    std::string_view rest = rstrip(line);
    auto cut = rest.find(' ');
    if (cut == 0 || rest.empty()) throw ParseError(fmt::format("{}:{}: missing token", source, line_no));
    std::string token(rest.substr(0, cut));
    rest = cut == std::string_view::npos ? std::string_view{} : rest.substr(cut + 1);

    const auto row = static_cast<Eigen::Index>(words.size());
    std::size_t fields = 0;
    while (!rest.empty()) {
      auto next = rest.find(' ');
      std::string_view field = rest.substr(0, next);
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError(
            fmt::format("{}:{}: '{}' is not a decimal float (token '{}')", source, line_no, field, token));
      }
      if (!std::isfinite(value)) {
        throw ParseError(fmt::format("{}:{}: non-finite value for token '{}'", source, line_no, token));
      }
      if (fields < dim) matrix(row, static_cast<Eigen::Index>(fields)) = value;
      ++fields;
      rest = next == std::string_view::npos ? std::string_view{} : rest.substr(next + 1);
    }
    if (fields != dim) {
      throw ParseError(fmt::format("{}:{}: token '{}' has {} values, expected {}", source, line_no,
                                   token, fields, dim));
    }
    if (!seen.emplace(token, line_no).second) {
      throw ParseError(fmt::format("{}:{}: duplicate token '{}'", source, line_no, token));
    }
    words.push_back(std::move(token));
  }

  EmbeddingSpace result;
  result.vocab = Vocabulary(std::move(language_tag), std::move(words));
  result.matrix = std::move(matrix);
  result.unit_normalized = false;
  return result;
}

}  // namespace

EmbeddingSpace load_word_vectors(const std::filesystem::path& path, std::size_t max_vocab,
                                 std::string language_tag) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open word-vector file '{}'", path.string()));
  return parse_stream(in, max_vocab, std::move(language_tag), path.string());
}

EmbeddingSpace parse_word_vectors(std::string_view text, std::size_t max_vocab,
                                  std::string language_tag, std::string_view source_name) {
  std::istringstream in{std::string(text)};
  return parse_stream(in, max_vocab, std::move(language_tag), source_name);
}

std::string format_word_vectors(const EmbeddingSpace& space) {
  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out), "{} {}\n", space.size(), space.dim());
  for (std::size_t i = 0; i < space.size(); ++i) {
    fmt::format_to(std::back_inserter(out), "{}", space.vocab.word(i));
    for (Eigen::Index j = 0; j < space.matrix.cols(); ++j) {
      // Shortest representation that round-trips exactly.
      fmt::format_to(std::back_inserter(out), " {}", space.matrix(static_cast<Eigen::Index>(i), j));
    }
    out.push_back('\n');
  }
  return fmt::to_string(out);
}

void save_word_vectors(const EmbeddingSpace& space, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write word-vector file '{}'", path.string()));
  out << format_word_vectors(space);
  if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

EmbeddingSpace unit_normalize(EmbeddingSpace space) {
  if (space.unit_normalized) return space;
  for (Eigen::Index i = 0; i < space.matrix.rows(); ++i) {
    const double norm = space.matrix.row(i).norm();
    if (!(norm > 0.0)) {
      throw DataError(fmt::format("zero norm vector for word '{}'",
                                  space.vocab.word(static_cast<std::size_t>(i))));
    }
    space.matrix.row(i) /= norm;
  }
  space.unit_normalized = true;
  return space;
}

}  // namespace blicer
