// SPDX-License-Identifier: Apache-2.0
//
// Monolingual word-vector spaces: text-format loading, trimming to the most
// frequent words, saving, and unit normalization.
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace blicer {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Ordered list of unique words. Rank 0 is the most frequent word.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Throws DataError on duplicates or empty words.
  Vocabulary(std::string language_tag, std::vector<std::string> words);

  const std::string& language_tag() const noexcept { return language_tag_; }
  std::size_t size() const noexcept { return words_.size(); }
  const std::string& word(std::size_t rank) const { return words_.at(rank); }
  const std::vector<std::string>& words() const noexcept { return words_; }

  std::optional<std::size_t> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }
  /// Like find(), but throws DataError naming the word and `side`.
  std::size_t rank_of(std::string_view word, std::string_view side) const;

  void set_language_tag(std::string tag) { language_tag_ = std::move(tag); }

 private:
  std::string language_tag_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// A vocabulary plus one d-dimensional row vector per word.
struct EmbeddingSpace {
  Vocabulary vocab;
  Matrix matrix;
  bool unit_normalized = false;

  std::size_t size() const noexcept { return vocab.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix.cols()); }
};

/// Reads the fastText text format ("count dim" header, then one
/// "token f1 .. fd" line per word) and keeps the first `max_vocab` entries.
EmbeddingSpace load_word_vectors(const std::filesystem::path& path, std::size_t max_vocab,
                                 std::string language_tag = {});

/// Parses the same format from an in-memory string. `source_name` only
/// appears in error messages.
EmbeddingSpace parse_word_vectors(std::string_view text, std::size_t max_vocab,
                                  std::string language_tag = {},
                                  std::string_view source_name = "<memory>");

void save_word_vectors(const EmbeddingSpace& space, const std::filesystem::path& path);
std::string format_word_vectors(const EmbeddingSpace& space);

/// Divides every row by its Euclidean norm. Throws DataError naming the word
/// of the first zero-norm row. Already-normalized spaces are returned as is.
EmbeddingSpace unit_normalize(EmbeddingSpace space);

}  // namespace blicer
