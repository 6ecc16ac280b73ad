// SPDX-License-Identifier: Apache-2.0
#include "blicer/lexicon.hpp"

#include "blicer/error.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace blicer {

Lexicon::Lexicon(LanguagePair direction, const std::vector<WordPair>& pairs)
    : direction_(std::move(direction)) {
  for (const auto& p : pairs) insert(p);
}

bool Lexicon::insert(WordPair pair) {
  if (pair.src.empty() || pair.tgt.empty()) throw DataError("word pair with an empty word");
  if (!members_.insert(pair).second) return false;
  pairs_.push_back(std::move(pair));
  return true;
}

std::vector<std::string> Lexicon::source_words() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& p : pairs_) {
    if (seen.insert(p.src).second) out.push_back(p.src);
  }
  return out;
}

std::unordered_map<std::string, std::vector<std::string>> Lexicon::targets_by_source() const {
  std::unordered_map<std::string, std::vector<std::string>> out;
  for (const auto& p : pairs_) out[p.src].push_back(p.tgt);
  return out;
}

namespace {

ParsedLexicon parse_stream(std::istream& in, std::string src_tag, std::string tgt_tag,
                           std::string_view source) {
  ParsedLexicon result{Lexicon({std::move(src_tag), std::move(tgt_tag)}), 0};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> parts;
    for (std::string f; fields >> f;) parts.push_back(std::move(f));
    if (parts.empty()) continue;
    if (parts.size() != 2) {
      throw ParseError(fmt::format("{}:{}: expected 2 fields (src tgt), found {}", source, line_no,
                                   parts.size()));
    }
    if (!result.lexicon.insert({std::move(parts[0]), std::move(parts[1])})) ++result.duplicates_dropped;
  }
  return result;
}

}  // namespace

ParsedLexicon parse_lexicon(const std::filesystem::path& path, std::string src_tag, std::string tgt_tag) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open dictionary '{}'", path.string()));
  return parse_stream(in, std::move(src_tag), std::move(tgt_tag), path.string());
}

ParsedLexicon parse_lexicon_text(std::string_view text, std::string src_tag, std::string tgt_tag,
                                 std::string_view source_name) {
  std::istringstream in{std::string(text)};
  return parse_stream(in, std::move(src_tag), std::move(tgt_tag), source_name);
}

std::string format_lexicon(const Lexicon& lexicon) {
  std::string out;
  for (const auto& p : lexicon) {
    out += p.src;
    out += '\t';
    out += p.tgt;
    out += '\n';
  }
  return out;
}

void write_lexicon(const Lexicon& lexicon, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write dictionary '{}'", path.string()));
  out << format_lexicon(lexicon);
}

Lexicon reverse_lexicon(const Lexicon& lexicon) {
  Lexicon out(lexicon.direction().reversed());
  for (const auto& p : lexicon) out.insert(p.reversed());
  return out;
}

}  // namespace blicer
