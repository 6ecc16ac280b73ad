// SPDX-License-Identifier: Apache-2.0
#include "blicer/error.hpp"
#include "blicer/lexicon.hpp"

#include <doctest.h>

#include <filesystem>

using namespace blicer;

TEST_SUITE("lexicon") {

TEST_CASE("parses tab-separated pairs") {
  const auto p = parse_lexicon_text("dog\thund\ncat\tkatze", "en", "de");
  CHECK(p.lexicon.size() == 2);
  CHECK(p.lexicon.pairs()[0] == WordPair{"dog", "hund"});
  CHECK(p.lexicon.pairs()[1] == WordPair{"cat", "katze"});
  CHECK(p.lexicon.direction() == LanguagePair{"en", "de"});
  CHECK(p.duplicates_dropped == 0);
}

TEST_CASE("duplicates are dropped and counted") {
  const auto p = parse_lexicon_text("dog\thund\ndog\thund\n", "en", "de");
  CHECK(p.lexicon.size() == 1);
  CHECK(p.duplicates_dropped == 1);
}

TEST_CASE("any whitespace separates the fields") {
  const auto p = parse_lexicon_text("dog  hund\r\n\ncat \t katze\n", "en", "de");
  CHECK(p.lexicon.size() == 2);
  CHECK(p.lexicon.pairs()[1] == WordPair{"cat", "katze"});
}

TEST_CASE("a single field is reported with its line") {
  try {
    parse_lexicon_text("cat\tkatze\ndog\n", "en", "de", "dict.txt");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("dict.txt:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_lexicon_text("a b c\n", "en", "de"), ParseError);
}

TEST_CASE("multiple gold targets per source") {
  const auto p = parse_lexicon_text("dog hund\ndog hunde\ncat katze\n", "en", "de");
  const auto by = p.lexicon.targets_by_source();
  CHECK(by.at("dog") == std::vector<std::string>{"hund", "hunde"});
  CHECK(p.lexicon.source_words() == std::vector<std::string>{"dog", "cat"});
}

TEST_CASE("reverse swaps pairs and direction") {
  const Lexicon lex({"en", "fr"}, {{"a", "p"}});
  const auto r = reverse_lexicon(lex);
  CHECK(r.pairs() == std::vector<WordPair>{{"p", "a"}});
  CHECK(r.direction() == LanguagePair{"fr", "en"});
}

TEST_CASE("reverse is an involution") {
  const Lexicon lex({"en", "de"}, {{"dog", "hund"}, {"cat", "katze"}, {"dog", "hunde"}});
  CHECK(reverse_lexicon(reverse_lexicon(lex)) == lex);
  const Lexicon empty({"en", "de"});
  CHECK(reverse_lexicon(empty).empty());
}

TEST_CASE("insert refuses duplicates and keeps order") {
  Lexicon lex({"en", "de"});
  CHECK(lex.insert({"b", "y"}));
  CHECK(lex.insert({"a", "x"}));
  CHECK_FALSE(lex.insert({"b", "y"}));
  CHECK(lex.pairs() == std::vector<WordPair>{{"b", "y"}, {"a", "x"}});
  CHECK(lex.contains({"a", "x"}));
  CHECK_FALSE(lex.contains({"x", "a"}));
}

TEST_CASE("write and parse round-trip") {
  const Lexicon lex({"en", "de"}, {{"dog", "hund"}, {"straße", "street"}});
  const auto path = std::filesystem::temp_directory_path() / "blicer_lexicon.tsv";
  write_lexicon(lex, path);
  const auto back = parse_lexicon(path, "en", "de");
  std::filesystem::remove(path);
  CHECK(back.lexicon == lex);
  CHECK(format_lexicon(lex) == "dog\thund\nstraße\tstreet\n");
}

}
