// SPDX-License-Identifier: Apache-2.0
#include "blicer/crossenc/scorer.hpp"
#include "blicer/error.hpp"

#include <doctest.h>

using namespace blicer;
using namespace blicer::crossenc;

namespace {

const std::vector<WordPair> kPairs{{"dog", "hund"}, {"cat", "katze"}, {"horse", "pferd"}};

ScorerProtocolError::Kind failure_kind(const std::string& cmd) {
  try {
    external_score(cmd, kPairs);
  } catch (const ScorerProtocolError& e) {
    return e.kind();
  }
  FAIL("expected a protocol error");
  return ScorerProtocolError::Kind::ProcessFailed;
}

}  // namespace

TEST_SUITE("scorer") {

TEST_CASE("constant stub") {
  const auto s = external_score("while read -r line; do echo 0.5; done", kPairs);
  CHECK(s == std::vector<double>{0.5, 0.5, 0.5});
}

TEST_CASE("scores follow input order") {
  const auto s = external_score("awk -F'\\t' '{ printf \"%.2f\\n\", length($1) / 10; fflush() }'", kPairs);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == 0.3);
  CHECK(s[1] == 0.3);
  CHECK(s[2] == 0.5);
}

TEST_CASE("protocol violations") {
  using Kind = ScorerProtocolError::Kind;
  CHECK(failure_kind("while read -r line; do echo 1.7; done") == Kind::OutOfRange);
  CHECK(failure_kind("read -r line; echo 0.5") == Kind::CountMismatch);
  CHECK(failure_kind("while read -r line; do echo high; done") == Kind::MalformedScore);
  CHECK(failure_kind("cat > /dev/null; exit 3") == Kind::ProcessFailed);
  try {
    external_score("while read -r line; do echo 1.7; done", kPairs);
  } catch (const ScorerProtocolError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("empty input yields no scores") {
  CHECK(external_score("cat", {}).empty());
}

TEST_CASE("external symmetric scores are exactly symmetric") {
  ExternalScorer scorer("awk -F'\\t' '{ printf \"%.3f\\n\", length($1) / 20; fflush() }'");
  const std::vector<WordPair> forward{{"ab", "wxyz"}};
  const std::vector<WordPair> backward{{"wxyz", "ab"}};
  const auto a = symmetric_scores(scorer, forward, {"en", "de"});
  const auto b = symmetric_scores(scorer, backward, {"de", "en"});
  CHECK(a[0] == b[0]);
  CHECK(a[0] == doctest::Approx(0.15).epsilon(1e-12));
}

}
