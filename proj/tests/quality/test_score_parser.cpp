#include <doctest.h>

#include <cstdio>

#include "taskeval/core/rng.hpp"
#include "taskeval/quality/score_parser.hpp"

using namespace taskeval;
using namespace taskeval::quality;

namespace {

ScoreParseErrc parse_error(std::string_view text, double lo, double hi) {
  try {
    parse_score(text, lo, hi);
  } catch (const ScoreParseError& e) {
    return e.code();
  }
  FAIL("parsed without error: " << text);
  return ScoreParseErrc::no_token;
}

}  // namespace

TEST_CASE("parse_score examples") {
  CHECK(parse_score("The robot opened the laptop. Score: 8", 0, 10) == 8.0);
  CHECK(parse_score("score:7.5", 0, 10) == 7.5);
  CHECK(parse_score("SCORE:  **4**", 1, 5) == 4.0);
  CHECK(parse_score("Score: 2\nOn reflection, Score: 3", 1, 5) == 3.0);
  CHECK(parse_score("Score: 10.", 0, 10) == 10.0);
  CHECK(parse_score("Score:\t+1", 1, 5) == 1.0);
}

TEST_CASE("parse_score failures") {
  CHECK(parse_error("I cannot rate this.", 0, 10) == ScoreParseErrc::no_token);
  CHECK(parse_error("", 0, 10) == ScoreParseErrc::no_token);
  CHECK(parse_error("Score: X", 0, 10) == ScoreParseErrc::non_numeric);
  CHECK(parse_error("Score: ", 1, 5) == ScoreParseErrc::non_numeric);
  CHECK(parse_error("Score: 11", 0, 10) == ScoreParseErrc::out_of_range);
  CHECK(parse_error("Score: 0", 1, 5) == ScoreParseErrc::out_of_range);
  CHECK(parse_error("Score: -0.5", 0, 10) == ScoreParseErrc::out_of_range);
  CHECK(parse_error("Score: 5.0001", 1, 5) == ScoreParseErrc::out_of_range);
}

TEST_CASE("parse_score fuzz at four decimals") {
  DeterministicRng rng(41);
  for (const auto [lo, hi] : {std::pair{0.0, 10.0}, std::pair{1.0, 5.0}}) {
    const long steps = std::lround((hi - lo) * 10000.0);
    for (int i = 0; i < 5000; ++i) {
      const long k = static_cast<long>(rng.next_u64() % static_cast<std::uint64_t>(steps + 1));
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", lo + static_cast<double>(k) / 10000.0);
      const double expected = std::stod(buf);
      const std::string text = "Reasoning about the frames.\nScore: " + std::string(buf);
      REQUIRE(parse_score(text, lo, hi) == expected);
    }
  }
}
