#include "taskeval/quality/score_parser.hpp"

#include <cctype>
#include <charconv>

namespace taskeval::quality {

namespace {

constexpr std::string_view kToken = "score:";

std::size_t rfind_case_insensitive(std::string_view text, std::string_view needle) {
  if (text.size() < needle.size()) return std::string_view::npos;
  for (std::size_t i = text.size() - needle.size() + 1; i-- > 0;) {
    bool match = true;
    for (std::size_t k = 0; k < needle.size() && match; ++k) {
      match = std::tolower(static_cast<unsigned char>(text[i + k])) == needle[k];
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

}  // namespace

double parse_score(std::string_view text, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("parse_score: lo must be below hi");
  const std::size_t at = rfind_case_insensitive(text, kToken);
  if (at == std::string_view::npos) throw ScoreParseError(ScoreParseErrc::no_token, "no 'Score:' token in reply");

  std::size_t pos = at + kToken.size();
  while (pos < text.size() && (std::isspace(static_cast<unsigned char>(text[pos])) || text[pos] == '*')) ++pos;

  // [+-]? digits ( '.' digits )?
  std::size_t end = pos;
  if (end < text.size() && (text[end] == '+' || text[end] == '-')) ++end;
  const std::size_t digits_start = end;
  while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
  if (end == digits_start) {
    throw ScoreParseError(ScoreParseErrc::non_numeric, "non-numeric text after 'Score:': '" +
                                                           std::string(text.substr(pos, 16)) + "'");
  }
  if (end + 1 < text.size() && text[end] == '.' && std::isdigit(static_cast<unsigned char>(text[end + 1]))) {
    ++end;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
  }

  std::string_view number = text.substr(pos, end - pos);
  if (!number.empty() && number.front() == '+') number.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
  if (ec != std::errc{} || ptr != number.data() + number.size()) {
    throw ScoreParseError(ScoreParseErrc::non_numeric, "unparseable score '" + std::string(number) + "'");
  }
  if (value < lo || value > hi) {
    throw ScoreParseError(ScoreParseErrc::out_of_range, "score " + std::string(number) + " outside [" +
                                                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return value;
}

}  // namespace taskeval::quality
