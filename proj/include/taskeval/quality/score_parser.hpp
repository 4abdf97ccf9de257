#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace taskeval::quality {

enum class ScoreParseErrc { no_token, non_numeric, out_of_range };

class ScoreParseError : public std::runtime_error {
 public:
  ScoreParseError(ScoreParseErrc code, const std::string& detail) : std::runtime_error(detail), code_(code) {}
  [[nodiscard]] ScoreParseErrc code() const { return code_; }

 private:
  ScoreParseErrc code_;
};

/// Reads the number after the last "Score:" (any case). Whitespace and markdown
/// asterisks may sit between the colon and the number. The value must lie in [lo, hi].
double parse_score(std::string_view text, double lo, double hi);

}  // namespace taskeval::quality
