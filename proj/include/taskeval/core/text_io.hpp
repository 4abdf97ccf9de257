#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "taskeval/core/matrix.hpp"

namespace taskeval {

/// Shortest decimal text that parses back to the identical double.
std::string format_real(double value);
/// Strict decimal parse of the whole field; throws std::invalid_argument otherwise.
double parse_real(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
void write_binary_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomically(const std::filesystem::path& path, std::string_view contents);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 subset: comma separated, optional double-quoted fields, LF or CRLF line ends.
CsvTable parse_csv(std::string_view text);
std::string csv_escape(std::string_view field);

/// Numeric CSV with a header of `prefix0, prefix1, ...`.
std::string format_numeric_csv(const RealMatrix& matrix, std::string_view prefix);
RealMatrix parse_numeric_csv(std::string_view text);

}  // namespace taskeval
