#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace votebias::csv {

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Splits one CSV line. Supports double-quoted fields with "" escapes; does
/// not support quoted newlines.
std::vector<std::string> split_line(std::string_view line);

/// Reads a whole CSV file whose first line must equal `header` (after
/// trimming). Blank lines are skipped. Every row must have exactly
/// header.size() fields; violations throw InputError with the line number.
std::vector<Row> read(const std::filesystem::path& path,
                      std::initializer_list<std::string_view> header);

std::string escape(std::string_view field);

/// Shortest round-trip representation; integral values print without a
/// fractional part.
std::string format_double(double value);

int parse_int(std::string_view text, const std::string& file, std::size_t line);
double parse_double(std::string_view text, const std::string& file, std::size_t line);

std::string trim(std::string_view text);

}  // namespace votebias::csv
