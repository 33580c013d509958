#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace votebias {

/// Canonical country name. Only produced by AliasMap::canonicalize or by code
/// that already holds canonical names (tests, synthetic corpora).
class CountryId {
 public:
  CountryId() = default;
  explicit CountryId(std::string name) : name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }
  bool empty() const noexcept { return name_.empty(); }

  auto operator<=>(const CountryId&) const = default;
  bool operator==(const CountryId&) const = default;

 private:
  std::string name_;
};

enum class Stage { Final, Semi1, Semi2 };
enum class Source { Jury, Televote, Combined };

using StageSet = std::set<Stage>;

inline StageSet default_stages() { return {Stage::Final}; }

std::string_view to_string(Stage stage);
std::string_view to_string(Source source);
Stage parse_stage(std::string_view text);
Source parse_source(std::string_view text);

/// Inclusive span of contest years.
struct YearWindow {
  int start_year = 0;
  int end_year = 0;

  YearWindow() = default;
  YearWindow(int start, int end) : start_year(start), end_year(end) {
    if (start > end) {
      throw std::invalid_argument("YearWindow: start year after end year");
    }
  }

  int length() const noexcept { return end_year - start_year + 1; }
  bool contains(int year) const noexcept { return year >= start_year && year <= end_year; }

  auto operator<=>(const YearWindow&) const = default;
  bool operator==(const YearWindow&) const = default;
};

/// Thrown for malformed or inconsistent input files. `line` is 1-based, 0 when
/// the error is not tied to a specific line.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& file, std::size_t line, const std::string& what);

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

}  // namespace votebias

template <>
struct std::hash<votebias::CountryId> {
  std::size_t operator()(const votebias::CountryId& id) const noexcept {
    return std::hash<std::string>{}(id.name());
  }
};
