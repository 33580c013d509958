#include "votebias/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "votebias/types.hpp"

namespace votebias::csv {

std::string trim(std::string_view text) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_space(text[begin])) {
    ++begin;
  }
  while (end > begin && is_space(text[end - 1])) {
    --end;
  }
  return std::string(text.substr(begin, end - begin));
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(trim(current));
  return fields;
}

std::vector<Row> read(const std::filesystem::path& path,
                      std::initializer_list<std::string_view> header) {
  const std::string file = path.string();
  std::ifstream in(path);
  if (!in) {
    throw InputError(file, 0, "cannot open file");
  }

  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line.erase(0, 3);
    }
    if (trim(line).empty()) {
      continue;
    }
    auto fields = split_line(line);
    if (!saw_header) {
      std::vector<std::string> expected(header.begin(), header.end());
      if (fields != expected) {
        std::ostringstream msg;
        msg << "unexpected header, want '";
        for (std::size_t i = 0; i < expected.size(); ++i) {
          msg << (i ? "," : "") << expected[i];
        }
        msg << "'";
        throw InputError(file, line_no, msg.str());
      }
      saw_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      throw InputError(file, line_no,
                       "expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()));
    }
    rows.push_back(Row{line_no, std::move(fields)});
  }
  if (!saw_header) {
    throw InputError(file, 0, "missing header");
  }
  return rows;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') {
      out.push_back('"');
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double value) {
  if (value == 0.0) {
    return "0";  // also folds -0
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) {
    return std::to_string(value);
  }
  return std::string(buf, ptr);
}

int parse_int(std::string_view text, const std::string& file, std::size_t line) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw InputError(file, line, "not an integer: '" + std::string(text) + "'");
  }
  return value;
}

double parse_double(std::string_view text, const std::string& file, std::size_t line) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty() || !std::isfinite(value)) {
    throw InputError(file, line, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace votebias::csv
