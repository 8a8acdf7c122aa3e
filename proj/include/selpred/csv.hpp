#pragma once

// Numeric CSV: UTF-8, one header row, '.' decimal separator, no locale.

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace selpred {

/// Input error carrying the 1-based (row, column) of the offending cell;
/// row 1 is the header.
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t row, std::size_t col)
      : std::runtime_error(what + " at row " + std::to_string(row) + ", column " + std::to_string(col)),
        row_(row),
        col_(col) {}
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline double parse_double(std::string_view text, std::size_t row, std::size_t col) {
  text = detail::trim(text);
  if (text.empty()) throw CsvError("missing value", row, col);
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw CsvError("non-numeric value '" + std::string(text) + "'", row, col);
  if (!std::isfinite(v)) throw CsvError("non-finite value '" + std::string(text) + "'", row, col);
  return v;
}

inline NumericTable parse_numeric_csv(std::istream& in) {
  NumericTable table;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (row == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_fields(line);
    if (table.header.empty()) {
      for (auto f : fields) table.header.emplace_back(detail::trim(f));
      continue;
    }
    if (fields.size() != table.header.size())
      throw CsvError("expected " + std::to_string(table.header.size()) + " fields, found " +
                         std::to_string(fields.size()),
                     row, std::min(fields.size(), table.header.size()) + 1);
    std::vector<double> values;
    values.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) values.push_back(parse_double(fields[c], row, c + 1));
    table.rows.push_back(std::move(values));
  }
  if (table.header.empty()) throw CsvError("empty input, header row expected", 1, 1);
  return table;
}

inline NumericTable read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return parse_numeric_csv(in);
}

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write '" + path + "'");
    write_row(header);
  }

  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace selpred
