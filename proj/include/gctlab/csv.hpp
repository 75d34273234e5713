#ifndef GCTLAB_CSV_HPP
#define GCTLAB_CSV_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace gctlab {

using CsvRow = std::vector<std::string>;

/// RFC-4180-style emission: header row, stable column order, CRLF-free
/// (newline-terminated) records, quoting only where required.
inline std::string emit_report(const std::vector<CsvRow>& rows, const CsvRow& schema) {
  auto field = [](const std::string& s) {
    bool quote = s.find_first_of(",\"\n") != std::string::npos;
    if (!quote) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += "\"\"";
      else out += c;
    }
    out += "\"";
    return out;
  };
  std::string text;
  for (size_t j = 0; j < schema.size(); ++j) {
    if (j) text += ",";
    text += field(schema[j]);
  }
  text += "\n";
  for (const CsvRow& row : rows) {
    if (row.size() != schema.size())
      throw std::invalid_argument("emit_report: row width does not match schema");
    for (size_t j = 0; j < row.size(); ++j) {
      if (j) text += ",";
      text += field(row[j]);
    }
    text += "\n";
  }
  return text;
}

/// Parses CSV text produced by emit_report; returns rows including the
/// header as the first row.
inline std::vector<CsvRow> parse_csv(const std::string& text) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string cell;
  bool in_quotes = false;
  bool row_has_data = false;
  for (size_t j = 0; j < text.size(); ++j) {
    char c = text[j];
    if (in_quotes) {
      if (c == '"') {
        if (j + 1 < text.size() && text[j + 1] == '"') {
          cell += '"';
          ++j;
        } else {
          in_quotes = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      in_quotes = true;
      row_has_data = true;
    } else if (c == ',') {
      row.push_back(cell);
      cell.clear();
      row_has_data = true;
    } else if (c == '\n') {
      if (row_has_data || !cell.empty()) {
        row.push_back(cell);
        rows.push_back(row);
      }
      row.clear();
      cell.clear();
      row_has_data = false;
    } else if (c != '\r') {
      cell += c;
      row_has_data = true;
    }
  }
  if (row_has_data || !cell.empty()) {
    row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gctlab

#endif  // GCTLAB_CSV_HPP
