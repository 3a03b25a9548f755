// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ncstat/error.hpp"

namespace ncstat::csv {

/// RFC-4180 quoting: fields containing a comma, quote, CR or LF are wrapped in
/// double quotes with embedded quotes doubled.
inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (const char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << quote(fields[i]);
  }
  os << '\n';
}

/// One parsed record and the line on which it started.
struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Streaming RFC-4180 reader. Accepts LF or CRLF line endings and quoted
/// fields spanning lines.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Blank lines are skipped.
  std::optional<Row> next() {
    Row row;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    bool field_was_quoted = false;
    row.line = line_;
    int ch;
    while ((ch = in_.get()) != std::char_traits<char>::eof()) {
      const char c = static_cast<char>(ch);
      if (in_quotes) {
        if (c == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
        }
        continue;
      }
      if (c == '"') {
        if (!field.empty() || field_was_quoted) {
          throw ParseError(row.line, "#" + std::to_string(row.fields.size() + 1),
                           "unexpected quote inside unquoted field");
        }
        in_quotes = true;
        field_was_quoted = true;
        any = true;
      } else if (c == ',') {
        row.fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
        any = true;
      } else if (c == '\r' && in_.peek() == '\n') {
        continue;
      } else if (c == '\n') {
        ++line_;
        if (!any && field.empty()) {
          row.line = line_;
          continue;
        }
        row.fields.push_back(std::move(field));
        return row;
      } else {
        if (field_was_quoted) {
          throw ParseError(row.line, "#" + std::to_string(row.fields.size() + 1),
                           "characters after closing quote");
        }
        field.push_back(c);
        any = true;
      }
    }
    if (in_quotes) {
      throw ParseError(row.line, "#" + std::to_string(row.fields.size() + 1),
                       "unterminated quoted field");
    }
    if (!any && field.empty()) return std::nullopt;
    row.fields.push_back(std::move(field));
    ++line_;
    return row;
  }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

}  // namespace ncstat::csv
