// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ncstat {

/// Raised when input data (block files, rule files, configs) cannot be used.
/// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A malformed row in a block file. Carries the 1-based line and the field.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, std::string field, const std::string& what)
      : DataError("line " + std::to_string(line) + ", field '" + field +
                  "': " + what),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace ncstat
