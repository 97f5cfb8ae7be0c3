#pragma once

#include "stabgi/dense.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace stabgi {

/// Malformed matrix text; carries the 1-based position of the offending field.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : InputError(what + " (line " + std::to_string(line) + ", column " +
                   std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// One row per line, comma-separated decimal or scientific entries. No
/// header, no trailing commas, no empty lines (a single final newline is
/// allowed). Column numbers count comma-separated fields.
Matrix parse_matrix_csv(std::string_view text);

Matrix read_matrix_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal for every entry.
std::string format_matrix_csv(const Matrix& M);

}  // namespace stabgi
