#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ebbm/moments.hpp"

namespace ebbm {

/// Malformed dataset text. `line` is 1-based.
class ParseError : public std::invalid_argument {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::invalid_argument("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Text format: a header line "n N", then N lines of n tokens from {-1, +1}.
// Blank lines are not allowed between rows.

Dataset parse_dataset(std::string_view text);
std::string format_dataset(const Dataset& data);

Dataset read_dataset(const std::string& path);
void write_dataset(const Dataset& data, const std::string& path);

/// FNV-1a 64-bit digest rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace ebbm
