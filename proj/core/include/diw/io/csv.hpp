// SPDX-License-Identifier: Apache-2.0
//
// RFC 4180 tables, shortest round-trip number formatting, and atomic file
// writes.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace diw::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index of `name`; throws InputError if absent.
  std::size_t column(std::string_view name) const;
};

/// Shortest decimal text that parses back to exactly `value`. Nonfinite
/// values print as nan, inf, -inf.
std::string format_double(double value);

/// Inverse of format_double. Throws InputError on anything else.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape_field(std::string_view field);

/// CRLF-terminated rows, header first.
std::string to_csv(const CsvTable& table);

/// Strict reader: every record must have the header's field count, quotes
/// only around whole fields, doubled quotes inside. Accepts CRLF or LF line
/// ends and an optional final line break. Throws FormatError with the byte
/// offset of the first violation.
CsvTable parse_csv(std::string_view text);

/// Throws PathError if the file cannot be read.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, creating
/// parent directories as needed.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace diw::io
