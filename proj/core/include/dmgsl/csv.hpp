// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dmgsl/tensor.hpp"

namespace dmgsl::csv {

/// Splits one comma-separated line. Cells are trimmed of surrounding
/// whitespace and of a single pair of double quotes. No escaping support.
std::vector<std::string> split_line(std::string_view line);

/// Reads non-empty lines (a trailing '\r' is dropped). Blank lines are
/// skipped but still counted so callers can report 1-based line numbers.
struct Line {
  std::size_t number;
  std::vector<std::string> cells;
};
std::vector<Line> read_lines(std::istream& in);
std::vector<Line> read_file(const std::filesystem::path& path);

/// Parses a double; throws ParseError mentioning `where` on failure.
double parse_double(std::string_view cell, std::string_view where);
long long parse_int(std::string_view cell, std::string_view where);

/// Dense matrix as rows of comma-separated values with fixed decimals.
void write_matrix(std::ostream& out, const Tensor& m, int decimals = 6);
void write_matrix(const std::filesystem::path& path, const Tensor& m, int decimals = 6);
/// Reads a headerless dense matrix; all rows must have the same width.
Tensor read_matrix(const std::filesystem::path& path);

}  // namespace dmgsl::csv
