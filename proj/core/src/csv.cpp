// SPDX-License-Identifier: Apache-2.0
#include "dmgsl/csv.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dmgsl/errors.hpp"

namespace dmgsl::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string_view cell =
        line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    cells.emplace_back(trim(cell));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::vector<Line> read_lines(std::istream& in) {
  std::vector<Line> lines;
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (trim(raw).empty()) continue;
    lines.push_back({number, split_line(raw)});
  }
  return lines;
}

std::vector<Line> read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_lines(in);
}

double parse_double(std::string_view cell, std::string_view where) {
  double value = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError(std::string(where) + ": '" + std::string(cell) + "' is not a number");
  }
  return value;
}

long long parse_int(std::string_view cell, std::string_view where) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw ParseError(std::string(where) + ": '" + std::string(cell) + "' is not an integer");
  }
  return value;
}

void write_matrix(std::ostream& out, const Tensor& m, int decimals) {
  out << std::fixed << std::setprecision(decimals);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ',';
      out << m(r, c);
    }
    out << '\n';
  }
}

void write_matrix(const std::filesystem::path& path, const Tensor& m, int decimals) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_matrix(out, m, decimals);
}

Tensor read_matrix(const std::filesystem::path& path) {
  const auto lines = read_file(path);
  if (lines.empty()) return {};
  const std::size_t cols = lines.front().cells.size();
  std::vector<double> values;
  values.reserve(lines.size() * cols);
  for (const auto& line : lines) {
    const std::string where = path.filename().string() + ":" + std::to_string(line.number);
    if (line.cells.size() != cols) {
      throw ParseError(where + ": expected " + std::to_string(cols) + " values, found " +
                       std::to_string(line.cells.size()));
    }
    for (const auto& cell : line.cells) values.push_back(parse_double(cell, where));
  }
  return Tensor(lines.size(), cols, std::move(values));
}

}  // namespace dmgsl::csv
