#pragma once

// Sample batches as CSV: header "x1,...,xd", one observation per line, 17 significant digits.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mevgen/errors.hpp"
#include "mevgen/matrix.hpp"
#include "mevgen/sampling.hpp"

namespace mevgen::io {

inline void write_csv(std::ostream& out, const SampleBatch& batch) {
  for (std::size_t i = 0; i < batch.d; ++i) {
    if (i) out << ',';
    out << 'x' << (i + 1);
  }
  out << '\n';
  char buf[64];
  std::string line;
  for (std::size_t t = 0; t < batch.n; ++t) {
    line.clear();
    for (std::size_t i = 0; i < batch.d; ++i) {
      if (i) line += ',';
      const auto res = std::to_chars(buf, buf + sizeof buf, batch.data(t, i),
                                     std::chars_format::general, 17);
      line.append(buf, res.ptr);
    }
    line += '\n';
    out << line;
  }
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

// Reads a batch written by write_csv. Seed and fingerprint are left empty; they come from the
// metadata sidecar when one exists.
inline SampleBatch read_csv(std::istream& in, const std::string& source = "csv") {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source + ": missing header row");
  const auto header = detail::split_commas(detail::trim(line));
  const std::size_t d = header.size();
  for (std::size_t i = 0; i < d; ++i) {
    if (detail::trim(header[i]) != "x" + std::to_string(i + 1)) {
      throw ParseError(source + ": header column " + std::to_string(i + 1) + " must be x" +
                       std::to_string(i + 1));
    }
  }
  std::vector<double> values;
  std::size_t row = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    ++row;
    const auto cells = detail::split_commas(body);
    const auto where = source + ": row " + std::to_string(row) + " (line " + std::to_string(line_no) + ")";
    if (cells.size() != d) {
      throw ParseError(where + " has " + std::to_string(cells.size()) + " fields, expected " +
                       std::to_string(d));
    }
    for (std::size_t i = 0; i < d; ++i) {
      const auto cell = detail::trim(cells[i]);
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError(where + " field " + std::to_string(i + 1) + " is not a finite number: \"" +
                         std::string(cell) + "\"");
      }
      values.push_back(v);
    }
  }
  SampleBatch batch;
  batch.n = row;
  batch.d = d;
  batch.data = Matrix(row, d);
  for (std::size_t t = 0; t < row; ++t) {
    for (std::size_t i = 0; i < d; ++i) batch.data(t, i) = values[t * d + i];
  }
  return batch;
}

}  // namespace mevgen::io
