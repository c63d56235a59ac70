#pragma once

#include <string>
#include <vector>

/// Minimal RFC 4180-style helpers for the flat CSV files the tools exchange.
namespace ccstat::csv {

/// Splits one line; double-quoted cells may contain commas and "" escapes.
std::vector<std::string> split(const std::string& line);

/// Joins cells, quoting those that contain commas, quotes or newlines.
std::string join(const std::vector<std::string>& cells);

std::string strip_cr(std::string line);

/// 12 significant digits; NaN is written as an empty cell.
std::string format_real(double value);

/// Inverse of format_real: empty cells read back as NaN.
double parse_real(const std::string& cell);

}  // namespace ccstat::csv
