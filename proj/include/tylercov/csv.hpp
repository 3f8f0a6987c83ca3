#pragma once

#include <string>

#include <Eigen/Core>

#include "tylercov/errors.hpp"

namespace tylercov::csv {

// Formats a double with 17 significant digits, '.' decimal separator,
// locale-independent. Round-trips exactly.
std::string format(double value);

// Shortest representation that round-trips; used for labels.
std::string format_short(double value);

// Dense CSV: one row per line, comma-separated values, no header, '\n' line
// endings.
void write_matrix(const std::string& path, const Eigen::MatrixXd& m);

// Parses a dense CSV of doubles. Throws ParseError naming row and column on
// malformed input, and on ragged rows.
Eigen::MatrixXd read_matrix(const std::string& path);

}  // namespace tylercov::csv
