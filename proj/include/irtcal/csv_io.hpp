#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "irtcal/model.hpp"

namespace irtcal {

// Response matrix CSV, UTF-8, comma separated, '\n' line ends ('\r\n' is
// accepted on input):
//
//   person,I1,I2,...      first row: corner cell, then item labels
//   P1,1,0,,...           person label, then 0, 1 or empty (missing)
//
// Fields may be double-quoted; a quote inside a quoted field is written "".
// The corner cell is ignored on input and written as "person". Output is
// byte-stable: labels are quoted only when they contain ',', '"' or a line
// break, and every line ends with '\n'.

/// Throws ParseError with 1-based line and column on malformed input.
ResponseMatrix read_matrix_csv(std::istream& in);
ResponseMatrix read_matrix_csv(const std::filesystem::path& path);

void write_matrix_csv(std::ostream& out, const ResponseMatrix& matrix);

/// Quotes a CSV field when needed.
std::string csv_field(const std::string& text);

}  // namespace irtcal
