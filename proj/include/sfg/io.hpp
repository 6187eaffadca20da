#pragma once

#include <ostream>
#include <string>
#include <vector>

// Single-header nlohmann::json from vendor/.
#include <json.hpp>

#include "sfg/matrix.hpp"

namespace sfg {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal representation of a double (at most 17
/// significant digits).  Every CSV and JSON number the library emits goes
/// through this, so identical runs produce byte-identical files.
std::string format_double(double x);

/// One CSV row: values joined by commas, terminated with '\n'.
void write_csv_row(std::ostream& os, const std::vector<double>& values);

/// Header row from column names.
void write_csv_header(std::ostream& os, const std::vector<std::string>& names);

/// Column names "prefix_i_j" for an r-by-c block in row-major order.
std::vector<std::string> block_column_names(const std::string& prefix, int rows,
                                            int cols);

/// Append the entries of m in row-major order.
void append_row_major(std::vector<double>& out, const Matrix& m);

/// Matrix as a JSON array of rows.
Json matrix_to_json(const Matrix& m);

/// Parse an array-of-rows into an r-by-c matrix.  Throws SpecError on ragged
/// rows, wrong shape, or non-finite entries.  `name` labels error messages.
Matrix matrix_from_json(const Json& j, int rows, int cols,
                        const std::string& name);

/// Write text to a file, replacing any existing content.  Throws SolveError
/// when the file cannot be opened.
void write_file(const std::string& path, const std::string& content);

/// Read a whole file.  Throws SolveError when the file cannot be opened.
std::string read_file(const std::string& path);

}  // namespace sfg
