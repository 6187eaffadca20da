#include "sfg/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sfg/errors.hpp"

namespace sfg {

std::string format_double(double x) {
  // std::to_chars emits the shortest string that round-trips, never more
  // than 17 significant digits.
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_csv_row(std::ostream& os, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) os << ',';
    os << format_double(values[i]);
  }
  os << '\n';
}

void write_csv_header(std::ostream& os, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) os << ',';
    os << names[i];
  }
  os << '\n';
}

std::vector<std::string> block_column_names(const std::string& prefix, int rows,
                                            int cols) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      names.push_back(prefix + "_" + std::to_string(i) + "_" +
                      std::to_string(j));
  return names;
}

void append_row_major(std::vector<double>& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, int rows, int cols,
                        const std::string& name) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw SpecError(name + ": expected " + std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const Json& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw SpecError(name + " row " + std::to_string(i) + ": expected " +
                      std::to_string(cols) + " entries");
    for (int c = 0; c < cols; ++c) {
      const Json& cell = row[c];
      if (!cell.is_number())
        throw SpecError(name + "(" + std::to_string(i) + "," +
                        std::to_string(c) + "): not a number");
      const double v = cell.get<double>();
      if (!std::isfinite(v))
        throw SpecError(name + "(" + std::to_string(i) + "," +
                        std::to_string(c) + "): non-finite entry");
      m(i, c) = v;
    }
  }
  return m;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw SolveError("cannot open for writing: " + path);
  os << content;
  if (!os) throw SolveError("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SolveError("cannot open: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace sfg
