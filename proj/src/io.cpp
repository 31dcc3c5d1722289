#include "magat/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "magat/error.hpp"

namespace magat {

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open file: " + path.string());
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t cols = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.c_str();
    while (true) {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) {
        throw DataError("malformed number in " + path.string() + " line " +
                        std::to_string(rows.size() + 1));
      }
      row.push_back(v);
      p = end;
      while (*p == ' ' || *p == '\t') ++p;
      if (*p == ',') {
        ++p;
      } else if (*p == '\0') {
        break;
      } else {
        throw DataError("unexpected character '" + std::string(1, *p) +
                        "' in " + path.string() + " line " +
                        std::to_string(rows.size() + 1));
      }
    }
    if (cols == 0) {
      cols = row.size();
    } else if (row.size() != cols) {
      throw DataError("ragged CSV in " + path.string() + ": line " +
                      std::to_string(rows.size() + 1) + " has " +
                      std::to_string(row.size()) + " columns, expected " +
                      std::to_string(cols));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw DataError("empty CSV: " + path.string());
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void write_matrix_csv(const std::filesystem::path& path,
                      const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write file: " + path.string());
  }
  char buf[40];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) {
    throw DataError("write failed: " + path.string());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open file: " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write file: " + path.string());
  }
  out << content;
  if (!out) {
    throw DataError("write failed: " + path.string());
  }
}

}  // namespace magat
