#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

namespace magat {

// Reads a headerless CSV of decimal numbers into a dense matrix.
// All rows must have the same number of columns.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

// Writes a matrix as headerless CSV, one row per line, full round-trip
// precision (%.17g).
void write_matrix_csv(const std::filesystem::path& path,
                      const Eigen::MatrixXd& m);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace magat
