#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fnet/common.hpp"

namespace fnet::csv {

/// Shortest round-trip decimal form of v (printf %.17g keeps all bits).
std::string format_double(double v);

/// Dense matrix with a header row of column ids; one data row per line.
void write_matrix(std::ostream& out, const Matrix& X, const std::vector<std::string>& col_ids);
void write_matrix_file(const std::string& path, const Matrix& X,
                       const std::vector<std::string>& col_ids);

/// Reads a matrix written by write_matrix. Throws ParseError(line) on
/// malformed rows and NonFinite naming the cell on nan/inf entries.
Matrix read_matrix(std::istream& in, std::vector<std::string>* col_ids = nullptr);
Matrix read_matrix_file(const std::string& path, std::vector<std::string>* col_ids = nullptr);

/// `sample_id,label` rows; +1 maps to class name A, -1 to B.
void write_labels(std::ostream& out, const std::vector<int>& y,
                  const std::vector<std::string>& sample_ids);
void write_labels_file(const std::string& path, const std::vector<int>& y,
                       const std::vector<std::string>& sample_ids);
std::vector<int> read_labels(std::istream& in, std::vector<std::string>* sample_ids = nullptr);
std::vector<int> read_labels_file(const std::string& path,
                                  std::vector<std::string>* sample_ids = nullptr);

/// Default column ids f0..f{p-1} (or a custom prefix).
std::vector<std::string> default_ids(int p, const std::string& prefix = "f");

}  // namespace fnet::csv
