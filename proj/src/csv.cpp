#include "fnet/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fnet::csv {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_cell(const std::string& field, long line_no, const std::string& col) {
    const char* begin = field.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0'))
        fail(Err::parse_error,
             "line " + std::to_string(line_no) + ", column " + col + ": not a number");
    if (!std::isfinite(v))
        fail(Err::non_finite,
             "line " + std::to_string(line_no) + ", column " + col + ": non-finite value");
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_matrix(std::ostream& out, const Matrix& X, const std::vector<std::string>& col_ids) {
    const int p = static_cast<int>(X.cols());
    require(static_cast<int>(col_ids.size()) == p, Err::dimension_mismatch,
            "column id count does not match matrix width");
    for (int j = 0; j < p; ++j) out << (j ? "," : "") << col_ids[j];
    out << "\n";
    for (int i = 0; i < X.rows(); ++i) {
        for (int j = 0; j < p; ++j) out << (j ? "," : "") << format_double(X(i, j));
        out << "\n";
    }
}

void write_matrix_file(const std::string& path, const Matrix& X,
                       const std::vector<std::string>& col_ids) {
    std::ofstream out(path);
    require(out.good(), Err::io_error, "cannot open for writing: " + path);
    write_matrix(out, X, col_ids);
    require(out.good(), Err::io_error, "write failed: " + path);
}

Matrix read_matrix(std::istream& in, std::vector<std::string>* col_ids) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), Err::parse_error, "empty file");
    std::vector<std::string> header = split_fields(line);
    const int p = static_cast<int>(header.size());
    if (col_ids) *col_ids = header;

    std::vector<double> values;
    long line_no = 1;
    int n = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> fields = split_fields(line);
        if (static_cast<int>(fields.size()) != p)
            fail(Err::parse_error, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(p) + " fields, got " +
                                       std::to_string(fields.size()));
        for (int j = 0; j < p; ++j) values.push_back(parse_cell(fields[j], line_no, header[j]));
        ++n;
    }
    Matrix X(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) X(i, j) = values[static_cast<std::size_t>(i) * p + j];
    return X;
}

Matrix read_matrix_file(const std::string& path, std::vector<std::string>* col_ids) {
    std::ifstream in(path);
    require(in.good(), Err::io_error, "cannot open: " + path);
    return read_matrix(in, col_ids);
}

void write_labels(std::ostream& out, const std::vector<int>& y,
                  const std::vector<std::string>& sample_ids) {
    require(y.size() == sample_ids.size(), Err::dimension_mismatch,
            "label and sample id counts differ");
    out << "sample_id,label\n";
    for (std::size_t i = 0; i < y.size(); ++i) {
        require(y[i] == 1 || y[i] == -1, Err::label_mismatch, "labels must be +1 or -1");
        out << sample_ids[i] << "," << (y[i] == 1 ? "A" : "B") << "\n";
    }
}

void write_labels_file(const std::string& path, const std::vector<int>& y,
                       const std::vector<std::string>& sample_ids) {
    std::ofstream out(path);
    require(out.good(), Err::io_error, "cannot open for writing: " + path);
    write_labels(out, y, sample_ids);
    require(out.good(), Err::io_error, "write failed: " + path);
}

std::vector<int> read_labels(std::istream& in, std::vector<std::string>* sample_ids) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), Err::parse_error, "empty label file");
    std::vector<int> y;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> fields = split_fields(line);
        if (fields.size() != 2)
            fail(Err::parse_error, "line " + std::to_string(line_no) + ": expected 2 fields");
        if (sample_ids) sample_ids->push_back(fields[0]);
        if (fields[1] == "A")
            y.push_back(1);
        else if (fields[1] == "B")
            y.push_back(-1);
        else
            fail(Err::label_mismatch,
                 "line " + std::to_string(line_no) + ": label must be A or B, got '" +
                     fields[1] + "'");
    }
    return y;
}

std::vector<int> read_labels_file(const std::string& path,
                                  std::vector<std::string>* sample_ids) {
    std::ifstream in(path);
    require(in.good(), Err::io_error, "cannot open: " + path);
    return read_labels(in, sample_ids);
}

std::vector<std::string> default_ids(int p, const std::string& prefix) {
    std::vector<std::string> ids;
    ids.reserve(p);
    for (int j = 0; j < p; ++j) ids.push_back(prefix + std::to_string(j));
    return ids;
}

}  // namespace fnet::csv
