#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace fnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Err {
    dimension_mismatch,
    constant_column,
    non_positive_sigma,
    index_out_of_range,
    malformed_row,
    invalid_k,
    degenerate_embedding,
    non_convergence,
    partition_mismatch,
    invalid_sizes,
    single_class,
    parse_error,
    label_mismatch,
    non_finite,
    psd_repair_failed,
    invalid_block_spec,
    fold_too_small,
    convergence_failure,
    negative_power_without_shift,
    divergence,
    config_error,
    io_error,
};

/// Stable snake_case name for an error code, used by the CLI for
/// machine-readable error reporting.
const char* err_name(Err code);

class Error : public std::runtime_error {
public:
    Error(Err code, const std::string& msg)
        : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}

    Err code() const noexcept { return code_; }
    const char* category() const noexcept { return err_name(code_); }

private:
    Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, Err code, const std::string& msg) {
    if (!cond) fail(code, msg);
}

/// Throws Err::non_finite if any entry of m is NaN or infinite.
void check_finite(const Matrix& m, const std::string& what);
void check_finite(const Vector& v, const std::string& what);

}  // namespace fnet
