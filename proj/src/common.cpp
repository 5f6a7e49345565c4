#include "fnet/common.hpp"

#include <cmath>

namespace fnet {

const char* err_name(Err code) {
    switch (code) {
        case Err::dimension_mismatch: return "dimension_mismatch";
        case Err::constant_column: return "constant_column";
        case Err::non_positive_sigma: return "non_positive_sigma";
        case Err::index_out_of_range: return "index_out_of_range";
        case Err::malformed_row: return "malformed_row";
        case Err::invalid_k: return "invalid_k";
        case Err::degenerate_embedding: return "degenerate_embedding";
        case Err::non_convergence: return "non_convergence";
        case Err::partition_mismatch: return "partition_mismatch";
        case Err::invalid_sizes: return "invalid_sizes";
        case Err::single_class: return "single_class";
        case Err::parse_error: return "parse_error";
        case Err::label_mismatch: return "label_mismatch";
        case Err::non_finite: return "non_finite";
        case Err::psd_repair_failed: return "psd_repair_failed";
        case Err::invalid_block_spec: return "invalid_block_spec";
        case Err::fold_too_small: return "fold_too_small";
        case Err::convergence_failure: return "convergence_failure";
        case Err::negative_power_without_shift: return "negative_power_without_shift";
        case Err::divergence: return "divergence";
        case Err::config_error: return "config_error";
        case Err::io_error: return "io_error";
    }
    return "unknown";
}

void check_finite(const Matrix& m, const std::string& what) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(m(i, j)))
                fail(Err::non_finite, what + " has non-finite entry at (" + std::to_string(i) +
                                          "," + std::to_string(j) + ")");
}

void check_finite(const Vector& v, const std::string& what) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v(i)))
            fail(Err::non_finite, what + " has non-finite entry at " + std::to_string(i));
}

}  // namespace fnet
