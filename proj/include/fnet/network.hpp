#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fnet/common.hpp"

namespace fnet {

/// Symmetric weighted graph on feature indices. Feature vectors of length p
/// are read as functions on its nodes.
///
/// Invariants (see validate()): W symmetric, zero diagonal, all entries
/// finite. Immutable after construction; safe to share read-only.
struct FeatureNetwork {
    int p = 0;
    Matrix W;                           // p x p
    std::vector<std::string> node_ids;  // optional external feature ids

    void validate() const;
};

/// Symmetric nonnegative dissimilarities with zero diagonal.
struct DistanceMatrix {
    int p = 0;
    Matrix D;

    void validate() const;
};

enum class CorrelationMode { signed_corr, absolute };

/// What to do with a zero-variance feature column: fail, or keep the node
/// with all of its edges dropped (zero row/column).
enum class ConstantColumnPolicy { fail, drop_edges };

struct CorrelationOptions {
    CorrelationMode mode = CorrelationMode::signed_corr;
    ConstantColumnPolicy on_constant = ConstantColumnPolicy::fail;
    double sparsify_tau = 0.0;  // zero |W| below tau; 0 disables
};

/// Pairwise Pearson correlation of the columns of X (two-pass), entries
/// clamped to [-1,1], diagonal zeroed. `dropped` (optional) receives the
/// indices of constant columns when the policy keeps them.
FeatureNetwork correlation_network(const Matrix& X, const CorrelationOptions& opts = {},
                                   std::vector<int>* dropped = nullptr);

/// W[i][j] = exp(-D[i][j]^2 / sigma^2) off-diagonal.
FeatureNetwork gaussian_kernel_network(const DistanceMatrix& D, double sigma);

/// Reads a whitespace-separated edge list `i j weight` (0-based, `#`
/// comments). Duplicate edges: last write wins. Self-edges are ignored.
FeatureNetwork load_prior_network(std::istream& in, int p);
FeatureNetwork load_prior_network_file(const std::string& path, int p);

}  // namespace fnet
