#pragma once

#include <optional>

#include "fnet/common.hpp"
#include "fnet/network.hpp"

namespace fnet {

enum class LaplacianKind { standard, positive };

struct Eigendecomposition {
    Vector values;   // ascending
    Matrix vectors;  // orthonormal columns
};

/// Graph Laplacian of a feature network.
///
/// standard: L = D - W with d_i = sum_j W(i,j).
/// positive: L* = D* - W with d*_i = sum_j |W(i,j)|; positive semidefinite
/// even when the network carries negative weights. The two coincide when all
/// weights are nonnegative.
///
/// The eigendecomposition is computed once on demand; after population the
/// operator is read-only and concurrent transforms are safe.
class LaplacianOperator {
public:
    LaplacianOperator() = default;
    LaplacianOperator(LaplacianKind kind, Matrix m) : kind_(kind), m_(std::move(m)) {}

    LaplacianKind kind() const { return kind_; }
    const Matrix& matrix() const { return m_; }
    int size() const { return static_cast<int>(m_.rows()); }

    bool has_eigencache() const { return cache_.has_value(); }
    const Eigendecomposition& eigencache() const;
    /// Populates the cache (no-op if already populated). Not safe to call
    /// concurrently with itself; everything after population is.
    const Eigendecomposition& ensure_eigencache() const;

private:
    LaplacianKind kind_ = LaplacianKind::standard;
    Matrix m_;
    mutable std::optional<Eigendecomposition> cache_;
};

LaplacianOperator build_laplacian(const FeatureNetwork& g, LaplacianKind kind);

/// Quadratic form x^T L x. For the positive kind this is the modified
/// smoothness penalty: half-sum of |W_ij| (x_i - x_j)^2 over nonnegative
/// edges plus |W_ij| (x_i + x_j)^2 over negative ones.
double smoothness_penalty(const LaplacianOperator& L, const Vector& x);

/// Populates and returns the eigendecomposition (ascending eigenvalues,
/// orthonormal eigenvectors).
const Eigendecomposition& eigendecompose(const LaplacianOperator& L);

/// Spectral power transform V diag((lambda+eps)^s) V^T x. Eigenvalues are
/// clamped below at zero before the shift so roundoff negatives cannot leak
/// through fractional exponents. s = 0 returns x unchanged.
Vector laplacian_power_transform(const LaplacianOperator& L, const Vector& x, double s,
                                 double eps);

/// Row-wise transform of an n x p matrix.
Matrix laplacian_power_transform_rows(const LaplacianOperator& L, const Matrix& X, double s,
                                      double eps);

/// Default spectral shift used when a config asks for "auto": 1e-3 times the
/// mean eigenvalue.
double default_power_shift(const LaplacianOperator& L);

}  // namespace fnet
