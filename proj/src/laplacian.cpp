#include "fnet/laplacian.hpp"

#include <cmath>

namespace fnet {

const Eigendecomposition& LaplacianOperator::eigencache() const {
    require(cache_.has_value(), Err::convergence_failure, "eigencache not populated");
    return *cache_;
}

const Eigendecomposition& LaplacianOperator::ensure_eigencache() const {
    if (!cache_) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(m_);
        require(es.info() == Eigen::Success, Err::convergence_failure,
                "symmetric eigensolver did not converge");
        cache_ = Eigendecomposition{es.eigenvalues(), es.eigenvectors()};
    }
    return *cache_;
}

LaplacianOperator build_laplacian(const FeatureNetwork& g, LaplacianKind kind) {
    const int p = g.p;
    Matrix m = -g.W;
    for (int i = 0; i < p; ++i) {
        double d = 0.0;
        if (kind == LaplacianKind::positive) {
            for (int j = 0; j < p; ++j) d += std::fabs(g.W(i, j));
        } else {
            for (int j = 0; j < p; ++j) d += g.W(i, j);
        }
        m(i, i) = d;
    }
    return LaplacianOperator(kind, std::move(m));
}

double smoothness_penalty(const LaplacianOperator& L, const Vector& x) {
    const int p = L.size();
    require(static_cast<int>(x.size()) == p, Err::dimension_mismatch,
            "vector length does not match operator size");
    const Matrix& m = L.matrix();
    double total = 0.0;
    for (int i = 0; i < p; ++i) {
        double row = 0.0;
        for (int j = 0; j < p; ++j) row += m(i, j) * x(j);
        total += x(i) * row;
    }
    return total;
}

const Eigendecomposition& eigendecompose(const LaplacianOperator& L) {
    return L.ensure_eigencache();
}

Vector laplacian_power_transform(const LaplacianOperator& L, const Vector& x, double s,
                                 double eps) {
    const int p = L.size();
    require(static_cast<int>(x.size()) == p, Err::dimension_mismatch,
            "vector length does not match operator size");
    require(eps >= 0.0, Err::negative_power_without_shift, "eps must be nonnegative");
    if (s == 0.0) return x;  // identity power, exact

    const Eigendecomposition& eig = L.ensure_eigencache();
    if (s < 0.0 && eps == 0.0) {
        for (int i = 0; i < p; ++i)
            if (eig.values(i) <= 1e-12)
                fail(Err::negative_power_without_shift,
                     "negative power on a (near-)singular operator needs eps > 0");
    }

    Vector t = eig.vectors.transpose() * x;
    for (int i = 0; i < p; ++i) {
        double lam = eig.values(i);
        if (lam < 0.0) lam = 0.0;  // roundoff negatives
        t(i) *= std::pow(lam + eps, s);
    }
    return eig.vectors * t;
}

Matrix laplacian_power_transform_rows(const LaplacianOperator& L, const Matrix& X, double s,
                                      double eps) {
    const int p = L.size();
    require(static_cast<int>(X.cols()) == p, Err::dimension_mismatch,
            "matrix width does not match operator size");
    if (s == 0.0) return X;
    L.ensure_eigencache();
    const int n = static_cast<int>(X.rows());
    Matrix out(n, p);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        Vector xi = X.row(i).transpose();
        out.row(i) = laplacian_power_transform(L, xi, s, eps).transpose();
    }
    return out;
}

double default_power_shift(const LaplacianOperator& L) {
    const Eigendecomposition& eig = L.ensure_eigencache();
    double mean = eig.values.sum() / std::max<int>(1, L.size());
    if (mean < 0.0) mean = 0.0;
    return 1e-3 * mean;
}

}  // namespace fnet
