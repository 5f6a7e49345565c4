#include "fnet/reference.hpp"

#include <cmath>

namespace fnet::reference {

double pearson(const Matrix& X, int i, int j) {
    const int n = static_cast<int>(X.rows());
    double mi = 0.0, mj = 0.0;
    for (int t = 0; t < n; ++t) {
        mi += X(t, i);
        mj += X(t, j);
    }
    mi /= n;
    mj /= n;
    double sii = 0.0, sjj = 0.0, sij = 0.0;
    for (int t = 0; t < n; ++t) {
        double a = X(t, i) - mi;
        double b = X(t, j) - mj;
        sii += a * a;
        sjj += b * b;
        sij += a * b;
    }
    return sij / (std::sqrt(sii) * std::sqrt(sjj));
}

Matrix correlation_weights(const Matrix& X, bool absolute) {
    const int p = static_cast<int>(X.cols());
    Matrix W = Matrix::Zero(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            double r = pearson(X, i, j);
            if (r > 1.0) r = 1.0;
            if (r < -1.0) r = -1.0;
            if (absolute) r = std::fabs(r);
            W(i, j) = r;
            W(j, i) = r;
        }
    return W;
}

Matrix gaussian_weights(const Matrix& D, double sigma) {
    const int p = static_cast<int>(D.rows());
    Matrix W = Matrix::Zero(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            if (i != j) W(i, j) = std::exp(-(D(i, j) * D(i, j)) / (sigma * sigma));
    return W;
}

double smoothness_edge_sum(const Matrix& W, const Vector& x) {
    const int p = static_cast<int>(W.rows());
    double pos = 0.0, neg = 0.0;
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
            if (i == j) continue;
            double w = W(i, j);
            if (w >= 0.0) {
                double d = x(i) - x(j);
                pos += w * d * d;
            } else {
                double s = x(i) + x(j);
                neg += -w * s * s;
            }
        }
    return 0.5 * pos + 0.5 * neg;
}

double standard_edge_sum(const Matrix& W, const Vector& x) {
    const int p = static_cast<int>(W.rows());
    double total = 0.0;
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            double d = x(i) - x(j);
            total += W(i, j) * d * d;
        }
    return total;
}

Matrix coarsen(const Matrix& W, const std::vector<int>& assign, int d) {
    const int p = static_cast<int>(W.rows());
    std::vector<std::vector<int>> members(d);
    for (int i = 0; i < p; ++i) members[assign[i]].push_back(i);
    Matrix out = Matrix::Zero(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) {
            double sum = 0.0;
            for (int s : members[a])
                for (int t : members[b]) sum += W(s, t);
            out(a, b) = sum / (static_cast<double>(members[a].size()) *
                               static_cast<double>(members[b].size()));
            out(b, a) = out(a, b);
        }
    return out;
}

Vector average_pool(const Vector& x, const std::vector<int>& assign, int d) {
    Vector sums = Vector::Zero(d);
    std::vector<int> counts(d, 0);
    for (int i = 0; i < static_cast<int>(x.size()); ++i) {
        sums(assign[i]) += x(i);
        counts[assign[i]]++;
    }
    for (int j = 0; j < d; ++j) sums(j) /= counts[j];
    return sums;
}

Vector subgraph_smoothness(const Vector& f, const Matrix& W, const std::vector<int>& assign,
                           int d) {
    const int p = static_cast<int>(W.rows());
    Vector out = Vector::Zero(d);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            if (assign[i] != assign[j]) continue;
            double diff = f(i) - f(j);
            out(assign[i]) += W(i, j) * diff * diff;
        }
    return out;
}

std::vector<Vector> masked_forward(const std::vector<Matrix>& weights,
                                   const std::vector<Matrix>& masks,
                                   const std::vector<int>& activations, const Vector& x0) {
    std::vector<Vector> acts;
    acts.push_back(x0);
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const Matrix& w = weights[k];
        const Matrix& m = masks[k];
        Vector next(w.rows());
        for (int i = 0; i < w.rows(); ++i) {
            double s = 0.0;
            for (int j = 0; j < w.cols(); ++j) s += w(i, j) * m(i, j) * acts.back()(j);
            next(i) = activations[k] == 1 ? 1.0 / (1.0 + std::exp(-s)) : s;
        }
        acts.push_back(next);
    }
    return acts;
}

}  // namespace fnet::reference
