#include "fnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fnet {

void FeatureNetwork::validate() const {
    require(W.rows() == p && W.cols() == p, Err::dimension_mismatch,
            "weight matrix must be p x p");
    for (int j = 0; j < p; ++j) {
        require(W(j, j) == 0.0, Err::non_finite, "diagonal must be zero");
        for (int i = 0; i < p; ++i) {
            require(std::isfinite(W(i, j)), Err::non_finite, "weights must be finite");
            require(W(i, j) == W(j, i), Err::dimension_mismatch, "weights must be symmetric");
        }
    }
}

void DistanceMatrix::validate() const {
    require(D.rows() == p && D.cols() == p, Err::dimension_mismatch,
            "distance matrix must be p x p");
    for (int j = 0; j < p; ++j) {
        require(D(j, j) == 0.0, Err::non_finite, "distance diagonal must be zero");
        for (int i = 0; i < p; ++i) {
            require(std::isfinite(D(i, j)) && D(i, j) >= 0.0, Err::non_finite,
                    "distances must be finite and nonnegative");
            require(D(i, j) == D(j, i), Err::dimension_mismatch, "distances must be symmetric");
        }
    }
}

FeatureNetwork correlation_network(const Matrix& X, const CorrelationOptions& opts,
                                   std::vector<int>* dropped) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    require(n >= 2, Err::dimension_mismatch, "correlation needs at least 2 samples");
    check_finite(X, "data matrix");

    // pass 1: column means, pass 2: centered variances
    std::vector<double> mean(p), var(p);
    std::vector<char> is_const(p, 0);
    for (int j = 0; j < p; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += X(i, j);
        mean[j] = s / n;
        double v = 0.0;
        for (int i = 0; i < n; ++i) {
            double c = X(i, j) - mean[j];
            v += c * c;
        }
        var[j] = v;
        if (v == 0.0) {
            if (opts.on_constant == ConstantColumnPolicy::fail)
                fail(Err::constant_column, "column " + std::to_string(j) + " has zero variance");
            is_const[j] = 1;
            if (dropped) dropped->push_back(j);
        }
    }

    FeatureNetwork net;
    net.p = p;
    net.W = Matrix::Zero(p, p);
    const bool absolute = opts.mode == CorrelationMode::absolute;
    const double tau = opts.sparsify_tau;

#pragma omp parallel for schedule(static)
    for (int i = 0; i < p; ++i) {
        if (is_const[i]) continue;
        for (int j = i + 1; j < p; ++j) {
            if (is_const[j]) continue;
            double cov = 0.0;
            for (int t = 0; t < n; ++t) cov += (X(t, i) - mean[i]) * (X(t, j) - mean[j]);
            double r = cov / (std::sqrt(var[i]) * std::sqrt(var[j]));
            r = std::clamp(r, -1.0, 1.0);
            if (absolute) r = std::fabs(r);
            if (tau > 0.0 && std::fabs(r) < tau) r = 0.0;
            net.W(i, j) = r;
        }
    }
    // mirror the upper triangle; each (i,j) was written by exactly one thread
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) net.W(j, i) = net.W(i, j);
    return net;
}

FeatureNetwork gaussian_kernel_network(const DistanceMatrix& dm, double sigma) {
    require(sigma > 0.0, Err::non_positive_sigma, "sigma must be positive");
    dm.validate();
    const int p = dm.p;
    FeatureNetwork net;
    net.p = p;
    net.W = Matrix::Zero(p, p);
    const double inv_s2 = 1.0 / (sigma * sigma);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            if (i == j) continue;
            double d = dm.D(i, j);
            net.W(i, j) = std::exp(-d * d * inv_s2);
        }
    }
    return net;
}

FeatureNetwork load_prior_network(std::istream& in, int p) {
    require(p > 0, Err::invalid_sizes, "node count must be positive");
    FeatureNetwork net;
    net.p = p;
    net.W = Matrix::Zero(p, p);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        long i, j;
        double w;
        if (!(ls >> i)) continue;  // blank or comment-only line
        if (!(ls >> j >> w)) fail(Err::malformed_row, "line " + std::to_string(line_no));
        std::string rest;
        if (ls >> rest) fail(Err::malformed_row, "line " + std::to_string(line_no) + ": trailing tokens");
        if (!std::isfinite(w)) fail(Err::malformed_row, "line " + std::to_string(line_no) + ": non-finite weight");
        if (i < 0 || i >= p || j < 0 || j >= p)
            fail(Err::index_out_of_range, "line " + std::to_string(line_no) + ": node index out of [0," +
                                              std::to_string(p) + ")");
        if (i == j) continue;
        net.W(i, j) = w;
        net.W(j, i) = w;
    }
    return net;
}

FeatureNetwork load_prior_network_file(const std::string& path, int p) {
    std::ifstream in(path);
    require(in.good(), Err::io_error, "cannot open edge list: " + path);
    return load_prior_network(in, p);
}

}  // namespace fnet
