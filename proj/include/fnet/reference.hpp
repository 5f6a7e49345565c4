#pragma once

#include <vector>

#include "fnet/common.hpp"

namespace fnet::reference {

// Serial straight-line implementations of the parallel kernels. Kept as the
// comparison baseline for the unit tests and the kernel benchmark; none of
// these share code with the main implementations.

/// Textbook two-pass Pearson correlation of columns i and j of X.
double pearson(const Matrix& X, int i, int j);

/// Full correlation weight matrix (diagonal zero), optionally absolute.
Matrix correlation_weights(const Matrix& X, bool absolute);

Matrix gaussian_weights(const Matrix& D, double sigma);

/// Two-term edge sum of the modified smoothness penalty:
/// 1/2 sum_{W>=0} |W_ij| (x_i - x_j)^2 + 1/2 sum_{W<=0} |W_ij| (x_i + x_j)^2
/// over ordered pairs i != j.
double smoothness_edge_sum(const Matrix& W, const Vector& x);

/// Standard-Laplacian penalty as an unordered-pair edge sum:
/// sum_{i<j} W_ij (x_i - x_j)^2.
double standard_edge_sum(const Matrix& W, const Vector& x);

/// Cluster-averaged coarse weights, brute-force double loop over member
/// pairs; diagonal zero.
Matrix coarsen(const Matrix& W, const std::vector<int>& assign, int d);

/// Hard-partition cluster means of x.
Vector average_pool(const Vector& x, const std::vector<int>& assign, int d);

/// Per-cluster standard-Laplacian penalties of f restricted to each cluster,
/// as unordered-pair sums over within-cluster edges.
Vector subgraph_smoothness(const Vector& f, const Matrix& W, const std::vector<int>& assign,
                           int d);

/// Masked feed-forward pass, scalar loops. Activation: 0 = identity,
/// 1 = logistic sigmoid, per layer. Returns activations of every layer
/// including the input.
std::vector<Vector> masked_forward(const std::vector<Matrix>& weights,
                                   const std::vector<Matrix>& masks,
                                   const std::vector<int>& activations, const Vector& x0);

}  // namespace fnet::reference
