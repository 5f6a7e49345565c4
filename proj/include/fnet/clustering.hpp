#pragma once

#include <cstdint>
#include <vector>

#include "fnet/common.hpp"
#include "fnet/network.hpp"

namespace fnet {

/// Hard assignment of p nodes to d clusters; every label in [0,d) occurs.
struct Partition {
    int p = 0;
    int d = 0;
    std::vector<int> assign;

    void validate() const;
    std::vector<std::vector<int>> members() const;
    /// Relabels clusters by ascending smallest member index.
    Partition canonical() const;
};

/// Membership matrix U (d x p); each column sums to 1, no all-zero row.
struct SoftPartition {
    int p = 0;
    int d = 0;
    Matrix U;

    void validate() const;
    /// Argmax memberships, ties toward the lower cluster index.
    Partition harden() const;
};

/// Ward-linkage agglomerative clustering of a dissimilarity matrix
/// (Lance-Williams updates), cut at k clusters.
Partition ward_clusters(const DistanceMatrix& D, int k);

/// Dissimilarity used for Ward on a weighted network: 1 - |W|, floored at 0.
DistanceMatrix dissimilarity_from_weights(const FeatureNetwork& g);

/// Rows of the k bottom eigenvectors of the standard Laplacian of |W|,
/// normalized to unit length (zero rows left as zero).
Matrix spectral_embedding(const FeatureNetwork& g, int k);

/// k-means on the spectral embedding, 20 restarts, farthest-first seeding
/// from the given seed.
Partition spectral_clusters(const FeatureNetwork& g, int k, std::uint64_t seed);

struct FuzzyOptions {
    double fuzzifier = 2.0;      // m > 1
    double tol = 1e-6;           // max membership change
    int max_iter = 300;
    std::uint64_t seed = 0;
};

/// Fuzzy c-means on the spectral embedding of the network.
SoftPartition fuzzy_cmeans(const FeatureNetwork& g, int k, const FuzzyOptions& opts);

/// Newman modularity of a hard partition, on |W|.
double modularity(const FeatureNetwork& g, const Partition& part);

/// Recursive leading-eigenvector modularity bisection with single-node
/// refinement sweeps; stops when no split increases modularity. Cluster
/// count is data-driven; a single cluster is a valid output.
Partition community_detect(const FeatureNetwork& g);

}  // namespace fnet
