#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fnet/clustering.hpp"
#include "fnet/network.hpp"

namespace fnet {

using LayerPartition = std::variant<Partition, SoftPartition>;

/// Hard view of a layer partition; soft layers harden by argmax.
Partition hard_view(const LayerPartition& c);

/// Stack of coarsened networks G_0..G_K with the partitions C_0..C_{K-1}
/// that produced each next layer.
struct HierarchicalNetwork {
    std::vector<FeatureNetwork> layers;
    std::vector<LayerPartition> partitions;

    int depth() const { return static_cast<int>(partitions.size()); }
    std::vector<int> sizes() const;
    void validate() const;
};

enum class ClustererKind { ward, spectral, fuzzy };

struct ClustererSpec {
    ClustererKind kind = ClustererKind::ward;
    double fuzzifier = 2.0;  // fuzzy only
    std::uint64_t seed = 0;
};

/// Cluster-averaged coarse network: off-diagonal (a,b) entry is the mean of
/// all weights between members of clusters a and b; diagonal zero.
FeatureNetwork coarsen_weights(const FeatureNetwork& g, const Partition& c);

/// Recursively clusters and coarsens G_0 down to the given layer sizes.
/// Sizes must satisfy p >= d_1 > d_2 > ... > d_K >= 1.
HierarchicalNetwork build_hierarchy(const FeatureNetwork& g0, const std::vector<int>& sizes,
                                    const ClustererSpec& clusterer);

/// Cluster means of x (hard) or membership-weighted means (soft).
Vector average_pool(const Vector& x, const LayerPartition& c);

/// Row-wise pooling of X through hierarchy layers 0..depth-1.
/// depth = 0 returns X unchanged.
Matrix pool_dataset(const Matrix& X, const HierarchicalNetwork& h, int depth);

/// Directory layout: layer_k.network.csv for every layer, layer_k.partition.csv
/// for k < depth (hard: node_id,cluster_id rows; soft: dense membership matrix).
void save_hierarchy(const HierarchicalNetwork& h, const std::string& dir);
HierarchicalNetwork load_hierarchy(const std::string& dir);

}  // namespace fnet
