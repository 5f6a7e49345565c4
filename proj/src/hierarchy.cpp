#include "fnet/hierarchy.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fnet/csv.hpp"
#include "fnet/rng.hpp"

namespace fnet {

Partition hard_view(const LayerPartition& c) {
    if (std::holds_alternative<Partition>(c)) return std::get<Partition>(c);
    const SoftPartition& sp = std::get<SoftPartition>(c);
    Partition h = sp.harden();
    require(h.d == sp.d, Err::partition_mismatch,
            "hardened soft clustering left a cluster empty");
    return h;
}

std::vector<int> HierarchicalNetwork::sizes() const {
    std::vector<int> out;
    for (std::size_t k = 1; k < layers.size(); ++k) out.push_back(layers[k].p);
    return out;
}

void HierarchicalNetwork::validate() const {
    require(layers.size() == partitions.size() + 1, Err::partition_mismatch,
            "layer and partition counts inconsistent");
    for (std::size_t k = 0; k < partitions.size(); ++k) {
        Partition h = hard_view(partitions[k]);
        h.validate();
        require(h.p == layers[k].p, Err::partition_mismatch,
                "partition does not cover layer " + std::to_string(k));
        require(h.d == layers[k + 1].p, Err::partition_mismatch,
                "coarse layer size does not match cluster count");
        layers[k + 1].validate();
    }
}

FeatureNetwork coarsen_weights(const FeatureNetwork& g, const Partition& c) {
    require(c.p == g.p, Err::partition_mismatch,
            "partition covers " + std::to_string(c.p) + " nodes, network has " +
                std::to_string(g.p));
    c.validate();
    const int d = c.d;
    std::vector<std::vector<int>> members = c.members();

    FeatureNetwork out;
    out.p = d;
    out.W = Matrix::Zero(d, d);
#pragma omp parallel for schedule(dynamic)
    for (int a = 0; a < d; ++a) {
        for (int b = a + 1; b < d; ++b) {
            double sum = 0.0;
            for (int s : members[a])
                for (int t : members[b]) sum += g.W(s, t);
            out.W(a, b) = sum / (static_cast<double>(members[a].size()) *
                                 static_cast<double>(members[b].size()));
        }
    }
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) out.W(b, a) = out.W(a, b);
    return out;
}

HierarchicalNetwork build_hierarchy(const FeatureNetwork& g0, const std::vector<int>& sizes,
                                    const ClustererSpec& clusterer) {
    require(!sizes.empty(), Err::invalid_sizes, "at least one layer size required");
    require(sizes.front() <= g0.p, Err::invalid_sizes,
            "first layer size exceeds node count");
    require(sizes.back() >= 1, Err::invalid_sizes, "layer sizes must be at least 1");
    for (std::size_t k = 1; k < sizes.size(); ++k)
        require(sizes[k] < sizes[k - 1], Err::invalid_sizes,
                "layer sizes must strictly decrease");

    HierarchicalNetwork h;
    h.layers.push_back(g0);
    Rng seeds(clusterer.seed);
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        const FeatureNetwork& cur = h.layers.back();
        const int d = sizes[k];
        std::uint64_t layer_seed = seeds.fork(k).seed();
        LayerPartition part;
        switch (clusterer.kind) {
            case ClustererKind::ward:
                part = ward_clusters(dissimilarity_from_weights(cur), d);
                break;
            case ClustererKind::spectral:
                part = spectral_clusters(cur, d, layer_seed);
                break;
            case ClustererKind::fuzzy: {
                FuzzyOptions opts;
                opts.fuzzifier = clusterer.fuzzifier;
                opts.seed = layer_seed;
                part = fuzzy_cmeans(cur, d, opts);
                break;
            }
        }
        h.layers.push_back(coarsen_weights(cur, hard_view(part)));
        h.partitions.push_back(std::move(part));
    }
    h.validate();
    return h;
}

Vector average_pool(const Vector& x, const LayerPartition& c) {
    if (std::holds_alternative<Partition>(c)) {
        const Partition& part = std::get<Partition>(c);
        require(static_cast<int>(x.size()) == part.p, Err::dimension_mismatch,
                "vector length does not match partition");
        Vector sums = Vector::Zero(part.d);
        std::vector<int> counts(part.d, 0);
        for (int i = 0; i < part.p; ++i) {
            sums(part.assign[i]) += x(i);
            counts[part.assign[i]]++;
        }
        for (int j = 0; j < part.d; ++j) sums(j) /= counts[j];
        return sums;
    }
    const SoftPartition& sp = std::get<SoftPartition>(c);
    require(static_cast<int>(x.size()) == sp.p, Err::dimension_mismatch,
            "vector length does not match partition");
    Vector out(sp.d);
    for (int j = 0; j < sp.d; ++j) {
        double num = 0.0, den = 0.0;
        for (int i = 0; i < sp.p; ++i) {
            num += sp.U(j, i) * x(i);
            den += sp.U(j, i);
        }
        out(j) = num / den;  // no all-zero membership row by invariant
    }
    return out;
}

Matrix pool_dataset(const Matrix& X, const HierarchicalNetwork& h, int depth) {
    require(depth >= 0 && depth <= h.depth(), Err::invalid_k,
            "pooling depth exceeds hierarchy depth");
    require(static_cast<int>(X.cols()) == h.layers.front().p, Err::dimension_mismatch,
            "data width does not match the base layer");
    if (depth == 0) return X;
    const int n = static_cast<int>(X.rows());
    const int d = h.layers[depth].p;
    Matrix out(n, d);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        Vector v = X.row(i).transpose();
        for (int k = 0; k < depth; ++k) v = average_pool(v, h.partitions[k]);
        out.row(i) = v.transpose();
    }
    return out;
}

namespace {

namespace fs = std::filesystem;

std::string layer_network_path(const std::string& dir, int k) {
    return (fs::path(dir) / ("layer_" + std::to_string(k) + ".network.csv")).string();
}

std::string layer_partition_path(const std::string& dir, int k) {
    return (fs::path(dir) / ("layer_" + std::to_string(k) + ".partition.csv")).string();
}

}  // namespace

void save_hierarchy(const HierarchicalNetwork& h, const std::string& dir) {
    fs::create_directories(dir);
    for (std::size_t k = 0; k < h.layers.size(); ++k) {
        const FeatureNetwork& g = h.layers[k];
        std::vector<std::string> ids =
            g.node_ids.empty() ? csv::default_ids(g.p, "n") : g.node_ids;
        csv::write_matrix_file(layer_network_path(dir, static_cast<int>(k)), g.W, ids);
    }
    for (std::size_t k = 0; k < h.partitions.size(); ++k) {
        std::ofstream out(layer_partition_path(dir, static_cast<int>(k)));
        require(out.good(), Err::io_error, "cannot write partition file");
        if (std::holds_alternative<Partition>(h.partitions[k])) {
            const Partition& part = std::get<Partition>(h.partitions[k]);
            out << "node_id,cluster_id\n";
            for (int i = 0; i < part.p; ++i) out << i << "," << part.assign[i] << "\n";
        } else {
            const SoftPartition& sp = std::get<SoftPartition>(h.partitions[k]);
            csv::write_matrix(out, sp.U.transpose(), csv::default_ids(sp.d, "c"));
        }
        require(out.good(), Err::io_error, "partition write failed");
    }
}

HierarchicalNetwork load_hierarchy(const std::string& dir) {
    HierarchicalNetwork h;
    for (int k = 0;; ++k) {
        std::string path = layer_network_path(dir, k);
        if (!fs::exists(path)) break;
        FeatureNetwork g;
        std::vector<std::string> ids;
        g.W = csv::read_matrix_file(path, &ids);
        g.p = static_cast<int>(g.W.rows());
        g.node_ids = ids;
        g.validate();
        h.layers.push_back(std::move(g));
    }
    require(!h.layers.empty(), Err::io_error, "no hierarchy layers found in " + dir);
    for (int k = 0; k + 1 < static_cast<int>(h.layers.size()); ++k) {
        std::ifstream in(layer_partition_path(dir, k));
        require(in.good(), Err::io_error, "missing partition file for layer " +
                                              std::to_string(k));
        std::string header;
        std::getline(in, header);
        in.seekg(0);
        if (header.rfind("node_id", 0) == 0) {
            Partition part;
            part.p = h.layers[k].p;
            part.d = h.layers[k + 1].p;
            part.assign.assign(part.p, -1);
            std::string line;
            std::getline(in, line);  // header
            while (std::getline(in, line)) {
                if (line.empty() || line == "\r") continue;
                std::istringstream ls(line);
                int node, cluster;
                char comma;
                require(static_cast<bool>(ls >> node >> comma >> cluster), Err::parse_error,
                        "bad partition row: " + line);
                require(node >= 0 && node < part.p, Err::index_out_of_range,
                        "partition node id out of range");
                part.assign[node] = cluster;
            }
            part.validate();
            h.partitions.emplace_back(std::move(part));
        } else {
            SoftPartition sp;
            sp.U = csv::read_matrix(in).transpose();
            sp.d = static_cast<int>(sp.U.rows());
            sp.p = static_cast<int>(sp.U.cols());
            sp.validate();
            h.partitions.emplace_back(std::move(sp));
        }
    }
    h.validate();
    return h;
}

}  // namespace fnet
