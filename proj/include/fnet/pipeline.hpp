#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fnet/convtrain.hpp"
#include "fnet/eval.hpp"
#include "fnet/hierarchy.hpp"
#include "fnet/laplacian.hpp"
#include "fnet/learners.hpp"
#include "fnet/network.hpp"

namespace fnet {

/// Shared knobs for the concrete pipelines; each pipeline reads only the
/// fields it uses.
struct PipelineOptions {
    CorrelationOptions network;        // training-fold network construction
    std::vector<int> hierarchy_sizes;  // pool, svm-bag, multiscale, conv-train
    ClustererSpec clusterer;
    MarginTrainOptions margin;
    double rbf_gamma = 0.0;  // benchmark-rbf; 0 picks 1/(p*var)
    LaplacianKind laplacian = LaplacianKind::positive;  // smoothness, regularize
    SubgraphKind subgraph = SubgraphKind::automatic;    // multiscale
    double s = 0.0;          // regularize transform exponent
    double eps = 0.0;        // spectral shift; 0 = auto per network
    int pool_depth = -1;     // pool; -1 pools through every level
    TrainConfig conv;        // conv-train
};

/// Known names: constant, nearest-neighbor, benchmark-linear, benchmark-rbf,
/// pool, svm-bag, smoothness, multiscale-smoothness, regularize, conv-train.
std::unique_ptr<Pipeline> make_pipeline(const std::string& name,
                                        const PipelineOptions& opts = {});

const std::vector<std::string>& pipeline_names();

}  // namespace fnet
