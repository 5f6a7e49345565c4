#pragma once

#include <cstdint>
#include <vector>

#include "fnet/clustering.hpp"
#include "fnet/common.hpp"

namespace fnet {

enum class Activation { identity, sigmoid };
enum class LossKind { squared, logistic };

/// One masked layer: the binary mask restricts each output unit to the
/// members of its cluster, and the weights are identically zero wherever the
/// mask is zero (before and after every training step).
struct ConvLayer {
    Matrix W;
    Matrix M;
    Activation activation = Activation::sigmoid;
};

struct MaskedConvNet {
    std::vector<ConvLayer> layers;
    LossKind loss = LossKind::squared;

    int input_dim() const { return layers.empty() ? 0 : int(layers.front().W.cols()); }
    int output_dim() const { return layers.empty() ? 0 : int(layers.back().W.rows()); }
    long parameter_count() const;
    void validate() const;
};

/// d x p indicator matrix: row i has ones exactly at the members of
/// cluster i.
Matrix mask_from_partition(const Partition& clusters);

/// Stacks one masked layer per clustering (layer k maps clusterings[k].p
/// inputs to clusterings[k].d outputs). Weights start uniform in
/// [-scale, scale] at mask-1 positions; scale defaults to 1/sqrt(cluster
/// size) per row, or `init_scale` for every row when positive.
MaskedConvNet make_conv_net(const std::vector<Partition>& clusterings,
                            const std::vector<Activation>& activations, LossKind loss,
                            std::uint64_t seed, double init_scale = 0.0);

/// Activations of every layer, element [0] being the input itself.
std::vector<Vector> forward(const MaskedConvNet& net, const Vector& x0);

/// Sample loss at the final activation. Logistic targets must be +/-1.
double sample_loss(const MaskedConvNet& net, const Vector& prediction, const Vector& target);

/// Mean loss over rows of X against rows of Y.
double dataset_loss(const MaskedConvNet& net, const Matrix& X, const Matrix& Y);

/// Per-layer weight gradients of the sample loss; zero at mask-0 positions.
std::vector<Matrix> backward(const MaskedConvNet& net, const std::vector<Vector>& activations,
                             const Vector& target);

struct TrainConfig {
    double alpha = 0.01;
    int epochs = 100;
    int batch_size = 0;  // 0 = full batch
    std::uint64_t seed = 0;
};

struct TrainResult {
    /// loss_trace[e] = mean dataset loss after e epochs; entry 0 is the
    /// loss before any update.
    std::vector<double> loss_trace;
};

/// Gradient descent W_k -= alpha * dJ/dW_k. Mini-batches (when batch_size
/// > 0) are drawn in a seed-deterministic shuffled order per epoch. Fails
/// with Divergence when the loss exceeds 1e6 times its initial value.
TrainResult train(MaskedConvNet& net, const Matrix& X, const Matrix& Y, const TrainConfig& cfg);

}  // namespace fnet
