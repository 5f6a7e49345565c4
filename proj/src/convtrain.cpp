#include "fnet/convtrain.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "fnet/rng.hpp"

namespace fnet {

long MaskedConvNet::parameter_count() const {
    long count = 0;
    for (const auto& layer : layers) count += long(layer.M.sum());
    return count;
}

void MaskedConvNet::validate() const {
    require(!layers.empty(), Err::config_error, "network has no layers");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& layer = layers[k];
        require(layer.W.rows() == layer.M.rows() && layer.W.cols() == layer.M.cols(),
                Err::dimension_mismatch, "weight and mask shapes differ");
        require(layer.W.rows() >= 1 && layer.W.cols() >= 1, Err::dimension_mismatch,
                "empty layer");
        if (k > 0)
            require(layer.W.cols() == layers[k - 1].W.rows(), Err::dimension_mismatch,
                    "layer widths do not chain");
        require(((layer.M.array() == 0.0) || (layer.M.array() == 1.0)).all(),
                Err::config_error, "mask entries must be 0 or 1");
        require(((layer.M.array() != 0.0) || (layer.W.array() == 0.0)).all(),
                Err::config_error, "weights must be zero where the mask is zero");
        check_finite(layer.W, "layer weights");
    }
}

Matrix mask_from_partition(const Partition& clusters) {
    clusters.validate();
    Matrix M = Matrix::Zero(clusters.d, clusters.p);
    for (int j = 0; j < clusters.p; ++j) M(clusters.assign[j], j) = 1.0;
    return M;
}

MaskedConvNet make_conv_net(const std::vector<Partition>& clusterings,
                            const std::vector<Activation>& activations, LossKind loss,
                            std::uint64_t seed, double init_scale) {
    require(!clusterings.empty(), Err::config_error, "need at least one layer");
    require(clusterings.size() == activations.size(), Err::dimension_mismatch,
            "one activation per layer required");

    MaskedConvNet net;
    net.loss = loss;
    Rng streams(seed);
    for (std::size_t k = 0; k < clusterings.size(); ++k) {
        const Partition& c = clusterings[k];
        if (k > 0)
            require(c.p == clusterings[k - 1].d, Err::dimension_mismatch,
                    "clustering sizes do not chain");
        ConvLayer layer;
        layer.M = mask_from_partition(c);
        layer.activation = activations[k];
        layer.W = Matrix::Zero(c.d, c.p);

        Rng rng = streams.fork(std::uint64_t(k));
        for (int i = 0; i < c.d; ++i) {
            const double fan_in = layer.M.row(i).sum();
            const double scale = init_scale > 0.0 ? init_scale : 1.0 / std::sqrt(fan_in);
            for (int j = 0; j < c.p; ++j)
                if (layer.M(i, j) == 1.0) layer.W(i, j) = rng.uniform(-scale, scale);
        }
        net.layers.push_back(std::move(layer));
    }
    net.validate();
    return net;
}

namespace {

double activate(Activation g, double z) {
    if (g == Activation::identity) return z;
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// Derivative expressed through the activation value itself.
double activate_grad(Activation g, double a) {
    return g == Activation::identity ? 1.0 : a * (1.0 - a);
}

Vector layer_forward(const ConvLayer& layer, const Vector& a_in) {
    const int rows = int(layer.W.rows());
    Vector a_out(rows);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i) {
        double z = 0.0;
        for (Eigen::Index j = 0; j < layer.W.cols(); ++j) z += layer.W(i, j) * a_in[j];
        a_out[i] = activate(layer.activation, z);
    }
    return a_out;
}

}  // namespace

std::vector<Vector> forward(const MaskedConvNet& net, const Vector& x0) {
    require(!net.layers.empty(), Err::config_error, "network has no layers");
    require(int(x0.size()) == net.input_dim(), Err::dimension_mismatch,
            "input length does not match the first layer");
    std::vector<Vector> acts;
    acts.reserve(net.layers.size() + 1);
    acts.push_back(x0);
    for (const auto& layer : net.layers) acts.push_back(layer_forward(layer, acts.back()));
    return acts;
}

double sample_loss(const MaskedConvNet& net, const Vector& prediction, const Vector& target) {
    require(prediction.size() == target.size(), Err::dimension_mismatch,
            "prediction and target lengths differ");
    if (net.loss == LossKind::squared) return 0.5 * (prediction - target).squaredNorm();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < target.size(); ++i) {
        require(target[i] == 1.0 || target[i] == -1.0, Err::label_mismatch,
                "logistic targets must be +1 or -1");
        const double m = -target[i] * prediction[i];
        loss += m >= 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    }
    return loss;
}

double dataset_loss(const MaskedConvNet& net, const Matrix& X, const Matrix& Y) {
    require(X.rows() == Y.rows(), Err::dimension_mismatch, "sample and target counts differ");
    require(X.rows() > 0, Err::dimension_mismatch, "empty dataset");
    require(int(X.cols()) == net.input_dim(), Err::dimension_mismatch,
            "feature count does not match the first layer");
    require(int(Y.cols()) == net.output_dim(), Err::dimension_mismatch,
            "target width does not match the last layer");
    if (net.loss == LossKind::logistic)
        require(((Y.array() == 1.0) || (Y.array() == -1.0)).all(), Err::label_mismatch,
                "logistic targets must be +1 or -1");
    const int n = int(X.rows());
    Vector losses(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const std::vector<Vector> acts = forward(net, X.row(i));
        losses[i] = sample_loss(net, acts.back(), Y.row(i));
    }
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += losses[i];
    return total / double(n);
}

std::vector<Matrix> backward(const MaskedConvNet& net, const std::vector<Vector>& activations,
                             const Vector& target) {
    const int K = int(net.layers.size());
    require(int(activations.size()) == K + 1, Err::dimension_mismatch,
            "one activation per layer boundary required");
    const Vector& out = activations.back();
    require(out.size() == target.size(), Err::dimension_mismatch,
            "target length does not match the output layer");

    Vector d_act(out.size());
    if (net.loss == LossKind::squared) {
        d_act = out - target;
    } else {
        for (Eigen::Index i = 0; i < out.size(); ++i) {
            require(target[i] == 1.0 || target[i] == -1.0, Err::label_mismatch,
                    "logistic targets must be +1 or -1");
            const double m = target[i] * out[i];
            d_act[i] = -target[i] / (1.0 + std::exp(m));
        }
    }

    std::vector<Matrix> grads(K);
    for (int k = K - 1; k >= 0; --k) {
        const ConvLayer& layer = net.layers[std::size_t(k)];
        const Vector& a_out = activations[std::size_t(k) + 1];
        const Vector& a_in = activations[std::size_t(k)];
        const int rows = int(layer.W.rows());

        Vector dz(rows);
        for (int i = 0; i < rows; ++i) dz[i] = d_act[i] * activate_grad(layer.activation, a_out[i]);

        Matrix& g = grads[std::size_t(k)];
        g = Matrix::Zero(rows, layer.W.cols());
#pragma omp parallel for schedule(static)
        for (int i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < layer.W.cols(); ++j)
                if (layer.M(i, j) == 1.0) g(i, j) = dz[i] * a_in[j];

        if (k > 0) {
            Vector next(layer.W.cols());
#pragma omp parallel for schedule(static)
            for (int j = 0; j < int(layer.W.cols()); ++j) {
                double acc = 0.0;
                for (int i = 0; i < rows; ++i) acc += layer.W(i, j) * dz[i];
                next[j] = acc;
            }
            d_act = next;
        }
    }
    return grads;
}

TrainResult train(MaskedConvNet& net, const Matrix& X, const Matrix& Y, const TrainConfig& cfg) {
    net.validate();
    require(cfg.alpha >= 0.0, Err::config_error, "learning rate must be nonnegative");
    require(cfg.epochs >= 0, Err::config_error, "epoch count must be nonnegative");
    require(cfg.batch_size >= 0, Err::config_error, "batch size must be nonnegative");
    require(X.rows() == Y.rows(), Err::dimension_mismatch, "sample and target counts differ");
    require(int(X.cols()) == net.input_dim(), Err::dimension_mismatch,
            "feature count does not match the first layer");
    require(int(Y.cols()) == net.output_dim(), Err::dimension_mismatch,
            "target width does not match the last layer");
    const int n = int(X.rows());
    require(n > 0, Err::dimension_mismatch, "empty dataset");

    const int K = int(net.layers.size());
    TrainResult result;
    result.loss_trace.push_back(dataset_loss(net, X, Y));
    const double limit = 1e6 * std::max(result.loss_trace.front(), 1e-300);

    Rng epoch_streams(cfg.seed);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    auto apply_batch = [&](const std::vector<int>& rows) {
        std::vector<Matrix> total(K);
        for (int k = 0; k < K; ++k)
            total[std::size_t(k)] =
                Matrix::Zero(net.layers[std::size_t(k)].W.rows(), net.layers[std::size_t(k)].W.cols());
        for (int r : rows) {
            const std::vector<Vector> acts = forward(net, X.row(r));
            const std::vector<Matrix> g = backward(net, acts, Y.row(r));
            for (int k = 0; k < K; ++k) total[std::size_t(k)] += g[std::size_t(k)];
        }
        const double scale = cfg.alpha / double(rows.size());
        for (int k = 0; k < K; ++k) net.layers[std::size_t(k)].W -= scale * total[std::size_t(k)];
    };

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.batch_size == 0 || cfg.batch_size >= n) {
            apply_batch(order);
        } else {
            std::vector<int> shuffled = order;
            Rng rng = epoch_streams.fork(std::uint64_t(epoch));
            rng.shuffle(shuffled);
            for (int at = 0; at < n; at += cfg.batch_size) {
                const int stop = std::min(at + cfg.batch_size, n);
                apply_batch(std::vector<int>(shuffled.begin() + at, shuffled.begin() + stop));
            }
        }
        const double loss = dataset_loss(net, X, Y);
        if (!(loss <= limit)) {
            std::ostringstream msg;
            msg << "loss " << loss << " exceeded 1e6 times the initial loss at epoch " << epoch;
            fail(Err::divergence, msg.str());
        }
        result.loss_trace.push_back(loss);
    }
    return result;
}

}  // namespace fnet
