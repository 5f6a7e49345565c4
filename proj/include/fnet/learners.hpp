#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fnet/clustering.hpp"
#include "fnet/common.hpp"
#include "fnet/laplacian.hpp"
#include "fnet/network.hpp"

namespace fnet {

struct LinearKernel {};
struct RbfKernel {
    double gamma = 1.0;
};
using KernelSpec = std::variant<LinearKernel, RbfKernel>;

double kernel_eval(const KernelSpec& kernel, const Vector& a, const Vector& b);

/// 1 / (p * var) with var taken over all entries of X; falls back to 1/p for
/// constant data.
double default_rbf_gamma(const Matrix& X);

/// Soft-margin kernel classifier in dual form. `alphas` are signed dual
/// coefficients alpha_i = lambda_i * y_i with 0 <= lambda_i <= C; only rows
/// with lambda_i > 0 are retained in `support_points`.
struct MarginModel {
    KernelSpec kernel;
    Vector alphas;
    Matrix support_points;
    double bias = 0.0;
    double box_c = 1.0;
    double dual_objective = 0.0;

    int input_dim() const { return int(support_points.cols()); }
};

struct MarginTrainOptions {
    double box_c = 1.0;
    // KKT gap threshold, scaled internally by the kernel magnitude (mean
    // diagonal times box_c, floored at 1) so badly scaled features stop at
    // an equivalent relative precision.
    double tol = 1e-6;
    long max_iter = 1000000;
};

/// Sequential minimal optimization on the precomputed kernel matrix,
/// maximal-violating-pair selection.
MarginModel train_margin(const Matrix& X, const std::vector<int>& y, const KernelSpec& kernel,
                         const MarginTrainOptions& opts = {});

double decision(const MarginModel& model, const Vector& x);
Vector decision_many(const MarginModel& model, const Matrix& X);

/// Sign of the score; a score of exactly zero goes to the negative class.
inline int label_from_score(double score) { return score > 0.0 ? 1 : -1; }
int classify(const MarginModel& model, const Vector& x);

/// Sigmoid map score -> P(y=+1), p = 1 / (1 + exp(a*s + b)). Outputs are
/// clamped away from exact 0 and 1.
struct PlattCalibrator {
    double a = 0.0;
    double b = 0.0;

    double prob(double score) const;
};

/// Newton fit of the calibrator on held-in scores with smoothed targets
/// (n+ + 1)/(n+ + 2) and 1/(n- + 2); runs to gradient norm < 1e-8.
PlattCalibrator platt_fit(const Vector& scores, const std::vector<int>& y);

/// One probability column per feature cluster: a linear margin model plus a
/// Platt calibrator trained on that cluster's columns. Clusters whose model
/// fails to train score a constant 0.5 and are reported in `warnings`.
struct SvmBagLayer {
    Partition clusters;
    std::vector<std::optional<std::pair<MarginModel, PlattCalibrator>>> models;
    std::vector<std::string> warnings;

    Matrix apply(const Matrix& X) const;
};

SvmBagLayer fit_svm_bag_layer(const Matrix& X, const std::vector<int>& y,
                              const Partition& clusters,
                              const MarginTrainOptions& opts = {});

/// Two-feature discriminant on the smoothness penalties of a sample against
/// each class's network: phi(f) = (f' L_A f, f' L_B f), z-standardized, then
/// a linear margin model. Class A is +1.
struct SmoothnessClassifier {
    LaplacianOperator penalty_a;
    LaplacianOperator penalty_b;
    Vector feature_mean;
    Vector feature_sd;
    MarginModel discriminant;

    Vector penalties(const Vector& x) const;
    Vector standardized_features(const Vector& x) const;
};

struct SmoothnessOptions {
    CorrelationOptions network;
    LaplacianKind kind = LaplacianKind::positive;
    double box_c = 1.0;
};

SmoothnessClassifier smoothness_train(const Matrix& x_a, const Matrix& x_b,
                                      const SmoothnessOptions& opts = {});
double decision(const SmoothnessClassifier& model, const Vector& x);
int classify(const SmoothnessClassifier& model, const Vector& x);

enum class SubgraphKind { automatic, standard, positive };

/// Per-cluster smoothness penalties of f on the induced subgraphs; component
/// j sums the edge penalties among the members of cluster j only.
Vector subgraph_penalties(const Vector& f, const Matrix& W, const Partition& clusters,
                          SubgraphKind kind = SubgraphKind::automatic);

/// Penalty over edges whose endpoints lie in different clusters.
double cross_cluster_penalty(const Vector& f, const Matrix& W, const Partition& clusters,
                             SubgraphKind kind = SubgraphKind::automatic);

}  // namespace fnet
