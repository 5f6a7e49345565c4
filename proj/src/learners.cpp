#include "fnet/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fnet {

double kernel_eval(const KernelSpec& kernel, const Vector& a, const Vector& b) {
    require(a.size() == b.size(), Err::dimension_mismatch, "kernel arguments differ in length");
    if (std::holds_alternative<LinearKernel>(kernel)) return a.dot(b);
    const auto& rbf = std::get<RbfKernel>(kernel);
    require(rbf.gamma > 0.0, Err::config_error, "rbf gamma must be positive");
    return std::exp(-rbf.gamma * (a - b).squaredNorm());
}

double default_rbf_gamma(const Matrix& X) {
    require(X.size() > 0, Err::dimension_mismatch, "empty data");
    const double mean = X.mean();
    const double var = (X.array() - mean).square().sum() / double(X.size());
    const double p = double(X.cols());
    return var > 0.0 ? 1.0 / (p * var) : 1.0 / p;
}

namespace {

Matrix kernel_matrix(const KernelSpec& kernel, const Matrix& X) {
    const int n = int(X.rows());
    Matrix K(n, n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double v = kernel_eval(kernel, X.row(i), X.row(j));
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

}  // namespace

MarginModel train_margin(const Matrix& X, const std::vector<int>& y, const KernelSpec& kernel,
                         const MarginTrainOptions& opts) {
    const int n = int(X.rows());
    require(std::size_t(n) == y.size(), Err::dimension_mismatch,
            "row count and label count differ");
    require(n >= 2, Err::single_class, "need at least two training samples");
    require(opts.box_c > 0.0, Err::config_error, "box constraint must be positive");
    check_finite(X, "training data");
    int n_pos = 0, n_neg = 0;
    for (int label : y) {
        require(label == 1 || label == -1, Err::label_mismatch, "labels must be +1 or -1");
        (label == 1 ? n_pos : n_neg)++;
    }
    require(n_pos > 0 && n_neg > 0, Err::single_class,
            "margin training needs both classes present");

    const double C = opts.box_c;
    const Matrix K = kernel_matrix(kernel, X);
    const double gap_tol = opts.tol * std::max(1.0, C * K.trace() / double(n));

    // Dual: minimize 1/2 l'Ql - e'l over 0 <= l <= C, y'l = 0, with
    // Q_ij = y_i y_j K_ij. grad = Ql - e.
    Vector lambda = Vector::Zero(n);
    Vector grad = Vector::Constant(n, -1.0);
    const double tau = 1e-12;

    auto in_up = [&](int t) { return (y[t] == 1 && lambda[t] < C) || (y[t] == -1 && lambda[t] > 0.0); };
    auto in_low = [&](int t) { return (y[t] == -1 && lambda[t] < C) || (y[t] == 1 && lambda[t] > 0.0); };

    long iter = 0;
    double viol_up = 0.0, viol_low = 0.0;
    for (;; ++iter) {
        int i = -1, j = -1;
        viol_up = -std::numeric_limits<double>::infinity();
        viol_low = std::numeric_limits<double>::infinity();
        for (int t = 0; t < n; ++t) {
            const double v = -double(y[t]) * grad[t];
            if (in_up(t) && v > viol_up) {
                viol_up = v;
                i = t;
            }
            if (in_low(t) && v < viol_low) {
                viol_low = v;
                j = t;
            }
        }
        if (viol_up - viol_low <= gap_tol) break;
        if (iter >= opts.max_iter) {
            std::ostringstream msg;
            msg << "margin solver did not converge within " << opts.max_iter
                << " pair updates (gap " << viol_up - viol_low << ")";
            fail(Err::non_convergence, msg.str());
        }

        // Move along lambda_i += y_i t, lambda_j -= y_j t; the equality
        // constraint is preserved and the objective is a parabola in t.
        double eta = K(i, i) + K(j, j) - 2.0 * K(i, j);
        if (eta < tau) eta = tau;
        const double t_star = -(double(y[i]) * grad[i] - double(y[j]) * grad[j]) / eta;

        // Tightest box face in the +t direction; remember which lambda owns
        // it so a clipped step can land exactly on 0 or C.
        double t_hi = std::numeric_limits<double>::infinity();
        int hi_var = -1;
        double hi_value = 0.0;
        auto tighten = [&](double t, int var, double value) {
            if (t < t_hi) {
                t_hi = t;
                hi_var = var;
                hi_value = value;
            }
        };
        if (y[i] == 1)
            tighten(C - lambda[i], 0, C);
        else
            tighten(lambda[i], 0, 0.0);
        if (y[j] == 1)
            tighten(lambda[j], 1, 0.0);
        else
            tighten(C - lambda[j], 1, C);

        const double t_step = std::min(t_star, t_hi);
        double li = std::min(std::max(lambda[i] + double(y[i]) * t_step, 0.0), C);
        double lj = std::min(std::max(lambda[j] - double(y[j]) * t_step, 0.0), C);
        if (t_step == t_hi) (hi_var == 0 ? li : lj) = hi_value;
        const double d_i = li - lambda[i];
        const double d_j = lj - lambda[j];
        lambda[i] = li;
        lambda[j] = lj;
        for (int t = 0; t < n; ++t)
            grad[t] += double(y[t]) * (double(y[i]) * K(t, i) * d_i + double(y[j]) * K(t, j) * d_j);
    }

    double sum_l = 0.0, quad = 0.0;
    for (int t = 0; t < n; ++t) {
        sum_l += lambda[t];
        quad += lambda[t] * (grad[t] + 1.0);
    }

    double bias;
    int n_free = 0;
    double free_sum = 0.0;
    for (int t = 0; t < n; ++t) {
        if (lambda[t] > 1e-8 * C && lambda[t] < C * (1.0 - 1e-8)) {
            free_sum += -double(y[t]) * grad[t];
            n_free++;
        }
    }
    bias = n_free > 0 ? free_sum / double(n_free) : 0.5 * (viol_up + viol_low);

    int n_sv = 0;
    for (int t = 0; t < n; ++t)
        if (lambda[t] > 0.0) n_sv++;
    MarginModel model;
    model.kernel = kernel;
    model.alphas.resize(n_sv);
    model.support_points.resize(n_sv, X.cols());
    int k = 0;
    for (int t = 0; t < n; ++t) {
        if (lambda[t] > 0.0) {
            model.alphas[k] = lambda[t] * double(y[t]);
            model.support_points.row(k) = X.row(t);
            ++k;
        }
    }
    model.bias = bias;
    model.box_c = C;
    model.dual_objective = sum_l - 0.5 * quad;
    return model;
}

double decision(const MarginModel& model, const Vector& x) {
    require(int(x.size()) == model.input_dim(), Err::dimension_mismatch,
            "input length does not match the model");
    double s = model.bias;
    for (Eigen::Index t = 0; t < model.alphas.size(); ++t)
        s += model.alphas[t] * kernel_eval(model.kernel, model.support_points.row(t), x);
    return s;
}

Vector decision_many(const MarginModel& model, const Matrix& X) {
    const int n = int(X.rows());
    Vector out(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) out[i] = decision(model, X.row(i));
    return out;
}

int classify(const MarginModel& model, const Vector& x) {
    return label_from_score(decision(model, x));
}

double PlattCalibrator::prob(double score) const {
    const double f = a * score + b;
    double p;
    if (f >= 0.0) {
        const double e = std::exp(-f);
        p = e / (1.0 + e);
    } else {
        p = 1.0 / (1.0 + std::exp(f));
    }
    return std::min(std::max(p, 1e-12), 1.0 - 1e-12);
}

PlattCalibrator platt_fit(const Vector& scores, const std::vector<int>& y) {
    const int n = int(scores.size());
    require(std::size_t(n) == y.size(), Err::dimension_mismatch,
            "score and label counts differ");
    check_finite(scores, "scores");
    int n_pos = 0, n_neg = 0;
    for (int label : y) {
        require(label == 1 || label == -1, Err::label_mismatch, "labels must be +1 or -1");
        (label == 1 ? n_pos : n_neg)++;
    }
    require(n_pos > 0 && n_neg > 0, Err::single_class,
            "calibration needs both classes present");

    const double hi = (double(n_pos) + 1.0) / (double(n_pos) + 2.0);
    const double lo = 1.0 / (double(n_neg) + 2.0);
    Vector target(n);
    for (int i = 0; i < n; ++i) target[i] = y[i] == 1 ? hi : lo;

    double A = 0.0;
    double B = std::log((double(n_neg) + 1.0) / (double(n_pos) + 1.0));

    auto objective = [&](double a, double b) {
        double f = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = a * scores[i] + b;
            if (z >= 0.0)
                f += target[i] * z + std::log1p(std::exp(-z));
            else
                f += (target[i] - 1.0) * z + std::log1p(std::exp(z));
        }
        return f;
    };

    const double grad_tol = 1e-8;
    const double ridge = 1e-12;
    double F = objective(A, B);
    for (int it = 0; it < 200; ++it) {
        double h11 = ridge, h22 = ridge, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = A * scores[i] + B;
            double p, q;
            if (z >= 0.0) {
                const double e = std::exp(-z);
                p = e / (1.0 + e);
                q = 1.0 / (1.0 + e);
            } else {
                const double e = std::exp(z);
                p = 1.0 / (1.0 + e);
                q = e / (1.0 + e);
            }
            const double w = p * q;
            h11 += scores[i] * scores[i] * w;
            h22 += w;
            h21 += scores[i] * w;
            const double d = target[i] - p;
            g1 += scores[i] * d;
            g2 += d;
        }
        if (std::hypot(g1, g2) < grad_tol) return {A, B};

        const double det = h11 * h22 - h21 * h21;
        const double dA = -(h22 * g1 - h21 * g2) / det;
        const double dB = -(h11 * g2 - h21 * g1) / det;
        const double gd = g1 * dA + g2 * dB;

        double step = 1.0;
        bool moved = false;
        while (step >= 1e-10) {
            const double cand = objective(A + step * dA, B + step * dB);
            if (cand < F + 1e-4 * step * gd) {
                A += step * dA;
                B += step * dB;
                F = cand;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            // The Newton decrement is at the objective's rounding floor:
            // no representable improvement remains, the point is stationary
            // to machine precision.
            const double floor =
                64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(F));
            if (std::abs(gd) <= floor) return {A, B};
            break;
        }
    }

    double g1 = 0.0, g2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = A * scores[i] + B;
        const double p = z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
        g1 += scores[i] * (target[i] - p);
        g2 += target[i] - p;
    }
    require(std::hypot(g1, g2) < grad_tol, Err::convergence_failure,
            "calibration did not reach the gradient tolerance");
    return {A, B};
}

Matrix SvmBagLayer::apply(const Matrix& X) const {
    const int p = clusters.p;
    require(int(X.cols()) == p, Err::dimension_mismatch,
            "column count does not match the bag layer");
    const int n = int(X.rows());
    const int d = clusters.d;
    const auto groups = clusters.members();
    Matrix out(n, d);
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < d; ++j) {
        if (!models[j].has_value()) {
            out.col(j).setConstant(0.5);
            continue;
        }
        const auto& members = groups[j];
        Matrix sub(n, members.size());
        for (std::size_t c = 0; c < members.size(); ++c) sub.col(Eigen::Index(c)) = X.col(members[c]);
        const auto& [model, calib] = *models[j];
        for (int i = 0; i < n; ++i) out(i, j) = calib.prob(decision(model, sub.row(i)));
    }
    return out;
}

SvmBagLayer fit_svm_bag_layer(const Matrix& X, const std::vector<int>& y,
                              const Partition& clusters, const MarginTrainOptions& opts) {
    clusters.validate();
    require(int(X.cols()) == clusters.p, Err::dimension_mismatch,
            "column count does not match the partition");
    const int n = int(X.rows());
    const int d = clusters.d;
    const auto groups = clusters.members();

    SvmBagLayer layer;
    layer.clusters = clusters;
    layer.models.resize(d);
    std::vector<std::string> issue(d);
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < d; ++j) {
        const auto& members = groups[j];
        Matrix sub(n, members.size());
        for (std::size_t c = 0; c < members.size(); ++c) sub.col(Eigen::Index(c)) = X.col(members[c]);
        try {
            MarginModel model = train_margin(sub, y, LinearKernel{}, opts);
            PlattCalibrator calib = platt_fit(decision_many(model, sub), y);
            layer.models[j] = std::make_pair(std::move(model), calib);
        } catch (const Error& e) {
            std::ostringstream msg;
            msg << "cluster " << j << ": " << e.what();
            issue[j] = msg.str();
        }
    }
    for (int j = 0; j < d; ++j)
        if (!issue[j].empty()) layer.warnings.push_back(issue[j]);
    return layer;
}

Vector SmoothnessClassifier::penalties(const Vector& x) const {
    Vector phi(2);
    phi[0] = smoothness_penalty(penalty_a, x);
    phi[1] = smoothness_penalty(penalty_b, x);
    return phi;
}

Vector SmoothnessClassifier::standardized_features(const Vector& x) const {
    Vector phi = penalties(x);
    return (phi - feature_mean).cwiseQuotient(feature_sd);
}

SmoothnessClassifier smoothness_train(const Matrix& x_a, const Matrix& x_b,
                                      const SmoothnessOptions& opts) {
    require(x_a.cols() == x_b.cols(), Err::dimension_mismatch,
            "class matrices differ in feature count");
    require(x_a.rows() >= 2 && x_b.rows() >= 2, Err::single_class,
            "each class needs at least two samples");

    SmoothnessClassifier model;
    model.penalty_a = build_laplacian(correlation_network(x_a, opts.network), opts.kind);
    model.penalty_b = build_laplacian(correlation_network(x_b, opts.network), opts.kind);

    const int n = int(x_a.rows() + x_b.rows());
    Matrix phi(n, 2);
    std::vector<int> y(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const Vector row = i < x_a.rows() ? Vector(x_a.row(i)) : Vector(x_b.row(i - x_a.rows()));
        phi(i, 0) = smoothness_penalty(model.penalty_a, row);
        phi(i, 1) = smoothness_penalty(model.penalty_b, row);
    }
    for (int i = 0; i < n; ++i) y[i] = i < x_a.rows() ? 1 : -1;

    model.feature_mean = phi.colwise().mean().transpose();
    model.feature_sd.resize(2);
    Matrix z(n, 2);
    for (int j = 0; j < 2; ++j) {
        const double ss = (phi.col(j).array() - model.feature_mean[j]).square().sum();
        const double sd = std::sqrt(ss / double(n - 1));
        model.feature_sd[j] = sd > 0.0 ? sd : 1.0;
        z.col(j) = (phi.col(j).array() - model.feature_mean[j]) / model.feature_sd[j];
    }

    MarginTrainOptions mopts;
    mopts.box_c = opts.box_c;
    model.discriminant = train_margin(z, y, LinearKernel{}, mopts);
    return model;
}

double decision(const SmoothnessClassifier& model, const Vector& x) {
    return decision(model.discriminant, model.standardized_features(x));
}

int classify(const SmoothnessClassifier& model, const Vector& x) {
    return label_from_score(decision(model, x));
}

namespace {

SubgraphKind resolve_kind(SubgraphKind kind, const Matrix& W) {
    if (kind != SubgraphKind::automatic) return kind;
    return (W.array() >= 0.0).all() ? SubgraphKind::standard : SubgraphKind::positive;
}

double edge_term(SubgraphKind kind, double w, double fi, double fj) {
    if (kind == SubgraphKind::standard) {
        const double d = fi - fj;
        return w * d * d;
    }
    const double d = w >= 0.0 ? fi - fj : fi + fj;
    return std::abs(w) * d * d;
}

}  // namespace

Vector subgraph_penalties(const Vector& f, const Matrix& W, const Partition& clusters,
                          SubgraphKind kind) {
    clusters.validate();
    require(W.rows() == W.cols(), Err::dimension_mismatch, "weight matrix must be square");
    require(int(W.rows()) == clusters.p && f.size() == W.rows(), Err::dimension_mismatch,
            "vector, weights, and partition sizes differ");
    const SubgraphKind k = resolve_kind(kind, W);
    const auto groups = clusters.members();
    Vector out(clusters.d);
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < clusters.d; ++j) {
        const auto& members = groups[j];
        double acc = 0.0;
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b)
                acc += edge_term(k, W(members[a], members[b]), f[members[a]], f[members[b]]);
        out[j] = acc;
    }
    return out;
}

double cross_cluster_penalty(const Vector& f, const Matrix& W, const Partition& clusters,
                             SubgraphKind kind) {
    clusters.validate();
    require(W.rows() == W.cols(), Err::dimension_mismatch, "weight matrix must be square");
    require(int(W.rows()) == clusters.p && f.size() == W.rows(), Err::dimension_mismatch,
            "vector, weights, and partition sizes differ");
    const SubgraphKind k = resolve_kind(kind, W);
    double acc = 0.0;
    for (int i = 0; i < clusters.p; ++i)
        for (int j = i + 1; j < clusters.p; ++j)
            if (clusters.assign[i] != clusters.assign[j])
                acc += edge_term(k, W(i, j), f[i], f[j]);
    return acc;
}

}  // namespace fnet
