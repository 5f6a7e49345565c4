#include "fnet/pipeline.hpp"

#include <cmath>
#include <utility>

#include "fnet/rng.hpp"

namespace fnet {

namespace {

Matrix rows_with_label(const Matrix& X, const std::vector<int>& y, int label) {
    int count = 0;
    for (int t : y) count += t == label ? 1 : 0;
    Matrix out(count, X.cols());
    int at = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] == label) out.row(at++) = X.row(Eigen::Index(i));
    return out;
}

/// Per-column mean and sample sd (sd 0 replaced by 1) and the standardized
/// matrix; shared by the penalty-feature pipelines.
struct Standardizer {
    Vector mean;
    Vector sd;

    Matrix apply(const Matrix& F) const {
        Matrix Z(F.rows(), F.cols());
        for (Eigen::Index j = 0; j < F.cols(); ++j)
            Z.col(j) = (F.col(j).array() - mean[j]) / sd[j];
        return Z;
    }
};

Standardizer fit_standardizer(const Matrix& F) {
    Standardizer s;
    const Eigen::Index n = F.rows();
    s.mean = F.colwise().mean().transpose();
    s.sd = Vector::Ones(F.cols());
    if (n > 1)
        for (Eigen::Index j = 0; j < F.cols(); ++j) {
            const double var = (F.col(j).array() - s.mean[j]).square().sum() / double(n - 1);
            const double sd = std::sqrt(var);
            if (sd > 0.0) s.sd[j] = sd;
        }
    return s;
}

std::uint64_t mix_seed(std::uint64_t fit_seed, std::uint64_t stream) {
    return Rng(fit_seed).fork(stream).seed();
}

class ConstantFitted : public FittedPipeline {
public:
    Vector score(const Matrix& X) const override { return Vector::Zero(X.rows()); }
};

class ConstantPipeline : public Pipeline {
public:
    std::string name() const override { return "constant"; }
    std::unique_ptr<FittedPipeline> fit(const Matrix&, const std::vector<int>&,
                                        std::uint64_t) const override {
        return std::make_unique<ConstantFitted>();
    }
};

class NearestNeighborFitted : public FittedPipeline {
public:
    NearestNeighborFitted(Matrix X, std::vector<int> y) : X_(std::move(X)), y_(std::move(y)) {}

    Vector score(const Matrix& Q) const override {
        require(Q.cols() == X_.cols(), Err::dimension_mismatch,
                "query width differs from the training data");
        check_finite(Q, "query rows");
        const int n = int(Q.rows());
        Vector s(n);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (X_.row(0) - Q.row(i)).squaredNorm();
            for (Eigen::Index t = 1; t < X_.rows(); ++t) {
                const double d = (X_.row(t) - Q.row(i)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = int(t);
                }
            }
            s[i] = double(y_[std::size_t(best)]);
        }
        return s;
    }

private:
    Matrix X_;
    std::vector<int> y_;
};

class NearestNeighborPipeline : public Pipeline {
public:
    std::string name() const override { return "nearest-neighbor"; }
    std::unique_ptr<FittedPipeline> fit(const Matrix& X, const std::vector<int>& y,
                                        std::uint64_t) const override {
        require(X.rows() > 0, Err::dimension_mismatch, "empty training set");
        require(std::size_t(X.rows()) == y.size(), Err::dimension_mismatch,
                "row and label counts differ");
        check_finite(X, "training rows");
        return std::make_unique<NearestNeighborFitted>(X, y);
    }
};

class MarginFitted : public FittedPipeline {
public:
    explicit MarginFitted(MarginModel m) : model_(std::move(m)) {}
    Vector score(const Matrix& X) const override { return decision_many(model_, X); }

private:
    MarginModel model_;
};

class BenchmarkPipeline : public Pipeline {
public:
    BenchmarkPipeline(bool rbf, PipelineOptions opts) : rbf_(rbf), opts_(std::move(opts)) {}

    std::string name() const override { return rbf_ ? "benchmark-rbf" : "benchmark-linear"; }

    std::unique_ptr<FittedPipeline> fit(const Matrix& X, const std::vector<int>& y,
                                        std::uint64_t) const override {
        KernelSpec kernel = LinearKernel{};
        if (rbf_) {
            RbfKernel k;
            k.gamma = opts_.rbf_gamma > 0.0 ? opts_.rbf_gamma : default_rbf_gamma(X);
            kernel = k;
        }
        return std::make_unique<MarginFitted>(train_margin(X, y, kernel, opts_.margin));
    }

private:
    bool rbf_;
    PipelineOptions opts_;
};

class PoolFitted : public FittedPipeline {
public:
    PoolFitted(HierarchicalNetwork h, int depth, MarginModel m)
        : h_(std::move(h)), depth_(depth), model_(std::move(m)) {}

    Vector score(const Matrix& X) const override {
        return decision_many(model_, pool_dataset(X, h_, depth_));
    }

private:
    HierarchicalNetwork h_;
    int depth_;
    MarginModel model_;
};

class PoolPipeline : public Pipeline {
public:
    explicit PoolPipeline(PipelineOptions opts) : opts_(std::move(opts)) {
        require(!opts_.hierarchy_sizes.empty(), Err::config_error,
                "pool needs hierarchy sizes");
    }

    std::string name() const override { return "pool"; }

    std::unique_ptr<FittedPipeline> fit(const Matrix& X, const std::vector<int>& y,
                                        std::uint64_t seed) const override {
        FeatureNetwork g = correlation_network(X, opts_.network);
        ClustererSpec cl = opts_.clusterer;
        cl.seed = mix_seed(seed, cl.seed);
        HierarchicalNetwork h = build_hierarchy(g, opts_.hierarchy_sizes, cl);
        const int depth = opts_.pool_depth < 0 ? h.depth() : opts_.pool_depth;
        Matrix pooled = pool_dataset(X, h, depth);
        MarginModel m = train_margin(pooled, y, LinearKernel{}, opts_.margin);
        return std::make_unique<PoolFitted>(std::move(h), depth, std::move(m));
    }

private:
    PipelineOptions opts_;
};

class SvmBagFitted : public FittedPipeline {
public:
    SvmBagFitted(std::vector<SvmBagLayer> layers, MarginModel head)
        : layers_(std::move(layers)), head_(std::move(head)) {}

    Vector score(const Matrix& X) const override {
        Matrix f = X;
        for (const auto& layer : layers_) f = layer.apply(f);
        return decision_many(head_, f);
    }

private:
    std::vector<SvmBagLayer> layers_;
    MarginModel head_;
};

class SvmBagPipeline : public Pipeline {
public:
    explicit SvmBagPipeline(PipelineOptions opts) : opts_(std::move(opts)) {
        require(!opts_.hierarchy_sizes.empty(), Err::config_error,
                "svm-bag needs hierarchy sizes");
    }

    std::string name() const override { return "svm-bag"; }

    std::unique_ptr<FittedPipeline> fit(const Matrix& X, const std::vector<int>& y,
                                        std::uint64_t seed) const override {
        FeatureNetwork g = correlation_network(X, opts_.network);
        ClustererSpec cl = opts_.clusterer;
        cl.seed = mix_seed(seed, cl.seed);
        HierarchicalNetwork h = build_hierarchy(g, opts_.hierarchy_sizes, cl);

        Matrix f = X;
        std::vector<SvmBagLayer> layers;
        layers.reserve(std::size_t(h.depth()));
        for (int k = 0; k < h.depth(); ++k) {
            SvmBagLayer layer =
                fit_svm_bag_layer(f, y, hard_view(h.partitions[std::size_t(k)]), opts_.margin);
            f = layer.apply(f);
            layers.push_back(std::move(layer));
        }
        MarginModel head = train_margin(f, y, LinearKernel{}, opts_.margin);
        return std::make_unique<SvmBagFitted>(std::move(layers), std::move(head));
    }

private:
    PipelineOptions opts_;
};

class SmoothnessFitted : public FittedPipeline {
public:
    explicit SmoothnessFitted(SmoothnessClassifier m) : model_(std::move(m)) {}

    Vector score(const Matrix& X) const override {
        require(int(X.cols()) == model_.penalty_a.size(), Err::dimension_mismatch,
                "sample width differs from the training networks");
        check_finite(X, "samples");
        const int n = int(X.rows());
        Vector s(n);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) s[i] = decision(model_, Vector(X.row(i)));
        return s;
    }

private:
    SmoothnessClassifier model_;
};

class SmoothnessPipeline : public Pipeline {
public:
    explicit SmoothnessPipeline(PipelineOptions opts) : opts_(std::move(opts)) {}

    std::string name() const override { return "smoothness"; }

    std::unique_ptr<FittedPipeline> fit(const Matrix& X, const std::vector<int>& y,
                                        std::uint64_t) const override {
        require(std::size_t(X.rows()) == y.size(), Err::dimension_mismatch,
                "row and label counts differ");
        SmoothnessOptions so;
        so.network = opts_.network;
        so.kind = opts_.laplacian;
        so.box_c = opts_.margin.box_c;
        return std::make_unique<SmoothnessFitted>(
            smoothness_train(rows_with_label(X, y, 1), rows_with_label(X, y, -1), so));
    }

private:
    PipelineOptions opts_;
};

class MultiscaleFitted : public FittedPipeline {
public:
    MultiscaleFitted(HierarchicalNetwork h, SubgraphKind kind)
        : h_(std::move(h)), kind_(kind) {
        for (const auto& part : h_.partitions) hard_.push_back(hard_view(part));
    }

    /// Per-cluster penalty of the pooled signal at every level, concatenated
    /// over levels; width = sum of the coarse layer sizes.
    Matrix penalty_features(const Matrix& X) const {
        require(int(X.cols()) == h_.layers.front().p, Err::dimension_mismatch,
                "sample width differs from the base network");
        check_finite(X, "samples");
        int width = 0;
        for (const auto& part : hard_) width += part.d;
        const int n = int(X.rows());
        Matrix F(n, width);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            Vector f = X.row(i);
            int at = 0;
            for (std::size_t k = 0; k < hard_.size(); ++k) {
                const Vector pen =
                    subgraph_penalties(f, h_.layers[k].W, hard_[k], kind_);
                F.row(i).segment(at, pen.size()) = pen.transpose();
                at += int(pen.size());
                f = average_pool(f, h_.partitions[k]);
            }
        }
        return F;
    }

    void finish(Standardizer z, MarginModel m) {
        z_ = std::move(z);
        model_ = std::move(m);
    }

    Vector score(const Matrix& X) const override {
        return decision_many(model_, z_.apply(penalty_features(X)));
    }

private:
    HierarchicalNetwork h_;
    SubgraphKind kind_;
    std::vector<Partition> hard_;
    Standardizer z_;
    MarginModel model_;
};

class MultiscalePipeline : public Pipeline {
public:
    explicit MultiscalePipeline(PipelineOptions opts) : opts_(std::move(opts)) {
        require(!opts_.hierarchy_sizes.empty(), Err::config_error,
                "multiscale-smoothness needs hierarchy sizes");
    }

    std::string name() const override { return "multiscale-smoothness"; }

    std::unique_ptr<FittedPipeline> fit(const Matrix& X, const std::vector<int>& y,
                                        std::uint64_t seed) const override {
        FeatureNetwork g = correlation_network(X, opts_.network);
        ClustererSpec cl = opts_.clusterer;
        cl.seed = mix_seed(seed, cl.seed);
        auto fitted = std::make_unique<MultiscaleFitted>(
            build_hierarchy(g, opts_.hierarchy_sizes, cl), opts_.subgraph);
        Matrix F = fitted->penalty_features(X);
        Standardizer z = fit_standardizer(F);
        MarginModel m = train_margin(z.apply(F), y, LinearKernel{}, opts_.margin);
        fitted->finish(std::move(z), std::move(m));
        return fitted;
    }

private:
    PipelineOptions opts_;
};

class RegularizeFitted : public FittedPipeline {
public:
    RegularizeFitted(LaplacianOperator la, LaplacianOperator lb, double s, double eps_a,
                     double eps_b)
        : la_(std::move(la)), lb_(std::move(lb)), s_(s), eps_a_(eps_a), eps_b_(eps_b) {}

    /// Concatenated spectral transforms against both class networks, n x 2p.
    Matrix transform(const Matrix& X) const {
        require(int(X.cols()) == la_.size(), Err::dimension_mismatch,
                "sample width differs from the class networks");
        Matrix Z(X.rows(), 2 * X.cols());
        Z.leftCols(X.cols()) = laplacian_power_transform_rows(la_, X, s_, eps_a_);
        Z.rightCols(X.cols()) = laplacian_power_transform_rows(lb_, X, s_, eps_b_);
        return Z;
    }

    void finish(MarginModel m) { model_ = std::move(m); }

    Vector score(const Matrix& X) const override { return decision_many(model_, transform(X)); }

private:
    LaplacianOperator la_, lb_;
    double s_, eps_a_, eps_b_;
    MarginModel model_;
};

class RegularizePipeline : public Pipeline {
public:
    explicit RegularizePipeline(PipelineOptions opts) : opts_(std::move(opts)) {}

    std::string name() const override { return "regularize"; }

    std::unique_ptr<FittedPipeline> fit(const Matrix& X, const std::vector<int>& y,
                                        std::uint64_t) const override {
        require(std::size_t(X.rows()) == y.size(), Err::dimension_mismatch,
                "row and label counts differ");
        LaplacianOperator la = build_laplacian(
            correlation_network(rows_with_label(X, y, 1), opts_.network), opts_.laplacian);
        LaplacianOperator lb = build_laplacian(
            correlation_network(rows_with_label(X, y, -1), opts_.network), opts_.laplacian);
        const double eps_a = opts_.eps > 0.0 ? opts_.eps : default_power_shift(la);
        const double eps_b = opts_.eps > 0.0 ? opts_.eps : default_power_shift(lb);
        auto fitted = std::make_unique<RegularizeFitted>(std::move(la), std::move(lb), opts_.s,
                                                         eps_a, eps_b);
        fitted->finish(train_margin(fitted->transform(X), y, LinearKernel{}, opts_.margin));
        return fitted;
    }

private:
    PipelineOptions opts_;
};

class ConvFitted : public FittedPipeline {
public:
    explicit ConvFitted(MaskedConvNet net) : net_(std::move(net)) {}

    Vector score(const Matrix& X) const override {
        require(int(X.cols()) == net_.input_dim(), Err::dimension_mismatch,
                "sample width differs from the trained network");
        check_finite(X, "samples");
        const int n = int(X.rows());
        Vector s(n);
        for (int i = 0; i < n; ++i) s[i] = forward(net_, X.row(i)).back()[0];
        return s;
    }

private:
    MaskedConvNet net_;
};

class ConvTrainPipeline : public Pipeline {
public:
    explicit ConvTrainPipeline(PipelineOptions opts) : opts_(std::move(opts)) {
        require(!opts_.hierarchy_sizes.empty(), Err::config_error,
                "conv-train needs hierarchy sizes");
    }

    std::string name() const override { return "conv-train"; }

    std::unique_ptr<FittedPipeline> fit(const Matrix& X, const std::vector<int>& y,
                                        std::uint64_t seed) const override {
        require(std::size_t(X.rows()) == y.size(), Err::dimension_mismatch,
                "row and label counts differ");
        FeatureNetwork g = correlation_network(X, opts_.network);
        ClustererSpec cl = opts_.clusterer;
        cl.seed = mix_seed(seed, cl.seed);
        HierarchicalNetwork h = build_hierarchy(g, opts_.hierarchy_sizes, cl);

        std::vector<Partition> parts;
        std::vector<Activation> acts;
        for (int k = 0; k < h.depth(); ++k) {
            parts.push_back(hard_view(h.partitions[std::size_t(k)]));
            acts.push_back(Activation::sigmoid);
        }
        Partition head;
        head.p = parts.back().d;
        head.d = 1;
        head.assign.assign(std::size_t(head.p), 0);
        parts.push_back(head);
        acts.push_back(Activation::identity);

        MaskedConvNet net =
            make_conv_net(parts, acts, LossKind::logistic, mix_seed(seed, 11));
        Matrix Y(X.rows(), 1);
        for (Eigen::Index i = 0; i < X.rows(); ++i) Y(i, 0) = double(y[std::size_t(i)]);
        TrainConfig cfg = opts_.conv;
        cfg.seed = mix_seed(seed, 13);
        train(net, X, Y, cfg);
        return std::make_unique<ConvFitted>(std::move(net));
    }

private:
    PipelineOptions opts_;
};

}  // namespace

std::unique_ptr<Pipeline> make_pipeline(const std::string& name, const PipelineOptions& opts) {
    if (name == "constant") return std::make_unique<ConstantPipeline>();
    if (name == "nearest-neighbor") return std::make_unique<NearestNeighborPipeline>();
    if (name == "benchmark-linear") return std::make_unique<BenchmarkPipeline>(false, opts);
    if (name == "benchmark-rbf") return std::make_unique<BenchmarkPipeline>(true, opts);
    if (name == "pool") return std::make_unique<PoolPipeline>(opts);
    if (name == "svm-bag") return std::make_unique<SvmBagPipeline>(opts);
    if (name == "smoothness") return std::make_unique<SmoothnessPipeline>(opts);
    if (name == "multiscale-smoothness") return std::make_unique<MultiscalePipeline>(opts);
    if (name == "regularize") return std::make_unique<RegularizePipeline>(opts);
    if (name == "conv-train") return std::make_unique<ConvTrainPipeline>(opts);
    fail(Err::config_error, "unknown pipeline: " + name);
}

const std::vector<std::string>& pipeline_names() {
    static const std::vector<std::string> names = {
        "constant",   "nearest-neighbor", "benchmark-linear",
        "benchmark-rbf", "pool",          "svm-bag",
        "smoothness", "multiscale-smoothness", "regularize",
        "conv-train"};
    return names;
}

GridSearchResult grid_search_s(const Dataset& data, const std::vector<double>& s_grid,
                               const CVPlan& plan, double eps, const MarginTrainOptions& margin) {
    require(!s_grid.empty(), Err::config_error, "empty exponent grid");
    GridSearchResult result;
    PipelineOptions opts;
    opts.eps = eps;
    opts.margin = margin;
    bool have = false;
    double best_mean = 0.0;
    for (double s : s_grid) {
        opts.s = s;
        auto pipe = make_pipeline("regularize", opts);
        GridPointReport point;
        point.s = s;
        point.report = cross_validate(data, *pipe, plan);
        const double mean = point.report.mean_balanced_accuracy;
        if (!have || grid_point_preferred(mean, s, best_mean, result.best_s)) {
            have = true;
            best_mean = mean;
            result.best_s = s;
        }
        result.per_s.push_back(std::move(point));
    }
    return result;
}

}  // namespace fnet
