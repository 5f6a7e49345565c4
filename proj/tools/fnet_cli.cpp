#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "fnet/csv.hpp"
#include "fnet/datasim.hpp"
#include "fnet/hierarchy.hpp"
#include "fnet/model_io.hpp"
#include "fnet/pipeline.hpp"
#include "fnet/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace fnet;

namespace {

#ifndef FNET_VERSION
#define FNET_VERSION "0.0.0"
#endif

// Stream ids hanging off the run seed; every stage forks its own generator
// so artifacts do not depend on evaluation order.
constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kClusterStream = 2;
constexpr std::uint64_t kTrainStream = 3;
constexpr std::uint64_t kCvStream = 4;
constexpr std::uint64_t kSimulizeStream = 5;

// ---------------------------------------------------------------------------
// strict config access

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), Err::config_error, "cannot open config file " + path);
    try {
        return json::parse(in, nullptr, true, true);  // allow comments
    } catch (const json::exception& e) {
        fail(Err::config_error, "config " + path + ": " + e.what());
    }
}

void check_keys(const json& node, const std::string& path,
                std::initializer_list<const char*> allowed) {
    require(node.is_object(), Err::config_error, path + " must be an object");
    for (auto it = node.begin(); it != node.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        require(known, Err::config_error, "unknown config key: " + path + "." + it.key());
    }
}

template <typename T>
T get_as(const json& node, const std::string& path, const char* key) {
    try {
        return node.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(Err::config_error, path + "." + key + ": " + e.what());
    }
}

template <typename T>
T get_or(const json& node, const std::string& path, const char* key, T fallback) {
    if (!node.contains(key)) return fallback;
    return get_as<T>(node, path, key);
}

template <typename T>
T get_req(const json& node, const std::string& path, const char* key) {
    require(node.contains(key), Err::config_error, "missing config key: " + path + "." + key);
    return get_as<T>(node, path, key);
}

const json& section(const json& node, const char* key) {
    static const json empty = json::object();
    return node.contains(key) ? node.at(key) : empty;
}

// ---------------------------------------------------------------------------
// enum parsing

CorrelationMode parse_mode(const std::string& v, const std::string& field) {
    if (v == "signed") return CorrelationMode::signed_corr;
    if (v == "absolute") return CorrelationMode::absolute;
    fail(Err::config_error, field + ": unknown mode " + v);
}

ConstantColumnPolicy parse_on_constant(const std::string& v, const std::string& field) {
    if (v == "fail") return ConstantColumnPolicy::fail;
    if (v == "drop-edges") return ConstantColumnPolicy::drop_edges;
    fail(Err::config_error, field + ": unknown policy " + v);
}

ClustererKind parse_clusterer(const std::string& v, const std::string& field) {
    if (v == "ward") return ClustererKind::ward;
    if (v == "spectral") return ClustererKind::spectral;
    if (v == "fuzzy") return ClustererKind::fuzzy;
    fail(Err::config_error, field + ": unknown clusterer " + v);
}

LaplacianKind parse_laplacian(const std::string& v, const std::string& field) {
    if (v == "standard") return LaplacianKind::standard;
    if (v == "positive") return LaplacianKind::positive;
    fail(Err::config_error, field + ": unknown laplacian kind " + v);
}

SubgraphKind parse_subgraph(const std::string& v, const std::string& field) {
    if (v == "automatic") return SubgraphKind::automatic;
    if (v == "standard") return SubgraphKind::standard;
    if (v == "positive") return SubgraphKind::positive;
    fail(Err::config_error, field + ": unknown subgraph kind " + v);
}

// ---------------------------------------------------------------------------
// config sections

enum class NetworkSource { correlation, gaussian, prior };

struct NetworkConfig {
    NetworkSource source = NetworkSource::correlation;
    CorrelationOptions copts;
    double sigma = 1.0;
    std::string prior_file;
};

NetworkConfig parse_network(const json& cfg) {
    const json& node = section(cfg, "network");
    check_keys(node, "network",
               {"source", "mode", "on_constant", "sparsify_tau", "sigma", "prior_file"});
    NetworkConfig out;
    const std::string source = get_or<std::string>(node, "network", "source", "correlation");
    if (source == "correlation") {
        out.source = NetworkSource::correlation;
    } else if (source == "gaussian") {
        out.source = NetworkSource::gaussian;
    } else if (source == "prior") {
        out.source = NetworkSource::prior;
    } else {
        fail(Err::config_error, "network.source: unknown source " + source);
    }
    out.copts.mode = parse_mode(get_or<std::string>(node, "network", "mode", "signed"),
                                "network.mode");
    out.copts.on_constant = parse_on_constant(
        get_or<std::string>(node, "network", "on_constant", "fail"), "network.on_constant");
    out.copts.sparsify_tau = get_or<double>(node, "network", "sparsify_tau", 0.0);
    require(out.copts.sparsify_tau >= 0.0, Err::config_error,
            "network.sparsify_tau must be nonnegative");
    out.sigma = get_or<double>(node, "network", "sigma", 1.0);
    if (out.source == NetworkSource::gaussian)
        require(out.sigma > 0.0, Err::config_error, "network.sigma must be positive");
    out.prior_file = get_or<std::string>(node, "network", "prior_file", "");
    if (out.source == NetworkSource::prior)
        require(!out.prior_file.empty(), Err::config_error,
                "network.prior_file is required for the prior source");
    return out;
}

struct HierarchyConfig {
    std::vector<int> sizes;
    ClustererSpec clusterer;
};

HierarchyConfig parse_hierarchy(const json& cfg, std::uint64_t seed, bool required) {
    const json& node = section(cfg, "hierarchy");
    check_keys(node, "hierarchy", {"sizes", "clusterer", "fuzzifier"});
    HierarchyConfig out;
    out.sizes = get_or<std::vector<int>>(node, "hierarchy", "sizes", {});
    if (required)
        require(!out.sizes.empty(), Err::config_error, "hierarchy.sizes must be nonempty");
    for (std::size_t i = 0; i < out.sizes.size(); ++i) {
        require(out.sizes[i] >= 1, Err::config_error, "hierarchy.sizes entries must be >= 1");
        if (i > 0)
            require(out.sizes[i] < out.sizes[i - 1], Err::config_error,
                    "hierarchy.sizes must be strictly decreasing");
    }
    out.clusterer.kind = parse_clusterer(
        get_or<std::string>(node, "hierarchy", "clusterer", "ward"), "hierarchy.clusterer");
    out.clusterer.fuzzifier = get_or<double>(node, "hierarchy", "fuzzifier", 2.0);
    require(out.clusterer.fuzzifier > 1.0, Err::config_error,
            "hierarchy.fuzzifier must exceed 1");
    out.clusterer.seed = Rng(seed).fork(kClusterStream).seed();
    return out;
}

struct LearnerConfig {
    MarginTrainOptions margin;
    double rbf_gamma = 0.0;
};

LearnerConfig parse_learner(const json& cfg) {
    const json& node = section(cfg, "learner");
    check_keys(node, "learner", {"box_c", "tol", "max_iter", "rbf_gamma"});
    LearnerConfig out;
    out.margin.box_c = get_or<double>(node, "learner", "box_c", 1.0);
    require(out.margin.box_c > 0.0, Err::config_error, "learner.box_c must be positive");
    out.margin.tol = get_or<double>(node, "learner", "tol", 1e-6);
    require(out.margin.tol > 0.0, Err::config_error, "learner.tol must be positive");
    out.margin.max_iter = get_or<long>(node, "learner", "max_iter", 1000000L);
    require(out.margin.max_iter >= 0, Err::config_error, "learner.max_iter must be nonnegative");
    out.rbf_gamma = get_or<double>(node, "learner", "rbf_gamma", 0.0);
    require(out.rbf_gamma >= 0.0, Err::config_error,
            "learner.rbf_gamma must be nonnegative (0 = automatic)");
    return out;
}

CVPlan parse_cv(const json& cfg, std::uint64_t seed) {
    const json& node = section(cfg, "cv");
    check_keys(node, "cv", {"k", "stratified"});
    CVPlan plan;
    plan.k = get_or<int>(node, "cv", "k", 10);
    require(plan.k >= 2, Err::config_error, "cv.k must be at least 2");
    plan.stratified = get_or<bool>(node, "cv", "stratified", true);
    plan.seed = Rng(seed).fork(kCvStream).seed();
    return plan;
}

struct RegularizeConfig {
    double s = 0.0;
    double eps = 0.0;
    std::vector<double> grid;
};

RegularizeConfig parse_regularize(const json& cfg) {
    const json& node = section(cfg, "regularize");
    check_keys(node, "regularize", {"s", "eps", "grid"});
    RegularizeConfig out;
    out.s = get_or<double>(node, "regularize", "s", 0.0);
    out.eps = get_or<double>(node, "regularize", "eps", 0.0);
    require(out.eps >= 0.0, Err::config_error,
            "regularize.eps must be nonnegative (0 = automatic)");
    out.grid = get_or<std::vector<double>>(node, "regularize", "grid", {});
    return out;
}

TrainConfig parse_conv(const json& cfg, std::uint64_t seed) {
    const json& node = section(cfg, "conv");
    check_keys(node, "conv", {"alpha", "epochs", "batch_size"});
    TrainConfig out;
    out.alpha = get_or<double>(node, "conv", "alpha", 0.01);
    require(out.alpha >= 0.0, Err::config_error, "conv.alpha must be nonnegative");
    out.epochs = get_or<int>(node, "conv", "epochs", 100);
    require(out.epochs >= 0, Err::config_error, "conv.epochs must be nonnegative");
    out.batch_size = get_or<int>(node, "conv", "batch_size", 0);
    require(out.batch_size >= 0, Err::config_error, "conv.batch_size must be nonnegative");
    out.seed = Rng(seed).fork(kTrainStream).seed();
    return out;
}

Dataset parse_data(const json& cfg, std::uint64_t seed) {
    require(cfg.contains("data"), Err::config_error, "missing config key: data");
    const json& node = cfg.at("data");
    check_keys(node, "data", {"matrix", "labels", "planted"});
    const bool files = node.contains("matrix") || node.contains("labels");
    const bool planted = node.contains("planted");
    require(files != planted, Err::config_error,
            "data needs either matrix+labels paths or a planted block");
    if (files) {
        const auto matrix = get_req<std::string>(node, "data", "matrix");
        const auto labels = get_req<std::string>(node, "data", "labels");
        return load_dataset(matrix, labels);
    }
    const json& gen = node.at("planted");
    check_keys(gen, "data.planted",
               {"p", "sizes_a", "sizes_b", "shift", "latent_sd", "noise_sigma", "n_per_class"});
    const int p = get_req<int>(gen, "data.planted", "p");
    BlockSpec spec;
    spec.sizes_a = get_req<std::vector<int>>(gen, "data.planted", "sizes_a");
    spec.sizes_b = get_or<std::vector<int>>(gen, "data.planted", "sizes_b", {});
    spec.shift = get_or<double>(gen, "data.planted", "shift", 1.0);
    spec.latent_sd = get_or<double>(gen, "data.planted", "latent_sd", 1.0);
    const double noise = get_or<double>(gen, "data.planted", "noise_sigma", 1.0);
    const int n_per_class = get_or<int>(gen, "data.planted", "n_per_class", 100);
    return planted_two_class(p, spec, noise, n_per_class, Rng(seed).fork(kDataStream).seed())
        .data;
}

SimulizeConfig parse_simulize(const json& cfg, std::uint64_t seed) {
    const json& node = section(cfg, "simulize");
    check_keys(node, "simulize", {"b", "n_per_class", "p_sub", "jitter"});
    SimulizeConfig out;
    out.b = get_or<double>(node, "simulize", "b", 0.3);
    require(out.b >= 0.0 && out.b <= 1.0, Err::config_error,
            "simulize.b must lie in [0,1]");
    out.n_per_class = get_or<int>(node, "simulize", "n_per_class", 300);
    require(out.n_per_class >= 2, Err::config_error, "simulize.n_per_class must be >= 2");
    out.p_sub = get_or<int>(node, "simulize", "p_sub", 0);
    require(out.p_sub >= 0, Err::config_error, "simulize.p_sub must be nonnegative");
    out.jitter = get_or<double>(node, "simulize", "jitter", 1e-8);
    require(out.jitter > 0.0, Err::config_error, "simulize.jitter must be positive");
    out.seed = Rng(seed).fork(kSimulizeStream).seed();
    return out;
}

int parse_cluster_k(const json& cfg) {
    const json& node = section(cfg, "cluster");
    check_keys(node, "cluster", {"k"});
    const int k = get_or<int>(node, "cluster", "k", 2);
    require(k >= 1, Err::config_error, "cluster.k must be at least 1");
    return k;
}

void check_top_level(const json& cfg) {
    check_keys(cfg, "config",
               {"seed", "data", "network", "hierarchy", "learner", "cv", "pipeline",
                "pool_depth", "laplacian", "subgraph", "regularize", "conv", "cluster",
                "simulize"});
}

// ---------------------------------------------------------------------------
// shared stages

FeatureNetwork stage_network(const NetworkConfig& net, const Dataset& data) {
    switch (net.source) {
        case NetworkSource::correlation: {
            FeatureNetwork g = correlation_network(data.X, net.copts);
            g.node_ids = data.feature_ids;
            return g;
        }
        case NetworkSource::gaussian: {
            DistanceMatrix D;
            D.p = data.p();
            D.D = Matrix::Zero(D.p, D.p);
            for (int i = 0; i < D.p; ++i)
                for (int j = i + 1; j < D.p; ++j) {
                    const double d = (data.X.col(i) - data.X.col(j)).norm();
                    D.D(i, j) = d;
                    D.D(j, i) = d;
                }
            FeatureNetwork g = gaussian_kernel_network(D, net.sigma);
            g.node_ids = data.feature_ids;
            return g;
        }
        case NetworkSource::prior: {
            FeatureNetwork g = load_prior_network_file(net.prior_file, data.p());
            g.node_ids = data.feature_ids;
            return g;
        }
    }
    fail(Err::config_error, "unreachable network source");
}

Matrix multiscale_features(const Matrix& X, const HierarchicalNetwork& h, SubgraphKind kind) {
    std::vector<Partition> hard;
    for (const auto& part : h.partitions) hard.push_back(hard_view(part));
    int width = 0;
    for (const auto& part : hard) width += part.d;
    Matrix F(X.rows(), width);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        Vector f = X.row(i);
        int at = 0;
        for (std::size_t k = 0; k < hard.size(); ++k) {
            const Vector pen = subgraph_penalties(f, h.layers[k].W, hard[k], kind);
            F.row(i).segment(at, pen.size()) = pen.transpose();
            at += static_cast<int>(pen.size());
            f = average_pool(f, h.partitions[k]);
        }
    }
    return F;
}

Matrix rows_with_label(const Matrix& X, const std::vector<int>& y, int label) {
    int count = 0;
    for (int t : y) count += t == label ? 1 : 0;
    Matrix out(count, X.cols());
    int at = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] == label) out.row(at++) = X.row(Eigen::Index(i));
    return out;
}

PipelineOptions assemble_pipeline_options(const json& cfg, std::uint64_t seed) {
    PipelineOptions opts;
    opts.network = parse_network(cfg).copts;
    const HierarchyConfig hierarchy = parse_hierarchy(cfg, seed, false);
    opts.hierarchy_sizes = hierarchy.sizes;
    opts.clusterer = hierarchy.clusterer;
    const LearnerConfig learner = parse_learner(cfg);
    opts.margin = learner.margin;
    opts.rbf_gamma = learner.rbf_gamma;
    opts.laplacian = parse_laplacian(get_or<std::string>(cfg, "config", "laplacian", "positive"),
                                     "laplacian");
    opts.subgraph = parse_subgraph(get_or<std::string>(cfg, "config", "subgraph", "automatic"),
                                   "subgraph");
    const RegularizeConfig reg = parse_regularize(cfg);
    opts.s = reg.s;
    opts.eps = reg.eps;
    opts.pool_depth = get_or<int>(cfg, "config", "pool_depth", -1);
    opts.conv = parse_conv(cfg, seed);
    return opts;
}

// ---------------------------------------------------------------------------
// artifact writers

void write_partition_csv(const std::string& path, const Partition& part) {
    std::ofstream out(path);
    require(out.good(), Err::io_error, "cannot write " + path);
    out << "node_id,cluster_id\n";
    for (int i = 0; i < part.p; ++i) out << i << "," << part.assign[std::size_t(i)] << "\n";
    require(out.good(), Err::io_error, "failed writing " + path);
}

void write_grid_report_csv(const std::string& path, const GridSearchResult& res) {
    std::ofstream out(path);
    require(out.good(), Err::io_error, "cannot write " + path);
    out << "s,mean_balanced_accuracy,std_balanced_accuracy,mean_auroc,std_auroc\n";
    for (const auto& point : res.per_s)
        out << csv::format_double(point.s) << ","
            << csv::format_double(point.report.mean_balanced_accuracy) << ","
            << csv::format_double(point.report.std_balanced_accuracy) << ","
            << csv::format_double(point.report.mean_auroc) << ","
            << csv::format_double(point.report.std_auroc) << "\n";
    require(out.good(), Err::io_error, "failed writing " + path);
}

void write_loss_trace_csv(const std::string& path, const std::vector<double>& trace) {
    std::ofstream out(path);
    require(out.good(), Err::io_error, "cannot write " + path);
    out << "epoch,loss\n";
    for (std::size_t e = 0; e < trace.size(); ++e)
        out << e << "," << csv::format_double(trace[e]) << "\n";
    require(out.good(), Err::io_error, "failed writing " + path);
}

void write_report_csv(const std::string& path, const MetricReport& report) {
    std::ofstream out(path);
    require(out.good(), Err::io_error, "cannot write " + path);
    write_metric_report(out, report);
    require(out.good(), Err::io_error, "failed writing " + path);
}

// ---------------------------------------------------------------------------
// run context and subcommands

struct RunContext {
    json cfg;
    std::uint64_t seed = 0;
    fs::path out_dir;
    std::vector<std::string> artifacts;
    json extra = json::object();

    std::string out(const std::string& name) {
        artifacts.push_back(name);
        return (out_dir / name).string();
    }
};

void run_build_network(RunContext& ctx) {
    const Dataset data = parse_data(ctx.cfg, ctx.seed);
    const FeatureNetwork g = stage_network(parse_network(ctx.cfg), data);
    const std::vector<std::string> ids =
        g.node_ids.empty() ? csv::default_ids(g.p) : g.node_ids;
    csv::write_matrix_file(ctx.out("network.csv"), g.W, ids);
}

void run_cluster(RunContext& ctx) {
    const Dataset data = parse_data(ctx.cfg, ctx.seed);
    const FeatureNetwork g = stage_network(parse_network(ctx.cfg), data);
    const int k = parse_cluster_k(ctx.cfg);
    const HierarchyConfig h = parse_hierarchy(ctx.cfg, ctx.seed, false);
    if (h.clusterer.kind == ClustererKind::fuzzy) {
        FuzzyOptions fo;
        fo.fuzzifier = h.clusterer.fuzzifier;
        fo.seed = h.clusterer.seed;
        const SoftPartition soft = fuzzy_cmeans(g, k, fo);
        csv::write_matrix_file(ctx.out("clusters.csv"), soft.U.transpose(),
                               csv::default_ids(soft.d, "c"));
    } else if (h.clusterer.kind == ClustererKind::spectral) {
        write_partition_csv(ctx.out("clusters.csv"),
                            spectral_clusters(g, k, h.clusterer.seed));
    } else {
        write_partition_csv(ctx.out("clusters.csv"),
                            ward_clusters(dissimilarity_from_weights(g), k));
    }
}

HierarchicalNetwork stage_hierarchy(RunContext& ctx, const Dataset& data) {
    const FeatureNetwork g = stage_network(parse_network(ctx.cfg), data);
    const HierarchyConfig h = parse_hierarchy(ctx.cfg, ctx.seed, true);
    return build_hierarchy(g, h.sizes, h.clusterer);
}

void run_hierarchy(RunContext& ctx) {
    const Dataset data = parse_data(ctx.cfg, ctx.seed);
    const HierarchicalNetwork h = stage_hierarchy(ctx, data);
    const fs::path dir = ctx.out_dir / "hierarchy";
    save_hierarchy(h, dir.string());
    for (std::size_t k = 0; k < h.layers.size(); ++k)
        ctx.artifacts.push_back("hierarchy/layer_" + std::to_string(k) + ".network.csv");
    for (std::size_t k = 0; k < h.partitions.size(); ++k)
        ctx.artifacts.push_back("hierarchy/layer_" + std::to_string(k) + ".partition.csv");
}

void run_pool(RunContext& ctx) {
    const Dataset data = parse_data(ctx.cfg, ctx.seed);
    const HierarchicalNetwork h = stage_hierarchy(ctx, data);
    int depth = get_or<int>(ctx.cfg, "config", "pool_depth", -1);
    if (depth < 0) depth = h.depth();
    const Matrix pooled = pool_dataset(data.X, h, depth);
    csv::write_matrix_file(ctx.out("pooled.csv"), pooled,
                           csv::default_ids(static_cast<int>(pooled.cols()), "c"));
    csv::write_labels_file(ctx.out("pooled_labels.csv"), data.y, data.sample_ids);
    ctx.extra["pool_depth"] = depth;
}

void run_svm_bag(RunContext& ctx) {
    const Dataset data = parse_data(ctx.cfg, ctx.seed);
    const HierarchicalNetwork h = stage_hierarchy(ctx, data);
    const LearnerConfig learner = parse_learner(ctx.cfg);

    Matrix f = data.X;
    json warnings = json::array();
    for (int k = 0; k < h.depth(); ++k) {
        const SvmBagLayer layer =
            fit_svm_bag_layer(f, data.y, hard_view(h.partitions[std::size_t(k)]),
                              learner.margin);
        for (const auto& w : layer.warnings)
            warnings.push_back("layer " + std::to_string(k + 1) + ": " + w);
        f = layer.apply(f);
        csv::write_matrix_file(
            ctx.out("probabilities_layer_" + std::to_string(k + 1) + ".csv"), f,
            csv::default_ids(static_cast<int>(f.cols()), "c"));
    }
    const MarginModel head = train_margin(f, data.y, LinearKernel{}, learner.margin);
    save_model_file(ctx.out("svm_bag_head.model"), head);
    ctx.extra["warnings"] = warnings;
}

void run_smoothness(RunContext& ctx) {
    const Dataset data = parse_data(ctx.cfg, ctx.seed);
    SmoothnessOptions so;
    so.network = parse_network(ctx.cfg).copts;
    so.kind = parse_laplacian(
        get_or<std::string>(ctx.cfg, "config", "laplacian", "positive"), "laplacian");
    so.box_c = parse_learner(ctx.cfg).margin.box_c;
    const SmoothnessClassifier model = smoothness_train(
        rows_with_label(data.X, data.y, 1), rows_with_label(data.X, data.y, -1), so);
    save_model_file(ctx.out("smoothness.model"), model);

    Matrix table(data.n(), 3);
    for (int i = 0; i < data.n(); ++i) {
        const Vector phi = model.penalties(Vector(data.X.row(i)));
        table(i, 0) = phi[0];
        table(i, 1) = phi[1];
        table(i, 2) = double(data.y[std::size_t(i)]);
    }
    csv::write_matrix_file(ctx.out("penalties.csv"), table,
                           {"penalty_a", "penalty_b", "label"});
}

void run_multiscale(RunContext& ctx) {
    const Dataset data = parse_data(ctx.cfg, ctx.seed);
    const HierarchicalNetwork h = stage_hierarchy(ctx, data);
    const SubgraphKind kind = parse_subgraph(
        get_or<std::string>(ctx.cfg, "config", "subgraph", "automatic"), "subgraph");
    const Matrix F = multiscale_features(data.X, h, kind);
    csv::write_matrix_file(ctx.out("multiscale_features.csv"), F,
                           csv::default_ids(static_cast<int>(F.cols()), "pen"));
    csv::write_labels_file(ctx.out("multiscale_labels.csv"), data.y, data.sample_ids);
}

void run_regularize(RunContext& ctx) {
    const Dataset data = parse_data(ctx.cfg, ctx.seed);
    const NetworkConfig net = parse_network(ctx.cfg);
    require(net.source == NetworkSource::correlation, Err::config_error,
            "regularize builds class correlation networks; network.source must be correlation");
    const RegularizeConfig reg = parse_regularize(ctx.cfg);
    const LaplacianKind kind = parse_laplacian(
        get_or<std::string>(ctx.cfg, "config", "laplacian", "positive"), "laplacian");

    const LaplacianOperator la =
        build_laplacian(correlation_network(rows_with_label(data.X, data.y, 1), net.copts), kind);
    const LaplacianOperator lb =
        build_laplacian(correlation_network(rows_with_label(data.X, data.y, -1), net.copts),
                        kind);
    const double eps_a = reg.eps > 0.0 ? reg.eps : default_power_shift(la);
    const double eps_b = reg.eps > 0.0 ? reg.eps : default_power_shift(lb);

    Matrix Z(data.n(), 2 * data.p());
    Z.leftCols(data.p()) = laplacian_power_transform_rows(la, data.X, reg.s, eps_a);
    Z.rightCols(data.p()) = laplacian_power_transform_rows(lb, data.X, reg.s, eps_b);
    std::vector<std::string> ids;
    const std::vector<std::string> base =
        data.feature_ids.empty() ? csv::default_ids(data.p()) : data.feature_ids;
    for (const auto& id : base) ids.push_back("A:" + id);
    for (const auto& id : base) ids.push_back("B:" + id);
    csv::write_matrix_file(ctx.out("regularized.csv"), Z, ids);
    csv::write_labels_file(ctx.out("regularized_labels.csv"), data.y, data.sample_ids);
    ctx.extra["s"] = reg.s;
    ctx.extra["eps_a"] = eps_a;
    ctx.extra["eps_b"] = eps_b;

    if (!reg.grid.empty()) {
        const CVPlan plan = parse_cv(ctx.cfg, ctx.seed);
        const GridSearchResult res = grid_search_s(data, reg.grid, plan, reg.eps,
                                                   parse_learner(ctx.cfg).margin);
        write_grid_report_csv(ctx.out("grid_report.csv"), res);
        ctx.extra["best_s"] = res.best_s;
    }
}

void run_conv_train(RunContext& ctx) {
    const Dataset data = parse_data(ctx.cfg, ctx.seed);
    const HierarchicalNetwork h = stage_hierarchy(ctx, data);

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

    const TrainConfig cfg = parse_conv(ctx.cfg, ctx.seed);
    MaskedConvNet net = make_conv_net(parts, acts, LossKind::logistic,
                                      Rng(cfg.seed).fork(1).seed());
    Matrix Y(data.n(), 1);
    for (int i = 0; i < data.n(); ++i) Y(i, 0) = double(data.y[std::size_t(i)]);
    const TrainResult result = train(net, data.X, Y, cfg);

    save_model_file(ctx.out("conv.model"), net);
    write_loss_trace_csv(ctx.out("loss_trace.csv"), result.loss_trace);
    ctx.extra["final_loss"] = result.loss_trace.back();
    ctx.extra["parameter_count"] = net.parameter_count();
}

void run_simulize(RunContext& ctx) {
    const Dataset data = parse_data(ctx.cfg, ctx.seed);
    const SimulizeConfig cfg = parse_simulize(ctx.cfg, ctx.seed);
    const SimulizeResult result = simulize(rows_with_label(data.X, data.y, 1),
                                           rows_with_label(data.X, data.y, -1), cfg);
    const Dataset out = result.combined();
    save_dataset(out, ctx.out("simulized_matrix.csv"), ctx.out("simulized_labels.csv"));
    json idx = json::array();
    for (int i : result.feature_idx) idx.push_back(i);
    ctx.extra["feature_idx"] = idx;
    ctx.extra["b"] = cfg.b;
}

void run_cv(RunContext& ctx) {
    const Dataset data = parse_data(ctx.cfg, ctx.seed);
    const std::string name = get_req<std::string>(ctx.cfg, "config", "pipeline");
    const NetworkConfig net = parse_network(ctx.cfg);
    require(net.source == NetworkSource::correlation, Err::config_error,
            "cv pipelines rebuild correlation networks per fold; network.source must be "
            "correlation");
    const PipelineOptions opts = assemble_pipeline_options(ctx.cfg, ctx.seed);
    const CVPlan plan = parse_cv(ctx.cfg, ctx.seed);
    const auto pipe = make_pipeline(name, opts);
    const MetricReport report = cross_validate(data, *pipe, plan);
    write_report_csv(ctx.out("cv_report.csv"), report);
    ctx.extra["pipeline"] = name;
    ctx.extra["mean_balanced_accuracy"] = report.mean_balanced_accuracy;
    ctx.extra["mean_auroc"] = report.mean_auroc;
}

// ---------------------------------------------------------------------------

json version_block() {
    json v;
    v["fnet"] = FNET_VERSION;
    v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                 "." + std::to_string(EIGEN_MINOR_VERSION);
    v["json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    v["cli11"] = CLI11_VERSION;
    v["compiler"] = __VERSION__;
#ifdef _OPENMP
    v["openmp"] = std::to_string(_OPENMP);
#else
    v["openmp"] = "off";
#endif
    return v;
}

void write_manifest(const RunContext& ctx, const std::string& subcommand,
                    double wall_seconds) {
    json m;
    m["subcommand"] = subcommand;
    m["seed"] = ctx.seed;
    m["config"] = ctx.cfg;
    m["versions"] = version_block();
    m["artifacts"] = ctx.artifacts;
    if (!ctx.extra.empty()) m["results"] = ctx.extra;
    m["wall_time_seconds"] = wall_seconds;
    const fs::path path = ctx.out_dir / "manifest.json";
    std::ofstream out(path);
    require(out.good(), Err::io_error, "cannot write " + path.string());
    out << m.dump(2) << "\n";
    require(out.good(), Err::io_error, "failed writing " + path.string());
}

int run_subcommand(const std::string& name, const std::string& config_path,
                   const std::optional<std::uint64_t>& seed_override,
                   const std::string& out_dir, int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif
    RunContext ctx;
    ctx.cfg = load_config_file(config_path);
    check_top_level(ctx.cfg);
    ctx.seed = seed_override ? *seed_override
                             : get_or<std::uint64_t>(ctx.cfg, "config", "seed", 0);
    ctx.cfg["seed"] = ctx.seed;  // echoed config alone reproduces the run
    ctx.out_dir = out_dir;
    fs::create_directories(ctx.out_dir);

    const auto started = std::chrono::steady_clock::now();
    if (name == "build-network")
        run_build_network(ctx);
    else if (name == "cluster")
        run_cluster(ctx);
    else if (name == "hierarchy")
        run_hierarchy(ctx);
    else if (name == "pool")
        run_pool(ctx);
    else if (name == "svm-bag")
        run_svm_bag(ctx);
    else if (name == "smoothness")
        run_smoothness(ctx);
    else if (name == "multiscale")
        run_multiscale(ctx);
    else if (name == "regularize")
        run_regularize(ctx);
    else if (name == "conv-train")
        run_conv_train(ctx);
    else if (name == "simulize")
        run_simulize(ctx);
    else if (name == "cv")
        run_cv(ctx);
    else
        fail(Err::config_error, "unknown subcommand: " + name);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;

    write_manifest(ctx, name, elapsed.count());
    std::cout << name << ": wrote " << ctx.artifacts.size() << " artifact"
              << (ctx.artifacts.size() == 1 ? "" : "s") << " + manifest.json to " << out_dir
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"feature-network experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    int threads = 0;

    const std::vector<std::pair<const char*, const char*>> commands = {
        {"build-network", "write the feature network of the input data"},
        {"cluster", "cluster the feature network into k groups"},
        {"hierarchy", "build and save the coarsened network stack"},
        {"pool", "average-pool samples through the hierarchy"},
        {"svm-bag", "train stacked per-cluster probability layers"},
        {"smoothness", "train the two-network smoothness classifier"},
        {"multiscale", "export per-cluster smoothness penalties at every level"},
        {"regularize", "spectral-transform features against class networks"},
        {"conv-train", "train the masked convolutional network"},
        {"simulize", "generate covariance-mixed synthetic classes"},
        {"cv", "cross-validate a pipeline and report metrics"},
    };
    for (const auto& [name, desc] : commands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "experiment config (json)")->required();
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--out", out_dir, "output directory (default .)");
        sub->add_option("--threads", threads, "worker thread cap (0 = library default)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        return run_subcommand(app.get_subcommands().front()->get_name(), config_path, seed,
                              out_dir, threads);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == Err::config_error ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
