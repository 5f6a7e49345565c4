#include "fnet/datasim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fnet/csv.hpp"
#include "fnet/rng.hpp"

namespace fnet {

void Dataset::validate(bool need_both_classes) const {
    require(static_cast<int>(y.size()) == n(), Err::label_mismatch,
            "label count does not match sample count");
    check_finite(X, "data matrix");
    int pos = 0, neg = 0;
    for (int label : y) {
        require(label == 1 || label == -1, Err::label_mismatch, "labels must be +1 or -1");
        (label == 1 ? pos : neg)++;
    }
    if (need_both_classes)
        require(pos > 0 && neg > 0, Err::single_class, "both classes must be present");
}

Dataset load_dataset(const std::string& matrix_path, const std::string& label_path) {
    Dataset d;
    d.X = csv::read_matrix_file(matrix_path, &d.feature_ids);
    d.y = csv::read_labels_file(label_path, &d.sample_ids);
    require(static_cast<int>(d.y.size()) == d.n(), Err::label_mismatch,
            "matrix has " + std::to_string(d.n()) + " rows but label file has " +
                std::to_string(d.y.size()));
    d.validate(false);
    return d;
}

void save_dataset(const Dataset& d, const std::string& matrix_path,
                  const std::string& label_path) {
    std::vector<std::string> fids =
        d.feature_ids.empty() ? csv::default_ids(d.p()) : d.feature_ids;
    std::vector<std::string> sids =
        d.sample_ids.empty() ? csv::default_ids(d.n(), "s") : d.sample_ids;
    csv::write_matrix_file(matrix_path, d.X, fids);
    csv::write_labels_file(label_path, d.y, sids);
}

Matrix sample_mvn(const Matrix& sigma, int n, std::uint64_t seed, double jitter) {
    const int p = static_cast<int>(sigma.rows());
    require(sigma.cols() == p, Err::dimension_mismatch, "covariance must be square");
    require((sigma - sigma.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
            Err::dimension_mismatch, "covariance must be symmetric");
    require(n >= 0, Err::invalid_sizes, "sample count must be nonnegative");

    double delta = jitter * sigma.diagonal().mean();
    Matrix chol;
    bool ok = false;
    for (int attempt = 0; attempt < 4 && !ok; ++attempt) {
        Matrix trial = sigma;
        if (attempt > 0) {
            trial.diagonal().array() += delta;
            delta *= 10.0;
        }
        Eigen::LLT<Matrix> llt(trial);
        if (llt.info() == Eigen::Success) {
            chol = llt.matrixL();
            ok = true;
        }
    }
    require(ok, Err::psd_repair_failed,
            "covariance is not positive semidefinite even after diagonal jitter");

    Rng rng(seed);
    Matrix X(n, p);
    Vector z(p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) z(j) = rng.normal();
        X.row(i) = (chol * z).transpose();
    }
    return X;
}

Matrix sample_covariance(const Matrix& X) {
    const int n = static_cast<int>(X.rows());
    require(n >= 2, Err::invalid_sizes, "covariance needs at least 2 samples");
    Matrix centered = X.rowwise() - X.colwise().mean();
    return (centered.transpose() * centered) / (n - 1);
}

Dataset SimulizeResult::combined() const {
    Dataset d;
    const int n1 = static_cast<int>(x1.rows());
    const int n2 = static_cast<int>(x2.rows());
    d.X = Matrix(n1 + n2, x1.cols());
    d.X.topRows(n1) = x1;
    d.X.bottomRows(n2) = x2;
    d.y.assign(n1, 1);
    d.y.insert(d.y.end(), n2, -1);
    for (int idx : feature_idx) d.feature_ids.push_back("f" + std::to_string(idx));
    d.sample_ids = csv::default_ids(n1 + n2, "s");
    return d;
}

SimulizeResult simulize(const Matrix& X_A, const Matrix& X_B, const SimulizeConfig& cfg) {
    const int p = static_cast<int>(X_A.cols());
    require(X_B.cols() == p, Err::dimension_mismatch,
            "class matrices must share feature count");
    require(X_A.rows() >= 2 && X_B.rows() >= 2, Err::invalid_sizes,
            "each class needs at least 2 samples to estimate covariance");
    require(cfg.b >= 0.0 && cfg.b <= 1.0, Err::config_error, "b must lie in [0,1]");
    const int p_sub = cfg.p_sub == 0 ? p : cfg.p_sub;
    require(p_sub >= 1 && p_sub <= p, Err::invalid_sizes, "p_sub must lie in [1,p]");
    require(cfg.n_per_class >= 1, Err::invalid_sizes, "n_per_class must be positive");

    Rng rng(cfg.seed);

    // one shared feature subsample for both classes
    std::vector<int> all(p);
    std::iota(all.begin(), all.end(), 0);
    Rng pick = rng.fork(0);
    pick.shuffle(all);
    std::vector<int> idx(all.begin(), all.begin() + p_sub);
    std::sort(idx.begin(), idx.end());

    Matrix A_sub(X_A.rows(), p_sub), B_sub(X_B.rows(), p_sub);
    for (int j = 0; j < p_sub; ++j) {
        A_sub.col(j) = X_A.col(idx[j]);
        B_sub.col(j) = X_B.col(idx[j]);
    }
    Matrix sigma_a = sample_covariance(A_sub);
    Matrix sigma_b = sample_covariance(B_sub);

    const double b = cfg.b, c = 1.0 - cfg.b;
    SimulizeResult res;
    res.feature_idx = idx;
    res.sigma1 = b * sigma_a + c * sigma_b;
    res.sigma2 = c * sigma_a + b * sigma_b;
    res.x1 = sample_mvn(res.sigma1, cfg.n_per_class, rng.fork(1).seed(), cfg.jitter);
    res.x2 = sample_mvn(res.sigma2, cfg.n_per_class, rng.fork(2).seed(), cfg.jitter);
    return res;
}

PlantedData planted_two_class(int p, const BlockSpec& spec, double noise_sigma,
                              int n_per_class, std::uint64_t seed) {
    require(noise_sigma >= 0.0, Err::invalid_block_spec, "noise sigma must be nonnegative");
    require(n_per_class >= 1, Err::invalid_sizes, "n_per_class must be positive");
    auto layout = [p](const std::vector<int>& sizes) {
        require(!sizes.empty(), Err::invalid_block_spec, "block sizes required");
        std::vector<int> blocks;
        for (std::size_t k = 0; k < sizes.size(); ++k) {
            require(sizes[k] >= 1, Err::invalid_block_spec, "block sizes must be positive");
            blocks.insert(blocks.end(), sizes[k], static_cast<int>(k));
        }
        require(static_cast<int>(blocks.size()) == p, Err::invalid_block_spec,
                "block sizes must sum to the feature count");
        return blocks;
    };
    std::vector<int> blocks_a = layout(spec.sizes_a);
    std::vector<int> blocks_b = spec.sizes_b.empty() ? blocks_a : layout(spec.sizes_b);
    const int nblocks_a = static_cast<int>(spec.sizes_a.size());
    const int nblocks_b =
        spec.sizes_b.empty() ? nblocks_a : static_cast<int>(spec.sizes_b.size());

    Rng rng(seed);
    PlantedData out;
    out.blocks_a = blocks_a;
    out.blocks_b = blocks_b;
    out.data.X = Matrix(2 * n_per_class, p);
    out.data.y.assign(2 * n_per_class, 1);

    Rng gen_a = rng.fork(0);
    Rng gen_b = rng.fork(1);
    for (int i = 0; i < 2 * n_per_class; ++i) {
        const bool is_a = i < n_per_class;
        const double label = is_a ? 1.0 : -1.0;
        if (!is_a) out.data.y[i] = -1;
        Rng& gen = is_a ? gen_a : gen_b;
        const std::vector<int>& blocks = is_a ? blocks_a : blocks_b;
        const int nblocks = is_a ? nblocks_a : nblocks_b;
        std::vector<double> latent(nblocks);
        for (int k = 0; k < nblocks; ++k) latent[k] = spec.latent_sd * gen.normal();
        for (int j = 0; j < p; ++j) {
            int k = blocks[j];
            double block_sign = (k % 2 == 0) ? 1.0 : -1.0;
            double g = latent[k] + label * block_sign * spec.shift;
            out.data.X(i, j) = g + noise_sigma * gen.normal();
        }
    }
    out.data.feature_ids = csv::default_ids(p);
    out.data.sample_ids = csv::default_ids(2 * n_per_class, "s");
    out.data.validate();
    return out;
}

}  // namespace fnet
