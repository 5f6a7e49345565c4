#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fnet/common.hpp"

namespace fnet {

/// Labeled sample matrix; labels are +1 (class A) or -1 (class B).
struct Dataset {
    Matrix X;
    std::vector<int> y;
    std::vector<std::string> feature_ids;
    std::vector<std::string> sample_ids;

    int n() const { return static_cast<int>(X.rows()); }
    int p() const { return static_cast<int>(X.cols()); }
    void validate(bool need_both_classes = true) const;
};

Dataset load_dataset(const std::string& matrix_path, const std::string& label_path);
void save_dataset(const Dataset& d, const std::string& matrix_path,
                  const std::string& label_path);

/// Rows i.i.d. N(0, Sigma) via Cholesky factorization. A failed factorization
/// is retried with ascending diagonal jitter (jitter * mean diagonal, x10 per
/// retry, 3 retries) before PSDRepairFailed.
Matrix sample_mvn(const Matrix& sigma, int n, std::uint64_t seed, double jitter = 1e-8);

/// Sample column covariance with the n-1 denominator.
Matrix sample_covariance(const Matrix& X);

struct SimulizeConfig {
    double b = 0.3;        // covariance mixing weight
    int n_per_class = 300;
    int p_sub = 0;         // feature subsample size; 0 keeps all
    std::uint64_t seed = 0;
    double jitter = 1e-8;
};

/// Two synthetic Gaussian classes with mixed covariances:
/// sigma1 = b*Sigma_A + (1-b)*Sigma_B, sigma2 with the weights swapped,
/// both estimated on one shared random feature subsample.
struct SimulizeResult {
    Matrix x1, x2;             // n_per_class x p_sub draws per class
    Matrix sigma1, sigma2;     // the mixed covariances actually sampled from
    std::vector<int> feature_idx;

    Dataset combined() const;  // x1 labeled +1, x2 labeled -1
};

SimulizeResult simulize(const Matrix& X_A, const Matrix& X_B, const SimulizeConfig& cfg);

/// Planted two-class generator: within-block latent signal plus class mean
/// shifts of alternating sign per block, plus i.i.d. Gaussian noise.
/// Class B may use a different block layout (covariance-only separation
/// when shift = 0).
struct BlockSpec {
    std::vector<int> sizes_a;
    std::vector<int> sizes_b;  // empty: same layout as class A
    double shift = 1.0;        // per-feature class mean offset magnitude
    double latent_sd = 1.0;    // sd of the shared within-block latent
};

struct PlantedData {
    Dataset data;
    std::vector<int> blocks_a;  // ground-truth block of every feature
    std::vector<int> blocks_b;
};

PlantedData planted_two_class(int p, const BlockSpec& spec, double noise_sigma,
                              int n_per_class, std::uint64_t seed);

}  // namespace fnet
