#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fnet/common.hpp"
#include "fnet/datasim.hpp"
#include "fnet/learners.hpp"

namespace fnet {

/// (sensitivity + specificity) / 2 with +1 as the positive class.
double balanced_accuracy(const std::vector<int>& pred, const std::vector<int>& y);

/// Mann-Whitney AUROC with midrank tie handling:
/// P(score_pos > score_neg) + P(tie)/2.
double auroc(const Vector& scores, const std::vector<int>& y);

struct CVPlan {
    int k = 10;
    bool stratified = true;
    std::uint64_t seed = 0;
};

/// fold id per sample; stratified round-robin after a per-class shuffle.
std::vector<int> make_folds(const std::vector<int>& y, const CVPlan& plan);

struct MetricReport {
    std::vector<double> fold_balanced_accuracy;
    std::vector<double> fold_auroc;
    double mean_balanced_accuracy = 0.0;
    double std_balanced_accuracy = 0.0;
    double mean_auroc = 0.0;
    double std_auroc = 0.0;
};

void write_metric_report(std::ostream& out, const MetricReport& r);

/// A trained pipeline scores rows; labels are sign(score) with ties negative.
class FittedPipeline {
public:
    virtual ~FittedPipeline() = default;
    virtual Vector score(const Matrix& X) const = 0;
};

/// Declarative train/apply split: fit() only ever sees training rows, so the
/// cross-validation harness enforces the no-leakage rule structurally.
class Pipeline {
public:
    virtual ~Pipeline() = default;
    virtual std::string name() const = 0;
    virtual std::unique_ptr<FittedPipeline> fit(const Matrix& X, const std::vector<int>& y,
                                                std::uint64_t seed) const = 0;
};

MetricReport cross_validate(const Dataset& data, const Pipeline& pipeline, const CVPlan& plan);

struct GridPointReport {
    double s = 0.0;
    MetricReport report;
};

struct GridSearchResult {
    double best_s = 0.0;
    std::vector<GridPointReport> per_s;
};

/// Default exponent grid for the spectral-transform search.
const std::vector<double>& default_s_grid();

/// Total order for grid selection: higher mean balanced accuracy wins, ties
/// prefer smaller |s|, equal |s| prefers the negative exponent.
bool grid_point_preferred(double mean_a, double s_a, double mean_b, double s_b);

/// Cross-validated search over the transform exponent of the regularize
/// pipeline. eps = 0 picks the automatic spectral shift per class network.
GridSearchResult grid_search_s(const Dataset& data, const std::vector<double>& s_grid,
                               const CVPlan& plan, double eps = 0.0,
                               const MarginTrainOptions& margin = {});

}  // namespace fnet
