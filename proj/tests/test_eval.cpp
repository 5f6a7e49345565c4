#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "fnet/datasim.hpp"
#include "fnet/eval.hpp"
#include "fnet/rng.hpp"
#include "helpers.hpp"

using namespace fnet;

TEST_CASE("balanced accuracy from a pinned confusion table") {
    // TP=3 FN=1 TN=2 FP=2 -> (3/4 + 2/4) / 2
    std::vector<int> y = {1, 1, 1, 1, -1, -1, -1, -1};
    std::vector<int> pred = {1, 1, 1, -1, 1, 1, -1, -1};
    CHECK(balanced_accuracy(pred, y) == 0.625);

    CHECK(balanced_accuracy(y, y) == 1.0);
    std::vector<int> flipped(y.size());
    std::transform(y.begin(), y.end(), flipped.begin(), [](int v) { return -v; });
    CHECK(balanced_accuracy(flipped, y) == 0.0);

    CHECK_FNET_ERROR(balanced_accuracy({1, -1}, y), Err::dimension_mismatch);
    CHECK_FNET_ERROR(balanced_accuracy(pred, {1, 1, 1, 1, 1, 1, 1, 1}), Err::single_class);
    CHECK_FNET_ERROR(balanced_accuracy({1, 1, 1, 1, 0, -1, -1, -1}, y), Err::label_mismatch);
}

TEST_CASE("auroc hand values and tie handling") {
    Vector s(4);
    s << 1.0, 2.0, 2.0, 3.0;
    std::vector<int> y = {-1, -1, 1, 1};
    CHECK(auroc(s, y) == 0.875);

    Vector perfect(6);
    perfect << -3, -2, -1, 1, 2, 3;
    std::vector<int> y6 = {-1, -1, -1, 1, 1, 1};
    CHECK(auroc(perfect, y6) == 1.0);
    CHECK(auroc(Vector(-perfect), y6) == 0.0);
    CHECK(auroc(Vector::Zero(6), y6) == 0.5);

    CHECK_FNET_ERROR(auroc(Vector::Zero(3), {1, 1, 1}), Err::single_class);
    CHECK_FNET_ERROR(auroc(Vector::Zero(2), y6), Err::dimension_mismatch);
    Vector bad(2);
    bad << 1.0, std::nan("");
    CHECK_FNET_ERROR(auroc(bad, {1, -1}), Err::non_finite);
}

TEST_CASE("auroc is antisymmetric under score negation") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 12;
        Vector s(n);
        std::vector<int> y(n);
        for (int i = 0; i < n; ++i) {
            s[i] = double(rng.integer(5));  // heavy ties
            y[i] = i < 4 ? 1 : -1;
        }
        // n_pos * n_neg = 32, so both quotients are exact dyadics.
        CHECK(auroc(s, y) + auroc(Vector(-s), y) == 1.0);
    }
}

TEST_CASE("stratified folds balance both classes") {
    std::vector<int> y(50);
    for (int i = 0; i < 50; ++i) y[i] = i < 30 ? 1 : -1;
    CVPlan plan;
    plan.k = 5;
    plan.seed = 9;

    std::vector<int> fold = make_folds(y, plan);
    REQUIRE(fold.size() == 50);
    std::vector<int> pos_count(5, 0), neg_count(5, 0);
    for (int i = 0; i < 50; ++i) {
        REQUIRE(fold[i] >= 0);
        REQUIRE(fold[i] < 5);
        (y[i] == 1 ? pos_count : neg_count)[fold[i]]++;
    }
    for (int f = 0; f < 5; ++f) {
        CHECK(pos_count[f] == 6);
        CHECK(neg_count[f] == 4);
    }

    CHECK(make_folds(y, plan) == fold);
    CVPlan other = plan;
    other.seed = 10;
    CHECK(make_folds(y, other) != fold);

    SUBCASE("unstratified splits by position only") {
        CVPlan flat;
        flat.k = 3;
        flat.stratified = false;
        std::vector<int> f10 = make_folds(std::vector<int>(10, 1), flat);
        std::vector<int> sizes(3, 0);
        for (int v : f10) sizes[v]++;
        std::sort(sizes.begin(), sizes.end());
        CHECK(sizes == std::vector<int>({3, 3, 4}));
    }

    SUBCASE("too small classes are rejected") {
        std::vector<int> tiny(14, -1);
        for (int i = 0; i < 4; ++i) tiny[i] = 1;
        CVPlan five;
        five.k = 5;
        CHECK_FNET_ERROR(make_folds(tiny, five), Err::fold_too_small);
        CVPlan one;
        one.k = 1;
        CHECK_FNET_ERROR(make_folds(y, one), Err::invalid_k);
    }
}

namespace {

class ConstantPipeline : public Pipeline {
public:
    std::string name() const override { return "constant"; }
    std::unique_ptr<FittedPipeline> fit(const Matrix&, const std::vector<int>&,
                                        std::uint64_t) const override {
        class Fitted : public FittedPipeline {
        public:
            Vector score(const Matrix& X) const override { return Vector::Zero(X.rows()); }
        };
        return std::make_unique<Fitted>();
    }
};

// Records which sample ids (stored in column 0) each fold trains and scores
// on, so the harness's split discipline can be checked from outside.
class SplitProbePipeline : public Pipeline {
public:
    mutable std::vector<std::vector<int>> train_ids, test_ids;

    std::string name() const override { return "probe"; }
    std::unique_ptr<FittedPipeline> fit(const Matrix& X, const std::vector<int>&,
                                        std::uint64_t) const override {
        train_ids.emplace_back();
        for (int i = 0; i < X.rows(); ++i) train_ids.back().push_back(int(X(i, 0)));

        class Fitted : public FittedPipeline {
        public:
            explicit Fitted(std::vector<std::vector<int>>* sink) : sink_(sink) {}
            Vector score(const Matrix& X) const override {
                sink_->emplace_back();
                for (int i = 0; i < X.rows(); ++i) sink_->back().push_back(int(X(i, 0)));
                Vector s(X.rows());
                for (int i = 0; i < X.rows(); ++i) s[i] = X(i, 1);
                return s;
            }

        private:
            std::vector<std::vector<int>>* sink_;
        };
        return std::make_unique<Fitted>(&test_ids);
    }
};

class CentroidPipeline : public Pipeline {
public:
    std::string name() const override { return "centroid"; }
    std::unique_ptr<FittedPipeline> fit(const Matrix& X, const std::vector<int>& y,
                                        std::uint64_t) const override {
        Vector mu_pos = Vector::Zero(X.cols()), mu_neg = Vector::Zero(X.cols());
        int n_pos = 0, n_neg = 0;
        for (int i = 0; i < X.rows(); ++i) {
            if (y[std::size_t(i)] == 1) {
                mu_pos += X.row(i).transpose();
                n_pos++;
            } else {
                mu_neg += X.row(i).transpose();
                n_neg++;
            }
        }
        mu_pos /= double(n_pos);
        mu_neg /= double(n_neg);

        class Fitted : public FittedPipeline {
        public:
            Fitted(Vector p, Vector n) : pos_(std::move(p)), neg_(std::move(n)) {}
            Vector score(const Matrix& X) const override {
                Vector s(X.rows());
                for (int i = 0; i < X.rows(); ++i)
                    s[i] = (X.row(i).transpose() - neg_).squaredNorm() -
                           (X.row(i).transpose() - pos_).squaredNorm();
                return s;
            }

        private:
            Vector pos_, neg_;
        };
        return std::make_unique<Fitted>(mu_pos, mu_neg);
    }
};

}  // namespace

TEST_CASE("cross validation keeps train and test rows disjoint") {
    const int n = 40;
    Dataset data;
    data.X.resize(n, 2);
    data.y.resize(n);
    Rng rng(3);
    for (int i = 0; i < n; ++i) {
        data.X(i, 0) = double(i);
        data.X(i, 1) = rng.normal();
        data.y[i] = i % 2 == 0 ? 1 : -1;
    }

    SplitProbePipeline probe;
    CVPlan plan;
    plan.k = 4;
    plan.seed = 5;
    cross_validate(data, probe, plan);

    REQUIRE(probe.train_ids.size() == 4);
    REQUIRE(probe.test_ids.size() == 4);
    std::set<int> seen;
    for (int f = 0; f < 4; ++f) {
        std::set<int> train(probe.train_ids[f].begin(), probe.train_ids[f].end());
        std::set<int> test(probe.test_ids[f].begin(), probe.test_ids[f].end());
        CHECK(train.size() + test.size() == std::size_t(n));
        for (int id : test) {
            CHECK(train.count(id) == 0);
            CHECK(seen.count(id) == 0);
            seen.insert(id);
        }
    }
    CHECK(seen.size() == std::size_t(n));
}

TEST_CASE("cross validation metrics on known pipelines") {
    BlockSpec spec;
    spec.sizes_a = {4, 4};
    spec.shift = 2.0;
    PlantedData planted = planted_two_class(8, spec, 0.5, 40, 77);

    CVPlan plan;
    plan.k = 5;
    plan.seed = 1;

    MetricReport flat = cross_validate(planted.data, ConstantPipeline{}, plan);
    for (double v : flat.fold_balanced_accuracy) CHECK(v == 0.5);
    for (double v : flat.fold_auroc) CHECK(v == 0.5);
    CHECK(flat.mean_balanced_accuracy == 0.5);
    CHECK(flat.std_balanced_accuracy == 0.0);

    MetricReport learned = cross_validate(planted.data, CentroidPipeline{}, plan);
    CHECK(learned.mean_balanced_accuracy > 0.9);
    CHECK(learned.mean_auroc > 0.95);

    double mean = 0.0;
    for (double v : learned.fold_balanced_accuracy) mean += v;
    mean /= 5.0;
    CHECK(learned.mean_balanced_accuracy == doctest::Approx(mean).epsilon(1e-15));
    double ss = 0.0;
    for (double v : learned.fold_balanced_accuracy) ss += (v - mean) * (v - mean);
    CHECK(learned.std_balanced_accuracy == doctest::Approx(std::sqrt(ss / 4.0)).epsilon(1e-12));

    SUBCASE("report serialization") {
        std::ostringstream out;
        write_metric_report(out, learned);
        std::string text = out.str();
        CHECK(text.rfind("fold,balanced_accuracy,auroc\n", 0) == 0);
        CHECK(text.find("\nmean,") != std::string::npos);
        CHECK(text.find("\nstd,") != std::string::npos);
        int lines = int(std::count(text.begin(), text.end(), '\n'));
        CHECK(lines == 8);
    }
}

TEST_CASE("default exponent grid is symmetric and ordered") {
    const auto& grid = default_s_grid();
    REQUIRE(grid.size() == 11);
    CHECK(grid.front() == -2.0);
    CHECK(grid.back() == 2.0);
    CHECK(std::is_sorted(grid.begin(), grid.end()));
    for (double s : grid) CHECK(std::find(grid.begin(), grid.end(), -s) != grid.end());
}
