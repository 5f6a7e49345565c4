#include "fnet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "fnet/csv.hpp"
#include "fnet/rng.hpp"

namespace fnet {

double balanced_accuracy(const std::vector<int>& pred, const std::vector<int>& y) {
    require(pred.size() == y.size(), Err::dimension_mismatch,
            "prediction and label counts differ");
    long tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        require(y[i] == 1 || y[i] == -1, Err::label_mismatch, "labels must be +1 or -1");
        require(pred[i] == 1 || pred[i] == -1, Err::label_mismatch,
                "predictions must be +1 or -1");
        if (y[i] == 1) {
            (pred[i] == 1 ? tp : fn)++;
        } else {
            (pred[i] == -1 ? tn : fp)++;
        }
    }
    require(tp + fn > 0 && tn + fp > 0, Err::single_class,
            "balanced accuracy needs both classes present");
    double sens = double(tp) / double(tp + fn);
    double spec = double(tn) / double(tn + fp);
    return 0.5 * (sens + spec);
}

double auroc(const Vector& scores, const std::vector<int>& y) {
    const int n = int(scores.size());
    require(std::size_t(n) == y.size(), Err::dimension_mismatch,
            "score and label counts differ");
    check_finite(scores, "scores");
    long n_pos = 0, n_neg = 0;
    for (int label : y) {
        require(label == 1 || label == -1, Err::label_mismatch, "labels must be +1 or -1");
        (label == 1 ? n_pos : n_neg)++;
    }
    require(n_pos > 0 && n_neg > 0, Err::single_class, "auroc needs both classes present");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return scores[a] < scores[b]; });

    // Midranks: tied scores all receive the mean of the ranks they occupy.
    double rank_sum_pos = 0.0;
    int i = 0;
    while (i < n) {
        int j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        double midrank = 0.5 * double(i + 1 + j);
        for (int t = i; t < j; ++t) {
            if (y[order[t]] == 1) rank_sum_pos += midrank;
        }
        i = j;
    }
    double u = rank_sum_pos - 0.5 * double(n_pos) * double(n_pos + 1);
    return u / (double(n_pos) * double(n_neg));
}

std::vector<int> make_folds(const std::vector<int>& y, const CVPlan& plan) {
    const int n = int(y.size());
    require(plan.k >= 2, Err::invalid_k, "cross-validation needs at least 2 folds");
    std::vector<int> fold(n, -1);
    Rng rng(plan.seed);
    if (plan.stratified) {
        std::vector<int> pos, neg;
        for (int i = 0; i < n; ++i) {
            require(y[i] == 1 || y[i] == -1, Err::label_mismatch, "labels must be +1 or -1");
            (y[i] == 1 ? pos : neg).push_back(i);
        }
        require(int(pos.size()) >= plan.k && int(neg.size()) >= plan.k, Err::fold_too_small,
                "each class needs at least one sample per fold");
        int next = 0;
        for (auto* cls : {&pos, &neg}) {
            rng.shuffle(*cls);
            for (int idx : *cls) fold[idx] = (next++) % plan.k;
        }
    } else {
        require(n >= plan.k, Err::fold_too_small, "fewer samples than folds");
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        for (int i = 0; i < n; ++i) fold[order[i]] = i % plan.k;
    }
    return fold;
}

namespace {

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(ss / double(v.size() - 1)) : 0.0;
}

}  // namespace

void write_metric_report(std::ostream& out, const MetricReport& r) {
    out << "fold,balanced_accuracy,auroc\n";
    for (std::size_t i = 0; i < r.fold_balanced_accuracy.size(); ++i) {
        out << i << ',' << csv::format_double(r.fold_balanced_accuracy[i]) << ','
            << csv::format_double(r.fold_auroc[i]) << '\n';
    }
    out << "mean," << csv::format_double(r.mean_balanced_accuracy) << ','
        << csv::format_double(r.mean_auroc) << '\n';
    out << "std," << csv::format_double(r.std_balanced_accuracy) << ','
        << csv::format_double(r.std_auroc) << '\n';
}

MetricReport cross_validate(const Dataset& data, const Pipeline& pipeline, const CVPlan& plan) {
    data.validate();
    const int n = data.n();
    std::vector<int> fold = make_folds(data.y, plan);

    MetricReport report;
    for (int f = 0; f < plan.k; ++f) {
        std::vector<int> train_rows, test_rows;
        for (int i = 0; i < n; ++i) (fold[i] == f ? test_rows : train_rows).push_back(i);

        Matrix x_train(train_rows.size(), data.p()), x_test(test_rows.size(), data.p());
        std::vector<int> y_train(train_rows.size()), y_test(test_rows.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i) {
            x_train.row(Eigen::Index(i)) = data.X.row(train_rows[i]);
            y_train[i] = data.y[train_rows[i]];
        }
        for (std::size_t i = 0; i < test_rows.size(); ++i) {
            x_test.row(Eigen::Index(i)) = data.X.row(test_rows[i]);
            y_test[i] = data.y[test_rows[i]];
        }

        Rng fold_seed(plan.seed);
        auto fitted = pipeline.fit(x_train, y_train, fold_seed.fork(std::uint64_t(f)).seed());
        Vector scores = fitted->score(x_test);
        require(scores.size() == Eigen::Index(test_rows.size()), Err::dimension_mismatch,
                "pipeline returned wrong number of scores");

        std::vector<int> pred(test_rows.size());
        for (std::size_t i = 0; i < test_rows.size(); ++i) pred[i] = scores[Eigen::Index(i)] > 0.0 ? 1 : -1;

        report.fold_balanced_accuracy.push_back(balanced_accuracy(pred, y_test));
        report.fold_auroc.push_back(auroc(scores, y_test));
    }
    mean_std(report.fold_balanced_accuracy, report.mean_balanced_accuracy,
             report.std_balanced_accuracy);
    mean_std(report.fold_auroc, report.mean_auroc, report.std_auroc);
    return report;
}

const std::vector<double>& default_s_grid() {
    static const std::vector<double> grid = {-2.0, -1.5, -1.0, -0.5, -0.25, 0.0,
                                             0.25, 0.5,  1.0,  1.5,  2.0};
    return grid;
}

bool grid_point_preferred(double mean_a, double s_a, double mean_b, double s_b) {
    if (mean_a != mean_b) return mean_a > mean_b;
    if (std::abs(s_a) != std::abs(s_b)) return std::abs(s_a) < std::abs(s_b);
    return s_a < s_b;
}

}  // namespace fnet
