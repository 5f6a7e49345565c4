// Times the OpenMP kernels against the serial reference implementations and
// reports the largest relative output difference per kernel, so the benchmark doubles
// as an end-to-end consistency check. Exits nonzero if any kernel disagrees
// with its reference beyond tolerance.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "fnet/clustering.hpp"
#include "fnet/common.hpp"
#include "fnet/convtrain.hpp"
#include "fnet/hierarchy.hpp"
#include "fnet/laplacian.hpp"
#include "fnet/learners.hpp"
#include "fnet/network.hpp"
#include "fnet/reference.hpp"
#include "fnet/rng.hpp"

namespace {

using fnet::Matrix;
using fnet::Vector;

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

/// Best-of-`trials` wall time of fn, in milliseconds.
double time_best(int trials, const std::function<void()>& fn) {
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        const double t0 = now_ms();
        fn();
        const double elapsed = now_ms() - t0;
        if (t == 0 || elapsed < best) best = elapsed;
    }
    return best;
}

/// Largest elementwise deviation, scaled by the reference magnitude (unit
/// floor) so summation-order noise in large aggregates is judged fairly.
double rel_diff(const Matrix& ref, const Matrix& par) {
    return (ref - par).cwiseAbs().maxCoeff() / std::max(1.0, ref.cwiseAbs().maxCoeff());
}

Matrix random_matrix(int rows, int cols, fnet::Rng& rng) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

fnet::Partition random_partition(int p, int d, fnet::Rng& rng) {
    fnet::Partition c;
    c.p = p;
    c.d = d;
    c.assign.resize(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i)
        c.assign[static_cast<std::size_t>(i)] = (i < d) ? i : int(rng.integer(std::uint64_t(d)));
    rng.shuffle(c.assign);
    c.validate();
    return c;
}

struct Row {
    std::string kernel;
    std::string size;
    double serial_ms = 0.0;
    double parallel_ms = 0.0;
    double max_diff = 0.0;
};

void print_rows(const std::vector<Row>& rows) {
    std::printf("%-22s %-26s %12s %12s %9s %12s\n", "kernel", "size", "serial ms", "parallel ms",
                "speedup", "max rel diff");
    for (const Row& r : rows) {
        const double speedup = r.parallel_ms > 0.0 ? r.serial_ms / r.parallel_ms : 0.0;
        std::printf("%-22s %-26s %12.2f %12.2f %8.1fx %12.3e\n", r.kernel.c_str(),
                    r.size.c_str(), r.serial_ms, r.parallel_ms, speedup, r.max_diff);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Benchmark of the parallel kernels against the serial references"};
    double scale = 1.0;
    int trials = 3;
    int threads = 0;
    double tolerance = 1e-9;
    app.add_option("--scale", scale, "problem size multiplier")->check(CLI::PositiveNumber);
    app.add_option("--trials", trials, "timing repetitions, best is kept")
        ->check(CLI::PositiveNumber);
    app.add_option("--threads", threads, "OpenMP thread cap (0 = library default)");
    app.add_option("--tolerance", tolerance, "max allowed relative |parallel - serial|");
    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
    std::printf("openmp: %d threads\n", omp_get_max_threads());
#else
    (void)threads;
    std::printf("openmp: off (serial build)\n");
#endif

    const auto sized = [scale](int base) { return std::max(2, int(base * scale)); };
    fnet::Rng rng(20240913);
    std::vector<Row> rows;

    {
        const int n = sized(300), p = sized(800);
        const Matrix X = random_matrix(n, p, rng);
        Row row{"correlation network", "n=" + std::to_string(n) + " p=" + std::to_string(p)};
        Matrix ref, par;
        row.serial_ms =
            time_best(trials, [&] { ref = fnet::reference::correlation_weights(X, false); });
        row.parallel_ms =
            time_best(trials, [&] { par = fnet::correlation_network(X).W; });
        row.max_diff = rel_diff(ref, par);
        rows.push_back(row);
    }

    {
        const int p = sized(1200);
        const Matrix pts = random_matrix(p, 8, rng);
        fnet::DistanceMatrix D;
        D.p = p;
        D.D = Matrix::Zero(p, p);
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j)
                D.D(i, j) = D.D(j, i) = (pts.row(i) - pts.row(j)).norm();
        Row row{"gaussian kernel", "p=" + std::to_string(p)};
        Matrix ref, par;
        row.serial_ms =
            time_best(trials, [&] { ref = fnet::reference::gaussian_weights(D.D, 2.0); });
        row.parallel_ms =
            time_best(trials, [&] { par = fnet::gaussian_kernel_network(D, 2.0).W; });
        row.max_diff = rel_diff(ref, par);
        rows.push_back(row);
    }

    const int p_graph = sized(1000);
    fnet::FeatureNetwork graph;
    {
        const Matrix X = random_matrix(sized(250), p_graph, rng);
        graph = fnet::correlation_network(X);
    }

    {
        const int reps = sized(64);
        Matrix probes = random_matrix(reps, p_graph, rng);
        fnet::LaplacianOperator L = fnet::build_laplacian(graph, fnet::LaplacianKind::positive);
        Row row{"smoothness penalty",
                "p=" + std::to_string(p_graph) + " x" + std::to_string(reps)};
        Vector ref(reps), par(reps);
        row.serial_ms = time_best(trials, [&] {
            for (int r = 0; r < reps; ++r) {
                const Vector x = probes.row(r).transpose();
                ref[r] = fnet::reference::smoothness_edge_sum(graph.W, x);
            }
        });
        row.parallel_ms = time_best(trials, [&] {
            for (int r = 0; r < reps; ++r) {
                const Vector x = probes.row(r).transpose();
                par[r] = fnet::smoothness_penalty(L, x);
            }
        });
        row.max_diff = rel_diff(ref, par);
        rows.push_back(row);
    }

    {
        const int d = std::max(2, p_graph / 25);
        const fnet::Partition c = random_partition(p_graph, d, rng);
        Row row{"coarsen weights", "p=" + std::to_string(p_graph) + " d=" + std::to_string(d)};
        Matrix ref, par;
        row.serial_ms = time_best(
            trials, [&] { ref = fnet::reference::coarsen(graph.W, c.assign, c.d); });
        row.parallel_ms = time_best(trials, [&] { par = fnet::coarsen_weights(graph, c).W; });
        row.max_diff = rel_diff(ref, par);
        rows.push_back(row);
    }

    {
        const int d = std::max(2, p_graph / 25);
        const int reps = sized(48);
        const fnet::Partition c = random_partition(p_graph, d, rng);
        const Matrix probes = random_matrix(reps, p_graph, rng);
        Matrix W = graph.W.cwiseAbs();
        Row row{"subgraph penalties",
                "p=" + std::to_string(p_graph) + " d=" + std::to_string(d) + " x" +
                    std::to_string(reps)};
        Matrix ref(reps, d), par(reps, d);
        row.serial_ms = time_best(trials, [&] {
            for (int r = 0; r < reps; ++r) {
                const Vector f = probes.row(r).transpose();
                ref.row(r) =
                    fnet::reference::subgraph_smoothness(f, W, c.assign, c.d).transpose();
            }
        });
        row.parallel_ms = time_best(trials, [&] {
            for (int r = 0; r < reps; ++r) {
                const Vector f = probes.row(r).transpose();
                par.row(r) =
                    fnet::subgraph_penalties(f, W, c, fnet::SubgraphKind::standard).transpose();
            }
        });
        row.max_diff = rel_diff(ref, par);
        rows.push_back(row);
    }

    {
        const int p0 = sized(2048);
        const int batch = sized(192);
        std::vector<fnet::Partition> chain;
        int width = p0;
        fnet::Rng part_rng = rng.fork(7);
        for (int next = width / 8; next >= 1; next /= 8) {
            chain.push_back(random_partition(width, next, part_rng));
            width = next;
            if (next == 1) break;
        }
        std::vector<fnet::Activation> acts(chain.size(), fnet::Activation::sigmoid);
        acts.back() = fnet::Activation::identity;
        const fnet::MaskedConvNet net =
            fnet::make_conv_net(chain, acts, fnet::LossKind::squared, 99);
        std::vector<Matrix> weights, masks;
        std::vector<int> act_codes;
        for (const auto& layer : net.layers) {
            weights.push_back(layer.W);
            masks.push_back(layer.M);
            act_codes.push_back(layer.activation == fnet::Activation::sigmoid ? 1 : 0);
        }
        const Matrix inputs = random_matrix(batch, p0, rng);
        Row row{"masked forward",
                "p=" + std::to_string(p0) + " depth=" + std::to_string(int(chain.size())) +
                    " x" + std::to_string(batch)};
        Vector ref(batch), par(batch);
        row.serial_ms = time_best(trials, [&] {
            for (int r = 0; r < batch; ++r) {
                const Vector x = inputs.row(r).transpose();
                ref[r] = fnet::reference::masked_forward(weights, masks, act_codes, x).back()[0];
            }
        });
        row.parallel_ms = time_best(trials, [&] {
            for (int r = 0; r < batch; ++r) {
                const Vector x = inputs.row(r).transpose();
                par[r] = fnet::forward(net, x).back()[0];
            }
        });
        row.max_diff = rel_diff(ref, par);
        rows.push_back(row);
    }

    print_rows(rows);

    double worst = 0.0;
    for (const Row& r : rows) worst = std::max(worst, r.max_diff);
    if (worst > tolerance) {
        std::fprintf(stderr, "error: kernel disagreement %.3e exceeds tolerance %.3e\n", worst,
                     tolerance);
        return 1;
    }
    std::printf("all kernels agree with the serial references within %.1e\n", tolerance);
    return 0;
}
