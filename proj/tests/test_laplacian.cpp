#include <cmath>

#include "doctest.h"
#include "fnet/laplacian.hpp"
#include "fnet/reference.hpp"
#include "fnet/rng.hpp"
#include "helpers.hpp"

using namespace fnet;

namespace {

FeatureNetwork two_node(double w) {
    FeatureNetwork g;
    g.p = 2;
    g.W = Matrix::Zero(2, 2);
    g.W(0, 1) = w;
    g.W(1, 0) = w;
    return g;
}

}  // namespace

TEST_SUITE("laplacian") {

TEST_CASE("two-node standard Laplacian is the textbook matrix") {
    LaplacianOperator L = build_laplacian(two_node(1.0), LaplacianKind::standard);
    Matrix expect(2, 2);
    expect << 1, -1, -1, 1;
    CHECK((L.matrix() - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-node negative edge under the positive kind") {
    LaplacianOperator L = build_laplacian(two_node(-1.0), LaplacianKind::positive);
    Matrix expect(2, 2);
    expect << 1, 1, 1, 1;
    CHECK((L.matrix() - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("standard and positive kinds coincide on nonnegative weights") {
    FeatureNetwork g = testutil::block_network({3, 4}, 1.0, 0.2);
    LaplacianOperator a = build_laplacian(g, LaplacianKind::standard);
    LaplacianOperator b = build_laplacian(g, LaplacianKind::positive);
    CHECK((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("smoothness penalty: constant vector on nonnegative weights is zero") {
    FeatureNetwork g = testutil::block_network({4, 4}, 0.8, 0.1);
    LaplacianOperator L = build_laplacian(g, LaplacianKind::positive);
    Vector x = Vector::Constant(8, 3.25);
    CHECK(std::fabs(smoothness_penalty(L, x)) <= 1e-12);
}

TEST_CASE("smoothness penalty: opposite signs cancel on a negative edge") {
    LaplacianOperator L = build_laplacian(two_node(-1.0), LaplacianKind::positive);
    Vector x(2);
    x << 1, -1;
    CHECK(std::fabs(smoothness_penalty(L, x)) <= 1e-12);
}

TEST_CASE("smoothness penalty matches the two-term edge sum on random signed graphs") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        int p = 2 + static_cast<int>(rng.integer(11));
        FeatureNetwork g = testutil::random_signed_network(rng, p);
        LaplacianOperator L = build_laplacian(g, LaplacianKind::positive);
        Vector x(p);
        for (int i = 0; i < p; ++i) x(i) = rng.normal();
        double got = smoothness_penalty(L, x);
        double want = reference::smoothness_edge_sum(g.W, x);
        CHECK(std::fabs(got - want) <= 1e-10 * std::max(1.0, std::fabs(want)));
        CHECK(got >= -1e-10);
    }
}

TEST_CASE("positive Laplacian is positive semidefinite on random signed graphs") {
    Rng rng(5);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        int p = 2 + static_cast<int>(rng.integer(19));
        FeatureNetwork g = testutil::random_signed_network(rng, p);
        LaplacianOperator L = build_laplacian(g, LaplacianKind::positive);
        worst = std::min(worst, eigendecompose(L).values.minCoeff());
    }
    CHECK(worst >= -1e-8);
}

TEST_CASE("dimension mismatch is rejected") {
    LaplacianOperator L = build_laplacian(two_node(1.0), LaplacianKind::standard);
    Vector x = Vector::Zero(3);
    CHECK_FNET_ERROR(smoothness_penalty(L, x), Err::dimension_mismatch);
    CHECK_FNET_ERROR(laplacian_power_transform(L, x, 1.0, 0.0), Err::dimension_mismatch);
}

TEST_CASE("eigendecomposition: pinned spectra and reconstruction bounds") {
    FeatureNetwork none;
    none.p = 3;
    none.W = Matrix::Zero(3, 3);
    LaplacianOperator zero = build_laplacian(none, LaplacianKind::standard);
    const Eigendecomposition& ez = eigendecompose(zero);
    CHECK(ez.values.cwiseAbs().maxCoeff() == 0.0);
    Matrix rz = ez.vectors * ez.values.asDiagonal() * ez.vectors.transpose();
    CHECK(rz.cwiseAbs().maxCoeff() <= 1e-12);

    // diagonal operator: pass a diagonal matrix straight through
    Matrix d = Vector::LinSpaced(3, 1.0, 3.0).asDiagonal();
    LaplacianOperator diag(LaplacianKind::standard, d);
    const Eigendecomposition& ed = eigendecompose(diag);
    CHECK(ed.values(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ed.values(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(ed.values(2) == doctest::Approx(3.0).epsilon(1e-12));

    Rng rng(33);
    FeatureNetwork g = testutil::random_signed_network(rng, 8);
    LaplacianOperator L = build_laplacian(g, LaplacianKind::positive);
    const Eigendecomposition& e = eigendecompose(L);
    for (int i = 1; i < 8; ++i) CHECK(e.values(i) >= e.values(i - 1));
    Matrix vtv = e.vectors.transpose() * e.vectors;
    CHECK((vtv - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-8);
    Matrix rec = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    CHECK((rec - L.matrix()).cwiseAbs().maxCoeff() <=
          1e-7 * L.matrix().cwiseAbs().maxCoeff());
}

TEST_CASE("power transform: zero power is the exact identity") {
    Rng rng(8);
    FeatureNetwork g = testutil::random_signed_network(rng, 6);
    LaplacianOperator L = build_laplacian(g, LaplacianKind::positive);
    Vector x(6);
    for (int i = 0; i < 6; ++i) x(i) = rng.normal();
    Vector y = laplacian_power_transform(L, x, 0.0, 0.0);
    CHECK((y.array() == x.array()).all());
}

TEST_CASE("power transform: first power is a plain multiply") {
    Rng rng(9);
    FeatureNetwork g = testutil::random_signed_network(rng, 7);
    LaplacianOperator L = build_laplacian(g, LaplacianKind::positive);
    Vector x(7);
    for (int i = 0; i < 7; ++i) x(i) = rng.normal();
    Vector y = laplacian_power_transform(L, x, 1.0, 0.0);
    Vector want = L.matrix() * x;
    CHECK((y - want).norm() <= 1e-8 * std::max(1.0, want.norm()));
}

TEST_CASE("power transform: half powers compose to the first power") {
    Rng rng(10);
    FeatureNetwork g = testutil::random_signed_network(rng, 9);
    LaplacianOperator L = build_laplacian(g, LaplacianKind::positive);
    Vector x(9);
    for (int i = 0; i < 9; ++i) x(i) = rng.normal();
    Vector twice = laplacian_power_transform(
        L, laplacian_power_transform(L, x, 0.5, 0.0), 0.5, 0.0);
    Vector once = laplacian_power_transform(L, x, 1.0, 0.0);
    CHECK((twice - once).norm() <= 1e-6 * std::max(1.0, once.norm()));
}

TEST_CASE("power transform is linear in its argument") {
    Rng rng(12);
    FeatureNetwork g = testutil::random_signed_network(rng, 8);
    LaplacianOperator L = build_laplacian(g, LaplacianKind::positive);
    Vector x(8), y(8);
    for (int i = 0; i < 8; ++i) {
        x(i) = rng.normal();
        y(i) = rng.normal();
    }
    double a = 2.5, b = -0.75;
    double eps = default_power_shift(L);
    for (double s : {-1.0, 0.5, 2.0}) {
        Vector lhs = laplacian_power_transform(L, a * x + b * y, s, eps);
        Vector rhs = a * laplacian_power_transform(L, x, s, eps) +
                     b * laplacian_power_transform(L, y, s, eps);
        CHECK((lhs - rhs).norm() <= 1e-8 * std::max(1.0, rhs.norm()));
    }
}

TEST_CASE("power transform: constant vectors are annihilated on connected graphs") {
    FeatureNetwork g = testutil::block_network({4, 4}, 1.0, 0.3);
    LaplacianOperator L = build_laplacian(g, LaplacianKind::positive);
    Vector ones = Vector::Constant(8, 1.0);
    for (double s : {1.0, 1.5, 2.0})
        CHECK(laplacian_power_transform(L, ones, s, 0.0).norm() <= 1e-8);
}

TEST_CASE("negative powers require a shift on singular operators") {
    FeatureNetwork g = testutil::block_network({3, 3}, 1.0, 0.1);
    LaplacianOperator L = build_laplacian(g, LaplacianKind::positive);
    Vector x(6);
    x << 1, -2, 0.5, 3, -1, 0.25;
    CHECK_FNET_ERROR(laplacian_power_transform(L, x, -1.0, 0.0),
                     Err::negative_power_without_shift);
    double eps = default_power_shift(L);
    CHECK(eps > 0.0);
    Vector y = laplacian_power_transform(L, x, -1.0, eps);
    for (int i = 0; i < 6; ++i) CHECK(std::isfinite(y(i)));
}

TEST_CASE("default shift is a thousandth of the mean eigenvalue") {
    Rng rng(14);
    FeatureNetwork g = testutil::random_signed_network(rng, 5);
    LaplacianOperator L = build_laplacian(g, LaplacianKind::positive);
    const Eigendecomposition& e = eigendecompose(L);
    CHECK(default_power_shift(L) ==
          doctest::Approx(1e-3 * e.values.sum() / 5.0).epsilon(1e-12));
}

TEST_CASE("row-wise transform agrees with the vector transform exactly") {
    Rng rng(15);
    FeatureNetwork g = testutil::random_signed_network(rng, 6);
    LaplacianOperator L = build_laplacian(g, LaplacianKind::positive);
    Matrix X = testutil::random_matrix(rng, 5, 6);
    double eps = default_power_shift(L);
    Matrix Y = laplacian_power_transform_rows(L, X, -0.5, eps);
    for (int r = 0; r < 5; ++r) {
        Vector row = X.row(r).transpose();
        Vector want = laplacian_power_transform(L, row, -0.5, eps);
        CHECK((Y.row(r).transpose().array() == want.array()).all());
    }
}

}  // TEST_SUITE
