#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "fnet/hierarchy.hpp"
#include "fnet/reference.hpp"
#include "fnet/rng.hpp"
#include "helpers.hpp"

using namespace fnet;

namespace {

Partition random_partition(Rng& rng, int p, int d) {
    Partition c;
    c.p = p;
    c.d = d;
    c.assign.resize(p);
    for (int j = 0; j < d; ++j) c.assign[j] = j;  // keep every cluster nonempty
    for (int i = d; i < p; ++i) c.assign[i] = static_cast<int>(rng.integer(d));
    std::vector<int> idx(p);
    for (int i = 0; i < p; ++i) idx[i] = c.assign[i];
    rng.shuffle(idx);
    c.assign = idx;
    return c;
}

}  // namespace

TEST_SUITE("hierarchy") {

TEST_CASE("coarsening with singleton clusters reproduces the input weights") {
    Rng rng(101);
    FeatureNetwork g = testutil::random_signed_network(rng, 6);
    Partition c{6, 6, {0, 1, 2, 3, 4, 5}};
    FeatureNetwork out = coarsen_weights(g, c);
    CHECK((out.W.array() == g.W.array()).all());
}

TEST_CASE("coarsening a uniform graph is a fixed point") {
    FeatureNetwork g = testutil::block_network({7}, 0.5, 0.0);
    Partition c{7, 3, {0, 0, 1, 1, 1, 2, 2}};
    FeatureNetwork out = coarsen_weights(g, c);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) CHECK(out.W(a, b) == (a == b ? 0.0 : 0.5));

    FeatureNetwork g3 = testutil::block_network({7}, 0.3, 0.0);
    FeatureNetwork out3 = coarsen_weights(g3, c);
    CHECK(out3.W(0, 1) == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("coarsening matches the double-loop oracle exactly") {
    Rng rng(102);
    for (int trial = 0; trial < 25; ++trial) {
        int p = 4 + static_cast<int>(rng.integer(9));
        int d = 2 + static_cast<int>(rng.integer(3));
        if (d > p) d = p;
        FeatureNetwork g = testutil::random_signed_network(rng, p);
        Partition c = random_partition(rng, p, d);
        FeatureNetwork out = coarsen_weights(g, c);
        Matrix ref = reference::coarsen(g.W, c.assign, d);
        CHECK((out.W.array() == ref.array()).all());
        out.validate();
    }
}

TEST_CASE("coarsening commutes with node relabeling") {
    Rng rng(103);
    const int p = 9;
    FeatureNetwork g = testutil::random_signed_network(rng, p);
    Partition c = random_partition(rng, p, 3);

    std::vector<int> perm = {4, 7, 0, 2, 8, 1, 6, 3, 5};
    FeatureNetwork gp;
    gp.p = p;
    gp.W = Matrix::Zero(p, p);
    Partition cp;
    cp.p = p;
    cp.d = 3;
    cp.assign.resize(p);
    for (int i = 0; i < p; ++i) {
        cp.assign[i] = c.assign[perm[i]];
        for (int j = 0; j < p; ++j) gp.W(i, j) = g.W(perm[i], perm[j]);
    }
    FeatureNetwork a = coarsen_weights(g, c);
    FeatureNetwork b = coarsen_weights(gp, cp);
    CHECK((a.W - b.W).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("coarsening rejects mismatched partitions") {
    Rng rng(104);
    FeatureNetwork g = testutil::random_signed_network(rng, 5);
    Partition c{4, 2, {0, 1, 0, 1}};
    CHECK_FNET_ERROR(coarsen_weights(g, c), Err::partition_mismatch);
}

TEST_CASE("hierarchy construction: layer sizes and invariants") {
    Rng rng(105);
    FeatureNetwork g = testutil::random_signed_network(rng, 20);
    ClustererSpec spec;
    spec.kind = ClustererKind::ward;
    HierarchicalNetwork h = build_hierarchy(g, {8, 3}, spec);
    CHECK(h.depth() == 2);
    CHECK(h.layers.size() == 3);
    CHECK(h.layers[0].p == 20);
    CHECK(h.layers[1].p == 8);
    CHECK(h.layers[2].p == 3);
    CHECK(h.sizes() == std::vector<int>{8, 3});
    for (const FeatureNetwork& layer : h.layers) layer.validate();
}

TEST_CASE("hierarchy with full-size first layer reproduces the base graph") {
    Rng rng(106);
    FeatureNetwork g = testutil::random_signed_network(rng, 7);
    ClustererSpec spec;
    HierarchicalNetwork h = build_hierarchy(g, {7}, spec);
    CHECK(h.layers[1].p == 7);
    Partition c = hard_view(h.partitions[0]);
    // singleton clusters up to labeling; coarse graph equals the base graph
    // after applying that labeling
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j)
            CHECK(h.layers[1].W(c.assign[i], c.assign[j]) == g.W(i, j));
}

TEST_CASE("hierarchy down to a single node") {
    FeatureNetwork g = testutil::block_network({4, 4}, 1.0, 0.2);
    ClustererSpec spec;
    HierarchicalNetwork h = build_hierarchy(g, {2, 1}, spec);
    CHECK(h.layers.back().p == 1);
    CHECK(h.layers.back().W(0, 0) == 0.0);
}

TEST_CASE("hierarchy size validation") {
    FeatureNetwork g = testutil::block_network({4, 4}, 1.0, 0.2);
    ClustererSpec spec;
    CHECK_FNET_ERROR(build_hierarchy(g, {}, spec), Err::invalid_sizes);
    CHECK_FNET_ERROR(build_hierarchy(g, {9}, spec), Err::invalid_sizes);
    CHECK_FNET_ERROR(build_hierarchy(g, {4, 4}, spec), Err::invalid_sizes);
    CHECK_FNET_ERROR(build_hierarchy(g, {3, 5}, spec), Err::invalid_sizes);
    CHECK_FNET_ERROR(build_hierarchy(g, {3, 0}, spec), Err::invalid_sizes);
}

TEST_CASE("spectral and fuzzy hierarchies recover planted blocks") {
    FeatureNetwork g = testutil::block_network({6, 6}, 1.0, 0.05);
    Partition want{12, 2, {0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1}};

    ClustererSpec spectral;
    spectral.kind = ClustererKind::spectral;
    spectral.seed = 7;
    HierarchicalNetwork hs = build_hierarchy(g, {2}, spectral);
    CHECK(hard_view(hs.partitions[0]).canonical().assign == want.canonical().assign);

    ClustererSpec fuzzy;
    fuzzy.kind = ClustererKind::fuzzy;
    fuzzy.seed = 7;
    HierarchicalNetwork hf = build_hierarchy(g, {2}, fuzzy);
    CHECK(std::holds_alternative<SoftPartition>(hf.partitions[0]));
    CHECK(hard_view(hf.partitions[0]).canonical().assign == want.canonical().assign);
}

TEST_CASE("hard pooling: hand case, constants, singletons") {
    Vector x(4);
    x << 1, 2, 3, 4;
    Partition c{4, 2, {0, 0, 1, 1}};
    Vector pooled = average_pool(x, LayerPartition(c));
    CHECK(pooled(0) == 1.5);
    CHECK(pooled(1) == 3.5);

    Vector constant = Vector::Constant(4, 2.75);
    Vector pc = average_pool(constant, LayerPartition(c));
    CHECK(pc(0) == 2.75);
    CHECK(pc(1) == 2.75);

    Partition singles{4, 4, {0, 1, 2, 3}};
    Vector ps = average_pool(x, LayerPartition(singles));
    CHECK((ps.array() == x.array()).all());

    Vector bad = Vector::Zero(3);
    CHECK_FNET_ERROR(average_pool(bad, LayerPartition(c)), Err::dimension_mismatch);
}

TEST_CASE("soft pooling: membership-weighted means") {
    SoftPartition sp;
    sp.p = 3;
    sp.d = 2;
    sp.U = Matrix(2, 3);
    sp.U << 1.0, 0.25, 0.0,
            0.0, 0.75, 1.0;
    sp.validate();
    Vector x(3);
    x << 2, 4, 6;
    Vector pooled = average_pool(x, LayerPartition(sp));
    CHECK(pooled(0) == doctest::Approx((2.0 + 0.25 * 4.0) / 1.25).epsilon(1e-15));
    CHECK(pooled(1) == doctest::Approx((0.75 * 4.0 + 6.0) / 1.75).epsilon(1e-15));

    Vector constant = Vector::Constant(3, -1.5);
    Vector pc = average_pool(constant, LayerPartition(sp));
    CHECK(pc(0) == doctest::Approx(-1.5).epsilon(1e-15));
    CHECK(pc(1) == doctest::Approx(-1.5).epsilon(1e-15));
}

TEST_CASE("pooling matches the straight-line oracle and is linear") {
    Rng rng(107);
    const int p = 10;
    Partition c = random_partition(rng, p, 4);
    Vector x(p), y(p);
    for (int i = 0; i < p; ++i) {
        x(i) = rng.normal();
        y(i) = rng.normal();
    }
    Vector got = average_pool(x, LayerPartition(c));
    Vector ref = reference::average_pool(x, c.assign, 4);
    CHECK((got.array() == ref.array()).all());

    Vector lhs = average_pool(Vector(2.0 * x - 3.0 * y), LayerPartition(c));
    Vector rhs = 2.0 * average_pool(x, LayerPartition(c)) -
                 3.0 * average_pool(y, LayerPartition(c));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("dataset pooling composes layer by layer") {
    Rng rng(108);
    FeatureNetwork g = testutil::random_signed_network(rng, 12);
    ClustererSpec spec;
    HierarchicalNetwork h = build_hierarchy(g, {5, 2}, spec);
    Matrix X = testutil::random_matrix(rng, 6, 12);

    Matrix d0 = pool_dataset(X, h, 0);
    CHECK((d0.array() == X.array()).all());

    Matrix d2 = pool_dataset(X, h, 2);
    REQUIRE(d2.cols() == 2);
    for (int i = 0; i < 6; ++i) {
        Vector v = X.row(i).transpose();
        v = average_pool(v, h.partitions[0]);
        v = average_pool(v, h.partitions[1]);
        CHECK((d2.row(i).transpose().array() == v.array()).all());
    }
    CHECK_FNET_ERROR(pool_dataset(X, h, 3), Err::invalid_k);
}

TEST_CASE("pooling white noise divides variance by cluster size") {
    const int p = 8;
    Partition c{p, 2, {0, 0, 0, 0, 1, 1, 1, 1}};
    Rng rng(109);
    const int draws = 10000;
    double mean0 = 0.0, m2_0 = 0.0;
    for (int t = 1; t <= draws; ++t) {
        Vector x(p);
        for (int i = 0; i < p; ++i) x(i) = rng.normal();
        double v = average_pool(x, LayerPartition(c))(0);
        double delta = v - mean0;
        mean0 += delta / t;
        m2_0 += delta * (v - mean0);
    }
    double var = m2_0 / (draws - 1);
    CHECK(var == doctest::Approx(1.0 / 4.0).epsilon(0.10));
}

TEST_CASE("hierarchy directory round-trip") {
    Rng rng(110);
    FeatureNetwork g = testutil::block_network({6, 6}, 1.0, 0.1);
    ClustererSpec spec;
    spec.kind = ClustererKind::fuzzy;
    spec.seed = 3;
    HierarchicalNetwork h = build_hierarchy(g, {2}, spec);

    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "fnet_hierarchy_roundtrip";
    fs::remove_all(dir);
    save_hierarchy(h, dir.string());
    HierarchicalNetwork back = load_hierarchy(dir.string());

    REQUIRE(back.layers.size() == h.layers.size());
    for (std::size_t k = 0; k < h.layers.size(); ++k)
        CHECK((back.layers[k].W.array() == h.layers[k].W.array()).all());
    REQUIRE(back.partitions.size() == 1);
    CHECK(std::holds_alternative<SoftPartition>(back.partitions[0]));
    const Matrix& u0 = std::get<SoftPartition>(h.partitions[0]).U;
    const Matrix& u1 = std::get<SoftPartition>(back.partitions[0]).U;
    CHECK((u0.array() == u1.array()).all());
    fs::remove_all(dir);

    ClustererSpec ward;
    HierarchicalNetwork hw = build_hierarchy(g, {4, 2}, ward);
    fs::path dir2 = fs::temp_directory_path() / "fnet_hierarchy_roundtrip_hard";
    fs::remove_all(dir2);
    save_hierarchy(hw, dir2.string());
    HierarchicalNetwork backw = load_hierarchy(dir2.string());
    for (int k = 0; k < 2; ++k)
        CHECK(hard_view(backw.partitions[k]).assign == hard_view(hw.partitions[k]).assign);
    fs::remove_all(dir2);
}

}  // TEST_SUITE
