#include <sstream>
#include <vector>

#include "doctest.h"
#include "fnet/datasim.hpp"
#include "fnet/model_io.hpp"
#include "fnet/rng.hpp"
#include "helpers.hpp"

using namespace fnet;

namespace {

Matrix two_cluster_points(Rng& rng, int n_per_class) {
    Matrix X(2 * n_per_class, 3);
    for (int i = 0; i < 2 * n_per_class; ++i) {
        const double center = i < n_per_class ? 1.5 : -1.5;
        for (int j = 0; j < 3; ++j) X(i, j) = center + 0.5 * rng.normal();
    }
    return X;
}

std::vector<int> two_cluster_labels(int n_per_class) {
    std::vector<int> y(std::size_t(2 * n_per_class), -1);
    for (int i = 0; i < n_per_class; ++i) y[std::size_t(i)] = 1;
    return y;
}

}  // namespace

TEST_CASE("margin model round-trips bitwise") {
    Rng rng(307);
    Matrix X = two_cluster_points(rng, 10);
    std::vector<int> y = two_cluster_labels(10);

    for (int use_rbf = 0; use_rbf < 2; ++use_rbf) {
        KernelSpec kernel = LinearKernel{};
        if (use_rbf) kernel = RbfKernel{0.3};
        MarginModel m = train_margin(X, y, kernel);

        std::stringstream buf;
        save_model(buf, m);
        MarginModel back = load_margin_model(buf);

        CHECK(back.bias == m.bias);
        CHECK(back.box_c == m.box_c);
        CHECK(back.dual_objective == m.dual_objective);
        CHECK((back.alphas.array() == m.alphas.array()).all());
        CHECK((back.support_points.array() == m.support_points.array()).all());
        CHECK(std::holds_alternative<RbfKernel>(back.kernel) == bool(use_rbf));
        if (use_rbf)
            CHECK(std::get<RbfKernel>(back.kernel).gamma == std::get<RbfKernel>(m.kernel).gamma);

        Matrix probe = testutil::random_matrix(rng, 6, 3);
        CHECK((decision_many(back, probe).array() == decision_many(m, probe).array()).all());
    }
}

TEST_CASE("platt calibrator round-trips bitwise") {
    PlattCalibrator c;
    c.a = -1.2345678901234567;
    c.b = 0.000123456789;
    std::stringstream buf;
    save_model(buf, c);
    PlattCalibrator back = load_platt_calibrator(buf);
    CHECK(back.a == c.a);
    CHECK(back.b == c.b);
    CHECK(back.prob(0.7) == c.prob(0.7));
}

TEST_CASE("smoothness classifier round-trips bitwise") {
    BlockSpec spec;
    spec.sizes_a = {4, 4};
    spec.sizes_b = {2, 6};
    spec.shift = 0.0;
    PlantedData planted = planted_two_class(8, spec, 0.4, 30, 311);
    Matrix x_a = planted.data.X.topRows(30);
    Matrix x_b = planted.data.X.bottomRows(30);
    SmoothnessClassifier m = smoothness_train(x_a, x_b);

    std::stringstream buf;
    save_model(buf, m);
    SmoothnessClassifier back = load_smoothness_classifier(buf);

    CHECK(back.penalty_a.kind() == m.penalty_a.kind());
    CHECK((back.penalty_a.matrix().array() == m.penalty_a.matrix().array()).all());
    CHECK((back.penalty_b.matrix().array() == m.penalty_b.matrix().array()).all());
    CHECK((back.feature_mean.array() == m.feature_mean.array()).all());
    CHECK((back.feature_sd.array() == m.feature_sd.array()).all());

    Rng rng(313);
    for (int t = 0; t < 5; ++t) {
        Vector probe(8);
        for (int j = 0; j < 8; ++j) probe[j] = rng.normal();
        CHECK(decision(back, probe) == decision(m, probe));
        CHECK(classify(back, probe) == classify(m, probe));
    }
}

TEST_CASE("conv net round-trips bitwise") {
    Partition c1;
    c1.p = 6;
    c1.d = 2;
    c1.assign = {0, 0, 0, 1, 1, 1};
    Partition c2;
    c2.p = 2;
    c2.d = 1;
    c2.assign = {0, 0};
    MaskedConvNet net = make_conv_net({c1, c2}, {Activation::sigmoid, Activation::identity},
                                      LossKind::logistic, 317);

    std::stringstream buf;
    save_model(buf, net);
    MaskedConvNet back = load_conv_net(buf);

    CHECK(back.loss == net.loss);
    REQUIRE(back.layers.size() == net.layers.size());
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        CHECK(back.layers[k].activation == net.layers[k].activation);
        CHECK((back.layers[k].W.array() == net.layers[k].W.array()).all());
        CHECK((back.layers[k].M.array() == net.layers[k].M.array()).all());
    }

    Rng rng(331);
    Vector x(6);
    for (int j = 0; j < 6; ++j) x[j] = rng.normal();
    CHECK(forward(back, x).back()[0] == forward(net, x).back()[0]);
}

TEST_CASE("model loading is strict") {
    Rng rng(337);
    Matrix X = two_cluster_points(rng, 5);
    std::vector<int> y = two_cluster_labels(5);
    MarginModel m = train_margin(X, y, LinearKernel{});

    std::stringstream good;
    save_model(good, m);
    const std::string text = good.str();

    SUBCASE("bad header") {
        std::stringstream in("fnet-model v9\ntype margin\nend\n");
        CHECK_FNET_ERROR(load_margin_model(in), Err::parse_error);
    }
    SUBCASE("wrong type") {
        std::stringstream in(text);
        CHECK_FNET_ERROR(load_platt_calibrator(in), Err::parse_error);
    }
    SUBCASE("missing end") {
        std::stringstream in(text.substr(0, text.size() - 4));
        CHECK_FNET_ERROR(load_margin_model(in), Err::parse_error);
    }
    SUBCASE("unknown field") {
        std::string extra = text;
        extra.insert(extra.size() - 4, "flux_capacitance 1.21\n");
        std::stringstream in(extra);
        CHECK_FNET_ERROR(load_margin_model(in), Err::parse_error);
    }
    SUBCASE("missing field") {
        std::string broken;
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line))
            if (line.rfind("bias", 0) != 0) broken += line + "\n";
        std::stringstream in(broken);
        CHECK_FNET_ERROR(load_margin_model(in), Err::parse_error);
    }
    SUBCASE("duplicate field") {
        std::string extra = text;
        extra.insert(extra.size() - 4, "bias 0\n");
        std::stringstream in(extra);
        CHECK_FNET_ERROR(load_margin_model(in), Err::parse_error);
    }
    SUBCASE("wrong value count") {
        std::string broken;
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            if (line.rfind("alphas", 0) == 0) line += " 0.25";
            broken += line + "\n";
        }
        std::stringstream in(broken);
        CHECK_FNET_ERROR(load_margin_model(in), Err::parse_error);
    }
    SUBCASE("corrupt mask fails network validation") {
        Partition c;
        c.p = 2;
        c.d = 1;
        c.assign = {0, 0};
        MaskedConvNet net = make_conv_net({c}, {Activation::identity}, LossKind::squared, 1);
        std::stringstream buf;
        save_model(buf, net);
        std::string broken;
        std::string line;
        while (std::getline(buf, line)) {
            if (line.rfind("layer0.mask", 0) == 0) line = "layer0.mask 1 2";
            broken += line + "\n";
        }
        std::stringstream in(broken);
        CHECK_FNET_ERROR(load_conv_net(in), Err::config_error);
    }
}

TEST_CASE("model files survive the disk round trip") {
    Rng rng(347);
    Matrix X = two_cluster_points(rng, 6);
    std::vector<int> y = two_cluster_labels(6);
    MarginModel m = train_margin(X, y, RbfKernel{0.4});

    const std::string path = "margin_roundtrip_test.model";
    save_model_file(path, m);
    MarginModel back = load_margin_model_file(path);
    CHECK((back.alphas.array() == m.alphas.array()).all());
    CHECK(back.bias == m.bias);
    std::remove(path.c_str());

    CHECK_FNET_ERROR(load_margin_model_file("no_such_model_file.model"), Err::io_error);
}
