#include "fnet/model_io.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "fnet/csv.hpp"

namespace fnet {

namespace {

constexpr const char* kHeader = "fnet-model v1";

void put(std::ostream& out, const std::string& name, double v) {
    out << name << " " << csv::format_double(v) << "\n";
}

void put(std::ostream& out, const std::string& name, const std::string& v) {
    out << name << " " << v << "\n";
}

void put(std::ostream& out, const std::string& name, long v) { out << name << " " << v << "\n"; }

void put_values(std::ostream& out, const std::string& name, const double* v, long count) {
    out << name;
    for (long i = 0; i < count; ++i) out << " " << csv::format_double(v[i]);
    out << "\n";
}

void put_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
    out << name;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << " " << csv::format_double(m(i, j));
    out << "\n";
}

/// Fields of one model block, each a whitespace-split token list. Reading a
/// field consumes it so leftovers can be rejected at the end.
class FieldReader {
public:
    FieldReader(std::istream& in, const std::string& expected_type) {
        std::string line;
        require(static_cast<bool>(std::getline(in, line)), Err::parse_error,
                "empty model stream");
        strip_cr(line);
        require(line == kHeader, Err::parse_error,
                "bad model header; expected '" + std::string(kHeader) + "'");

        bool closed = false;
        long line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            strip_cr(line);
            if (line == "end") {
                closed = true;
                break;
            }
            if (line.empty()) continue;
            std::istringstream row(line);
            std::string name;
            row >> name;
            std::vector<std::string> values;
            std::string tok;
            while (row >> tok) values.push_back(tok);
            require(!fields_.count(name), Err::parse_error,
                    "line " + std::to_string(line_no) + ": duplicate field " + name);
            fields_.emplace(std::move(name), std::move(values));
        }
        require(closed, Err::parse_error, "model block not closed by 'end'");
        require(text("type") == expected_type, Err::parse_error,
                "model type is not " + expected_type);
    }

    std::string text(const std::string& name) {
        const auto values = take(name);
        require(values.size() == 1, Err::parse_error, "field " + name + " wants one value");
        return values[0];
    }

    double number(const std::string& name) { return to_double(text(name), name); }

    long count(const std::string& name) {
        const std::string v = text(name);
        char* end = nullptr;
        const long n = std::strtol(v.c_str(), &end, 10);
        require(end && *end == '\0', Err::parse_error, "field " + name + ": not an integer");
        require(n >= 0, Err::parse_error, "field " + name + ": negative count");
        return n;
    }

    Vector vector(const std::string& name, long expected) {
        const auto values = take(name);
        require(long(values.size()) == expected, Err::parse_error,
                "field " + name + " wants " + std::to_string(expected) + " values");
        Vector out(expected);
        for (long i = 0; i < expected; ++i) out[i] = to_double(values[std::size_t(i)], name);
        return out;
    }

    Matrix matrix(const std::string& name, long rows, long cols) {
        const Vector flat = vector(name, rows * cols);
        Matrix out(rows, cols);
        for (long i = 0; i < rows; ++i)
            for (long j = 0; j < cols; ++j) out(i, j) = flat[i * cols + j];
        return out;
    }

    void finish() const {
        if (fields_.empty()) return;
        fail(Err::parse_error, "unknown field: " + fields_.begin()->first);
    }

private:
    static void strip_cr(std::string& line) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
    }

    std::vector<std::string> take(const std::string& name) {
        auto it = fields_.find(name);
        require(it != fields_.end(), Err::parse_error, "missing field: " + name);
        std::vector<std::string> values = std::move(it->second);
        fields_.erase(it);
        return values;
    }

    static double to_double(const std::string& v, const std::string& name) {
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        require(end && *end == '\0', Err::parse_error, "field " + name + ": not a number");
        return x;
    }

    std::map<std::string, std::vector<std::string>> fields_;
};

void write_margin_body(std::ostream& out, const std::string& prefix, const MarginModel& m) {
    if (std::holds_alternative<RbfKernel>(m.kernel)) {
        put(out, prefix + "kernel", std::string("rbf"));
        put(out, prefix + "gamma", std::get<RbfKernel>(m.kernel).gamma);
    } else {
        put(out, prefix + "kernel", std::string("linear"));
    }
    put(out, prefix + "bias", m.bias);
    put(out, prefix + "box_c", m.box_c);
    put(out, prefix + "dual_objective", m.dual_objective);
    put(out, prefix + "support_count", long(m.support_points.rows()));
    put(out, prefix + "dim", long(m.support_points.cols()));
    put_values(out, prefix + "alphas", m.alphas.data(), m.alphas.size());
    put_matrix(out, prefix + "support_points", m.support_points);
}

MarginModel read_margin_body(FieldReader& r, const std::string& prefix) {
    MarginModel m;
    const std::string kernel = r.text(prefix + "kernel");
    if (kernel == "rbf") {
        RbfKernel k;
        k.gamma = r.number(prefix + "gamma");
        require(k.gamma > 0.0, Err::parse_error, "rbf gamma must be positive");
        m.kernel = k;
    } else {
        require(kernel == "linear", Err::parse_error, "unknown kernel: " + kernel);
        m.kernel = LinearKernel{};
    }
    m.bias = r.number(prefix + "bias");
    m.box_c = r.number(prefix + "box_c");
    require(m.box_c > 0.0, Err::parse_error, "box_c must be positive");
    m.dual_objective = r.number(prefix + "dual_objective");
    const long n = r.count(prefix + "support_count");
    const long p = r.count(prefix + "dim");
    m.alphas = r.vector(prefix + "alphas", n);
    m.support_points = r.matrix(prefix + "support_points", n, p);
    check_finite(m.alphas, "alphas");
    check_finite(m.support_points, "support points");
    return m;
}

LaplacianKind kind_from_text(const std::string& v) {
    if (v == "standard") return LaplacianKind::standard;
    require(v == "positive", Err::parse_error, "unknown laplacian kind: " + v);
    return LaplacianKind::positive;
}

const char* kind_text(LaplacianKind k) {
    return k == LaplacianKind::standard ? "standard" : "positive";
}

}  // namespace

void save_model(std::ostream& out, const MarginModel& m) {
    out << kHeader << "\n";
    put(out, "type", std::string("margin"));
    write_margin_body(out, "", m);
    out << "end\n";
}

MarginModel load_margin_model(std::istream& in) {
    FieldReader r(in, "margin");
    MarginModel m = read_margin_body(r, "");
    r.finish();
    return m;
}

void save_model(std::ostream& out, const PlattCalibrator& c) {
    out << kHeader << "\n";
    put(out, "type", std::string("platt"));
    put(out, "a", c.a);
    put(out, "b", c.b);
    out << "end\n";
}

PlattCalibrator load_platt_calibrator(std::istream& in) {
    FieldReader r(in, "platt");
    PlattCalibrator c;
    c.a = r.number("a");
    c.b = r.number("b");
    r.finish();
    return c;
}

void save_model(std::ostream& out, const SmoothnessClassifier& m) {
    out << kHeader << "\n";
    put(out, "type", std::string("smoothness"));
    put(out, "dim", long(m.penalty_a.size()));
    put(out, "kind_a", std::string(kind_text(m.penalty_a.kind())));
    put_matrix(out, "laplacian_a", m.penalty_a.matrix());
    put(out, "kind_b", std::string(kind_text(m.penalty_b.kind())));
    put_matrix(out, "laplacian_b", m.penalty_b.matrix());
    put_values(out, "feature_mean", m.feature_mean.data(), m.feature_mean.size());
    put_values(out, "feature_sd", m.feature_sd.data(), m.feature_sd.size());
    write_margin_body(out, "discriminant.", m.discriminant);
    out << "end\n";
}

SmoothnessClassifier load_smoothness_classifier(std::istream& in) {
    FieldReader r(in, "smoothness");
    SmoothnessClassifier m;
    const long p = r.count("dim");
    m.penalty_a =
        LaplacianOperator(kind_from_text(r.text("kind_a")), r.matrix("laplacian_a", p, p));
    m.penalty_b =
        LaplacianOperator(kind_from_text(r.text("kind_b")), r.matrix("laplacian_b", p, p));
    m.feature_mean = r.vector("feature_mean", 2);
    m.feature_sd = r.vector("feature_sd", 2);
    require((m.feature_sd.array() > 0.0).all(), Err::parse_error,
            "feature_sd must be positive");
    m.discriminant = read_margin_body(r, "discriminant.");
    r.finish();
    check_finite(m.penalty_a.matrix(), "laplacian_a");
    check_finite(m.penalty_b.matrix(), "laplacian_b");
    return m;
}

void save_model(std::ostream& out, const MaskedConvNet& net) {
    out << kHeader << "\n";
    put(out, "type", std::string("conv"));
    put(out, "loss", std::string(net.loss == LossKind::squared ? "squared" : "logistic"));
    put(out, "layer_count", long(net.layers.size()));
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        const std::string prefix = "layer" + std::to_string(k) + ".";
        const ConvLayer& layer = net.layers[k];
        put(out, prefix + "rows", long(layer.W.rows()));
        put(out, prefix + "cols", long(layer.W.cols()));
        put(out, prefix + "activation",
            std::string(layer.activation == Activation::identity ? "identity" : "sigmoid"));
        put_matrix(out, prefix + "weights", layer.W);
        put_matrix(out, prefix + "mask", layer.M);
    }
    out << "end\n";
}

MaskedConvNet load_conv_net(std::istream& in) {
    FieldReader r(in, "conv");
    MaskedConvNet net;
    const std::string loss = r.text("loss");
    if (loss == "squared") {
        net.loss = LossKind::squared;
    } else {
        require(loss == "logistic", Err::parse_error, "unknown loss: " + loss);
        net.loss = LossKind::logistic;
    }
    const long layers = r.count("layer_count");
    for (long k = 0; k < layers; ++k) {
        const std::string prefix = "layer" + std::to_string(k) + ".";
        ConvLayer layer;
        const long rows = r.count(prefix + "rows");
        const long cols = r.count(prefix + "cols");
        const std::string act = r.text(prefix + "activation");
        if (act == "identity") {
            layer.activation = Activation::identity;
        } else {
            require(act == "sigmoid", Err::parse_error, "unknown activation: " + act);
            layer.activation = Activation::sigmoid;
        }
        layer.W = r.matrix(prefix + "weights", rows, cols);
        layer.M = r.matrix(prefix + "mask", rows, cols);
        net.layers.push_back(std::move(layer));
    }
    r.finish();
    net.validate();
    return net;
}

template <typename Model>
void save_model_file(const std::string& path, const Model& m) {
    std::ofstream out(path);
    require(out.good(), Err::io_error, "cannot open " + path + " for writing");
    save_model(out, m);
    out.flush();
    require(out.good(), Err::io_error, "failed writing " + path);
}

template void save_model_file<MarginModel>(const std::string&, const MarginModel&);
template void save_model_file<PlattCalibrator>(const std::string&, const PlattCalibrator&);
template void save_model_file<SmoothnessClassifier>(const std::string&,
                                                    const SmoothnessClassifier&);
template void save_model_file<MaskedConvNet>(const std::string&, const MaskedConvNet&);

namespace {

std::ifstream open_model(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), Err::io_error, "cannot open " + path);
    return in;
}

}  // namespace

MarginModel load_margin_model_file(const std::string& path) {
    auto in = open_model(path);
    return load_margin_model(in);
}

PlattCalibrator load_platt_calibrator_file(const std::string& path) {
    auto in = open_model(path);
    return load_platt_calibrator(in);
}

SmoothnessClassifier load_smoothness_classifier_file(const std::string& path) {
    auto in = open_model(path);
    return load_smoothness_classifier(in);
}

MaskedConvNet load_conv_net_file(const std::string& path) {
    auto in = open_model(path);
    return load_conv_net(in);
}

}  // namespace fnet
