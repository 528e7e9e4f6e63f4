#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "covidcast/classical/arima.hpp"
#include "covidcast/classical/holt_winters.hpp"
#include "covidcast/classical/prophet_lite.hpp"
#include "covidcast/data.hpp"
#include "covidcast/lstm/forecast.hpp"

// Checkpoint container: one JSON object per fitted model,
//
//   { "format": "covidcast-checkpoint", "version": 1, "kind": "<model kind>", ... }
//
// Every real number is stored as a decimal string with 17 significant digits,
// which round-trips IEEE doubles bit-exactly.

namespace covidcast::checkpoint {

using json = nlohmann::json;

inline constexpr const char* format_tag = "covidcast-checkpoint";
inline constexpr int format_version = 1;

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string encode(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double decode(const json& j) {
    if (!j.is_string()) throw CheckpointError("expected a decimal string, got " + j.dump());
    const std::string s = j.get<std::string>();
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    // ERANGE also flags subnormal results, which are exact here; only overflow is an error
    if (end == s.c_str() || *end != '\0' || (errno == ERANGE && std::isinf(v))) {
        throw CheckpointError("bad decimal '" + s + "'");
    }
    return v;
}

inline json encode(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(encode(x));
    return a;
}

inline std::vector<double> decode_vector(const json& j) {
    std::vector<double> out;
    for (const auto& x : j) out.push_back(decode(x));
    return out;
}

inline json encode(const Eigen::MatrixXd& m) {
    json data = json::array();
    // row-major
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index k = 0; k < m.cols(); ++k) data.push_back(encode(m(i, k)));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline Eigen::MatrixXd decode_matrix(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw CheckpointError("matrix data has wrong length");
    Eigen::MatrixXd m(rows, cols);
    std::size_t n = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = decode(data[n++]);
    return m;
}

inline json encode_vector(const Eigen::VectorXd& v) { return encode(std::vector<double>(v.data(), v.data() + v.size())); }

inline Eigen::VectorXd decode_eigen_vector(const json& j) {
    const auto v = decode_vector(j);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline json header(const char* kind) { return {{"format", format_tag}, {"version", format_version}, {"kind", kind}}; }

inline void check_header(const json& j, const char* kind) {
    if (!j.is_object() || j.value("format", "") != format_tag) throw CheckpointError("not a covidcast checkpoint");
    if (j.value("version", 0) != format_version) {
        throw CheckpointError("unsupported checkpoint version " + j.value("version", json()).dump());
    }
    if (j.value("kind", "") != kind) {
        throw CheckpointError("checkpoint holds a '" + j.value("kind", "?") + "' model, expected '" + kind + "'");
    }
}

inline std::string kind_of(const json& j) {
    if (!j.is_object() || j.value("format", "") != format_tag) throw CheckpointError("not a covidcast checkpoint");
    return j.at("kind").get<std::string>();
}

// --- LSTM -----------------------------------------------------------------

inline json encode(const lstm::LstmParams& p) {
    return {
        {"W_ix", encode(p.input.wx)},  {"W_ih", encode(p.input.wh)},  {"b_i", encode_vector(p.input.b)},
        {"W_fx", encode(p.forget.wx)}, {"W_fh", encode(p.forget.wh)}, {"b_f", encode_vector(p.forget.b)},
        {"W_ox", encode(p.output.wx)}, {"W_oh", encode(p.output.wh)}, {"b_o", encode_vector(p.output.b)},
        {"W_cx", encode(p.cell.wx)},   {"W_ch", encode(p.cell.wh)},   {"b_c", encode_vector(p.cell.b)},
        {"dense_W", encode(p.dense_w)}, {"dense_b", encode_vector(p.dense_b)},
    };
}

inline lstm::LstmParams decode_params(const json& j) {
    lstm::LstmParams p;
    auto gate = [&](lstm::GateParams& g, const char* wx, const char* wh, const char* b) {
        g.wx = decode_matrix(j.at(wx));
        g.wh = decode_matrix(j.at(wh));
        g.b = decode_eigen_vector(j.at(b));
    };
    gate(p.input, "W_ix", "W_ih", "b_i");
    gate(p.forget, "W_fx", "W_fh", "b_f");
    gate(p.output, "W_ox", "W_oh", "b_o");
    gate(p.cell, "W_cx", "W_ch", "b_c");
    p.dense_w = decode_matrix(j.at("dense_W"));
    p.dense_b = decode_eigen_vector(j.at("dense_b"));
    const auto h = p.hidden();
    const auto in = p.input_dim();
    for (const lstm::GateParams* g : {&p.input, &p.forget, &p.output, &p.cell}) {
        if (g->wx.rows() != h || g->wx.cols() != in || g->wh.rows() != h || g->wh.cols() != h || g->b.size() != h) {
            throw CheckpointError("inconsistent LSTM parameter shapes");
        }
    }
    if (p.dense_w.cols() != h || p.dense_b.size() != p.dense_w.rows()) {
        throw CheckpointError("inconsistent dense head shapes");
    }
    return p;
}

inline json encode(const lstm::TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"hidden", c.hidden},
            {"learning_rate", encode(c.adam.learning_rate)},
            {"beta1", encode(c.adam.beta1)},
            {"beta2", encode(c.adam.beta2)},
            {"epsilon", encode(c.adam.epsilon)},
            {"activation", std::string(lstm::to_string(c.activation))},
            {"seed", std::to_string(c.seed)},
            {"recurrent_init", c.init.recurrent == lstm::RecurrentInit::orthogonal ? "orthogonal" : "glorot"},
            {"forget_bias", encode(c.init.forget_bias)},
            {"shuffle", c.shuffle}};
}

inline lstm::TrainConfig decode_train_config(const json& j) {
    lstm::TrainConfig c;
    c.epochs = j.at("epochs").get<std::size_t>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.adam.learning_rate = decode(j.at("learning_rate"));
    c.adam.beta1 = decode(j.at("beta1"));
    c.adam.beta2 = decode(j.at("beta2"));
    c.adam.epsilon = decode(j.at("epsilon"));
    c.activation = lstm::parse_activation(j.at("activation").get<std::string>());
    c.seed = std::stoull(j.at("seed").get<std::string>());
    c.init.recurrent =
        j.value("recurrent_init", "glorot") == "orthogonal" ? lstm::RecurrentInit::orthogonal : lstm::RecurrentInit::glorot;
    c.init.forget_bias = j.contains("forget_bias") ? decode(j.at("forget_bias")) : 0.0;
    c.shuffle = j.value("shuffle", false);
    return c;
}

inline json encode(const Normalizer& n) { return {{"min", encode(n.min())}, {"max", encode(n.max())}}; }

inline Normalizer decode_normalizer(const json& j) {
    return Normalizer(decode_vector(j.at("min")), decode_vector(j.at("max")));
}

/// Weights, training configuration (seed included), lookback, scaling and
/// schema. Optimizer moments and the loss curve are not stored.
inline json save(const lstm::TrainedSchema& t) {
    json j = header("lstm");
    j["schema"] = std::string(lstm::to_string(t.schema));
    j["lookback"] = t.model.lookback;
    j["config"] = encode(t.model.config);
    j["normalizer"] = encode(t.normalizer);
    j["params"] = encode(t.model.params);
    return j;
}

inline lstm::TrainedSchema load_lstm(const json& j) {
    check_header(j, "lstm");
    lstm::TrainedSchema t;
    t.schema = lstm::parse_schema(j.at("schema").get<std::string>());
    t.model.lookback = j.at("lookback").get<std::size_t>();
    t.model.config = decode_train_config(j.at("config"));
    t.normalizer = decode_normalizer(j.at("normalizer"));
    t.model.params = decode_params(j.at("params"));
    t.model.optimizer = lstm::AdamState::like(t.model.params);
    return t;
}

// --- classical models -----------------------------------------------------

inline json save(const classical::ArimaModel& m) {
    json j = header("arima");
    j["order"] = {m.fit.order.p, m.fit.order.d, m.fit.order.q};
    j["with_intercept"] = m.fit.with_intercept;
    j["intercept"] = encode(m.fit.intercept);
    j["ar"] = encode(m.fit.ar);
    j["residuals"] = encode(m.fit.residuals);
    j["condition_number"] = encode(m.fit.condition_number);
    j["diffs"] = encode(m.diffs);
    j["last_level"] = encode(m.last_level);
    return j;
}

inline classical::ArimaModel load_arima(const json& j) {
    check_header(j, "arima");
    classical::ArimaModel m;
    const auto& order = j.at("order");
    m.fit.order = {order.at(0).get<std::size_t>(), order.at(1).get<std::size_t>(), order.at(2).get<std::size_t>()};
    m.fit.with_intercept = j.at("with_intercept").get<bool>();
    m.fit.intercept = decode(j.at("intercept"));
    m.fit.ar = decode_vector(j.at("ar"));
    m.fit.residuals = decode_vector(j.at("residuals"));
    m.fit.condition_number = decode(j.at("condition_number"));
    m.diffs = decode_vector(j.at("diffs"));
    m.last_level = decode(j.at("last_level"));
    return m;
}

inline json save(const classical::HwFit& f) {
    json j = header("hwaas");
    j["alpha"] = encode(f.params.alpha);
    j["beta"] = encode(f.params.beta);
    j["gamma"] = encode(f.params.gamma);
    j["phi"] = encode(f.params.phi);
    j["period"] = f.period;
    j["initial"] = {{"level", encode(f.initial.level)},
                    {"trend", encode(f.initial.trend)},
                    {"seasonal", encode(f.initial.seasonal)}};
    j["level"] = encode(f.level);
    j["trend"] = encode(f.trend);
    j["seasonal"] = encode(f.seasonal);
    j["fitted"] = encode(f.fitted);
    j["residuals"] = encode(f.residuals);
    j["sse"] = encode(f.sse);
    return j;
}

inline classical::HwFit load_hwaas(const json& j) {
    check_header(j, "hwaas");
    classical::HwFit f;
    f.params = {decode(j.at("alpha")), decode(j.at("beta")), decode(j.at("gamma")), decode(j.at("phi"))};
    f.period = j.at("period").get<std::size_t>();
    f.initial.level = decode(j.at("initial").at("level"));
    f.initial.trend = decode(j.at("initial").at("trend"));
    f.initial.seasonal = decode_vector(j.at("initial").at("seasonal"));
    f.level = decode(j.at("level"));
    f.trend = decode(j.at("trend"));
    f.seasonal = decode_vector(j.at("seasonal"));
    f.fitted = decode_vector(j.at("fitted"));
    f.residuals = decode_vector(j.at("residuals"));
    f.sse = decode(j.at("sse"));
    return f;
}

inline json save(const classical::ProphetLiteFit& f) {
    json j = header("prophet-lite");
    j["start"] = format_date(f.start);
    j["n"] = f.n;
    j["y_scale"] = encode(f.y_scale);
    j["changepoints"] = encode(f.changepoints);
    json dates = json::array();
    for (const auto& d : f.changepoint_dates) dates.push_back(format_date(d));
    j["changepoint_dates"] = dates;
    j["intercept"] = encode(f.intercept);
    j["slope"] = encode(f.slope);
    j["deltas"] = encode(f.deltas);
    j["fourier"] = encode(f.fourier);
    j["fourier_order"] = f.fourier_order;
    j["period_days"] = encode(f.period_days);
    j["ridge"] = encode(f.ridge);
    j["residuals"] = encode(f.residuals);
    return j;
}

inline classical::ProphetLiteFit load_prophet_lite(const json& j) {
    check_header(j, "prophet-lite");
    classical::ProphetLiteFit f;
    f.start = parse_date(j.at("start").get<std::string>());
    f.n = j.at("n").get<std::size_t>();
    f.y_scale = decode(j.at("y_scale"));
    f.changepoints = decode_vector(j.at("changepoints"));
    for (const auto& d : j.at("changepoint_dates")) f.changepoint_dates.push_back(parse_date(d.get<std::string>()));
    f.intercept = decode(j.at("intercept"));
    f.slope = decode(j.at("slope"));
    f.deltas = decode_vector(j.at("deltas"));
    f.fourier = decode_vector(j.at("fourier"));
    f.fourier_order = j.at("fourier_order").get<std::size_t>();
    f.period_days = decode(j.at("period_days"));
    f.ridge = decode(j.at("ridge"));
    f.residuals = decode_vector(j.at("residuals"));
    return f;
}

// --- files ----------------------------------------------------------------

inline void write_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw CheckpointError("cannot write '" + path.string() + "'");
    out << j.dump(1) << '\n';
}

inline json read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CheckpointError("cannot read '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw CheckpointError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

} // namespace covidcast::checkpoint
