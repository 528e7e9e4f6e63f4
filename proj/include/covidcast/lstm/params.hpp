#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

#include <Eigen/Dense>

namespace covidcast::lstm {

/// Weights feeding one gate (or the cell candidate): input-to-gate,
/// hidden-to-gate and bias.
struct GateParams {
    Eigen::MatrixXd wx; // hidden x input
    Eigen::MatrixXd wh; // hidden x hidden
    Eigen::VectorXd b;  // hidden

    static GateParams zeros(Eigen::Index hidden, Eigen::Index input) {
        return {Eigen::MatrixXd::Zero(hidden, input), Eigen::MatrixXd::Zero(hidden, hidden),
                Eigen::VectorXd::Zero(hidden)};
    }
};

/// One LSTM layer plus a linear dense head. Gradients use the same type.
struct LstmParams {
    GateParams input;
    GateParams forget;
    GateParams output;
    GateParams cell;
    Eigen::MatrixXd dense_w; // output x hidden
    Eigen::VectorXd dense_b; // output

    static LstmParams zeros(Eigen::Index hidden, Eigen::Index input_dim, Eigen::Index output_dim) {
        return {GateParams::zeros(hidden, input_dim),
                GateParams::zeros(hidden, input_dim),
                GateParams::zeros(hidden, input_dim),
                GateParams::zeros(hidden, input_dim),
                Eigen::MatrixXd::Zero(output_dim, hidden),
                Eigen::VectorXd::Zero(output_dim)};
    }

    Eigen::Index hidden() const { return input.wh.rows(); }
    Eigen::Index input_dim() const { return input.wx.cols(); }
    Eigen::Index output_dim() const { return dense_w.rows(); }

    LstmParams zeros_like() const { return zeros(hidden(), input_dim(), output_dim()); }
};

/// Calls `f` on corresponding tensors of every argument, in a fixed order:
/// gates (input, forget, output, cell) x (wx, wh, b), then dense_w, dense_b.
template <class F, class... Ps>
void zip_tensors(F&& f, Ps&&... ps) {
    f(ps.input.wx...);
    f(ps.input.wh...);
    f(ps.input.b...);
    f(ps.forget.wx...);
    f(ps.forget.wh...);
    f(ps.forget.b...);
    f(ps.output.wx...);
    f(ps.output.wh...);
    f(ps.output.b...);
    f(ps.cell.wx...);
    f(ps.cell.wh...);
    f(ps.cell.b...);
    f(ps.dense_w...);
    f(ps.dense_b...);
}

inline std::size_t parameter_count(const LstmParams& p) {
    std::size_t n = 0;
    zip_tensors([&](const auto& t) { n += static_cast<std::size_t>(t.size()); }, p);
    return n;
}

inline bool all_finite(const LstmParams& p) {
    bool ok = true;
    zip_tensors([&](const auto& t) { ok = ok && t.allFinite(); }, p);
    return ok;
}

/// Uniform in [0, 1) from the top 53 bits, independent of the standard
/// library's distribution implementation.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double standard_normal(std::mt19937_64& rng) {
    // Box-Muller, first variate only
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

enum class RecurrentInit { glorot, orthogonal };

struct InitConfig {
    RecurrentInit recurrent = RecurrentInit::glorot;
    double forget_bias = 0.0;
};

/// Glorot-uniform input and dense weights. Recurrent weights are Glorot or
/// orthogonal (Q factor of a Gaussian matrix). Biases are zero except the
/// forget gate, which is `init.forget_bias`.
inline LstmParams glorot_init(Eigen::Index hidden, Eigen::Index input_dim, Eigen::Index output_dim,
                              std::uint64_t seed, const InitConfig& init = {}) {
    std::mt19937_64 rng(seed);
    auto fill = [&](Eigen::MatrixXd& m, Eigen::Index fan_in, Eigen::Index fan_out) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        // column-major fill order
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = (2.0 * uniform01(rng) - 1.0) * limit;
    };
    LstmParams p = LstmParams::zeros(hidden, input_dim, output_dim);
    auto orthogonal = [&](Eigen::MatrixXd& m) {
        Eigen::MatrixXd a(m.rows(), m.cols());
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = standard_normal(rng);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
        // sign fix makes the draw uniform over orthogonal matrices
        const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (Eigen::Index j = 0; j < q.cols(); ++j)
            if (r(j, j) < 0.0) q.col(j) = -q.col(j);
        m = q;
    };
    for (GateParams* g : {&p.input, &p.forget, &p.output, &p.cell}) {
        fill(g->wx, input_dim, hidden);
        if (init.recurrent == RecurrentInit::orthogonal) {
            orthogonal(g->wh);
        } else {
            fill(g->wh, hidden, hidden);
        }
    }
    fill(p.dense_w, hidden, output_dim);
    p.forget.b.setConstant(init.forget_bias);
    return p;
}

} // namespace covidcast::lstm
