#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covidcast/lstm/activation.hpp"
#include "covidcast/lstm/params.hpp"

namespace covidcast::lstm {

struct LstmState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;

    static LstmState zeros(Eigen::Index hidden) {
        return {Eigen::VectorXd::Zero(hidden), Eigen::VectorXd::Zero(hidden)};
    }
};

struct GateActivations {
    Eigen::VectorXd i;
    Eigen::VectorXd f;
    Eigen::VectorXd o;
    Eigen::VectorXd g_in;   // g(W_cx x + W_ch h + b_c)
    Eigen::VectorXd cell_pre; // W_cx x + W_ch h + b_c
};

namespace detail {

inline void check_dims(const LstmParams& p, const Eigen::VectorXd& x, const LstmState& s) {
    if (x.size() != p.input_dim()) {
        throw std::invalid_argument("lstm input has dimension " + std::to_string(x.size()) + ", expected " +
                                    std::to_string(p.input_dim()));
    }
    if (s.h.size() != p.hidden() || s.c.size() != p.hidden()) {
        throw std::invalid_argument("lstm state does not match hidden size " + std::to_string(p.hidden()));
    }
}

} // namespace detail

/// One application of the gated recurrence:
///
///   i = sigma(W_ix x + W_ih h + b_i)      f = sigma(W_fx x + W_fh h + b_f)
///   o = sigma(W_ox x + W_oh h + b_o)
///   c' = f * c + i * g(W_cx x + W_ch h + b_c)
///   h' = o * g(c')
///
/// `g` appears twice: on the cell candidate and on the new cell state.
inline std::pair<LstmState, GateActivations> lstm_step(const LstmParams& p, const Eigen::VectorXd& x,
                                                      const LstmState& state, Activation g) {
    detail::check_dims(p, x, state);
    GateActivations a;
    a.i = sigmoid(p.input.wx * x + p.input.wh * state.h + p.input.b);
    a.f = sigmoid(p.forget.wx * x + p.forget.wh * state.h + p.forget.b);
    a.o = sigmoid(p.output.wx * x + p.output.wh * state.h + p.output.b);
    a.cell_pre = p.cell.wx * x + p.cell.wh * state.h + p.cell.b;
    a.g_in = activate(g, a.cell_pre);

    LstmState next;
    next.c = a.f.cwiseProduct(state.c) + a.i.cwiseProduct(a.g_in);
    next.h = a.o.cwiseProduct(activate(g, next.c));
    return {std::move(next), std::move(a)};
}

/// Everything the backward pass needs from one time step.
struct StepCache {
    Eigen::VectorXd x;
    LstmState prev;
    GateActivations gates;
    LstmState next;
};

struct ForwardResult {
    Eigen::VectorXd y;
    std::vector<StepCache> steps;
};

/// Runs the recurrence from a zero state and applies the dense head to the
/// last hidden state.
inline ForwardResult forward(const LstmParams& p, std::span<const Eigen::VectorXd> sequence, Activation g) {
    if (sequence.empty()) {
        throw std::invalid_argument("lstm forward needs a non-empty sequence");
    }
    ForwardResult out;
    out.steps.reserve(sequence.size());
    LstmState state = LstmState::zeros(p.hidden());
    for (const auto& x : sequence) {
        auto [next, gates] = lstm_step(p, x, state, g);
        out.steps.push_back(StepCache{x, std::move(state), std::move(gates), next});
        state = std::move(next);
    }
    out.y = p.dense_w * state.h + p.dense_b;
    return out;
}

/// Output only, no cache.
inline Eigen::VectorXd predict(const LstmParams& p, std::span<const Eigen::VectorXd> sequence, Activation g) {
    if (sequence.empty()) {
        throw std::invalid_argument("lstm forward needs a non-empty sequence");
    }
    LstmState state = LstmState::zeros(p.hidden());
    for (const auto& x : sequence) state = lstm_step(p, x, state, g).first;
    return p.dense_w * state.h + p.dense_b;
}

struct Gradient {
    LstmParams grad;
    double loss = 0.0; // ||y - target||^2
    Eigen::VectorXd y;
};

/// Reverse-mode gradient of the squared error through the unrolled sequence.
inline Gradient bptt_gradient(const LstmParams& p, std::span<const Eigen::VectorXd> inputs,
                              const Eigen::VectorXd& target, Activation g) {
    ForwardResult fw = forward(p, inputs, g);
    if (target.size() != p.output_dim()) {
        throw std::invalid_argument("target has dimension " + std::to_string(target.size()) + ", expected " +
                                    std::to_string(p.output_dim()));
    }
    Gradient out{p.zeros_like(), 0.0, fw.y};
    LstmParams& d = out.grad;

    const Eigen::VectorXd dy = 2.0 * (fw.y - target);
    out.loss = (fw.y - target).squaredNorm();

    d.dense_w = dy * fw.steps.back().next.h.transpose();
    d.dense_b = dy;

    Eigen::VectorXd dh = p.dense_w.transpose() * dy;
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(p.hidden());

    for (auto it = fw.steps.rbegin(); it != fw.steps.rend(); ++it) {
        const StepCache& s = *it;
        const GateActivations& a = s.gates;
        const Eigen::VectorXd g_c = activate(g, s.next.c);

        // h' = o * g(c')
        const Eigen::VectorXd d_o = dh.cwiseProduct(g_c);
        dc += dh.cwiseProduct(a.o).cwiseProduct(activate_grad(g, s.next.c));

        // c' = f * c + i * g_in
        const Eigen::VectorXd d_f = dc.cwiseProduct(s.prev.c);
        const Eigen::VectorXd d_i = dc.cwiseProduct(a.g_in);
        const Eigen::VectorXd d_gin = dc.cwiseProduct(a.i);

        const Eigen::VectorXd z_i = d_i.cwiseProduct(a.i.cwiseProduct((1.0 - a.i.array()).matrix()));
        const Eigen::VectorXd z_f = d_f.cwiseProduct(a.f.cwiseProduct((1.0 - a.f.array()).matrix()));
        const Eigen::VectorXd z_o = d_o.cwiseProduct(a.o.cwiseProduct((1.0 - a.o.array()).matrix()));
        const Eigen::VectorXd z_c = d_gin.cwiseProduct(activate_grad(g, a.cell_pre));

        auto accumulate = [&](GateParams& gp, const GateParams& wp, const Eigen::VectorXd& z, Eigen::VectorXd& dh_prev) {
            gp.wx.noalias() += z * s.x.transpose();
            gp.wh.noalias() += z * s.prev.h.transpose();
            gp.b += z;
            dh_prev.noalias() += wp.wh.transpose() * z;
        };
        Eigen::VectorXd dh_prev = Eigen::VectorXd::Zero(p.hidden());
        accumulate(d.input, p.input, z_i, dh_prev);
        accumulate(d.forget, p.forget, z_f, dh_prev);
        accumulate(d.output, p.output, z_o, dh_prev);
        accumulate(d.cell, p.cell, z_c, dh_prev);

        dh = std::move(dh_prev);
        dc = dc.cwiseProduct(a.f).eval();
    }
    return out;
}

} // namespace covidcast::lstm
