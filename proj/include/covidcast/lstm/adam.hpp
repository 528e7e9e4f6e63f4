#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "covidcast/lstm/params.hpp"

namespace covidcast::lstm {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First and second moment estimates, shaped like the parameters.
struct AdamState {
    LstmParams m;
    LstmParams v;
    std::uint64_t step = 0;

    static AdamState like(const LstmParams& p) { return {p.zeros_like(), p.zeros_like(), 0}; }
};

/// Bias-corrected Adam step number `t` (1-based). Updates `params` and
/// `state` in place.
inline void adam_update(LstmParams& params, const LstmParams& grad, AdamState& state, std::uint64_t t,
                        const AdamConfig& cfg = {}) {
    if (t < 1) {
        throw std::invalid_argument("adam step counter must start at 1");
    }
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    zip_tensors(
        [&](auto& w, const auto& g, auto& m, auto& v) {
            m.array() = cfg.beta1 * m.array() + (1.0 - cfg.beta1) * g.array();
            v.array() = cfg.beta2 * v.array() + (1.0 - cfg.beta2) * g.array().square();
            w.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
        },
        params, grad, state.m, state.v);
    state.step = t;
}

} // namespace covidcast::lstm
