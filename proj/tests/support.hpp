#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "covidcast/lstm/cell.hpp"

#ifndef COVIDCAST_DATA_DIR
#define COVIDCAST_DATA_DIR "data"
#endif

namespace covidcast::testing {

inline std::filesystem::path bundled_csv() { return std::filesystem::path(COVIDCAST_DATA_DIR) / "turkey_covid19.csv"; }

struct GradientCase {
    Eigen::Index hidden;
    std::size_t lookback;
    Eigen::Index input_dim;
    lstm::Activation g;
    std::uint64_t seed;
};

/// Central finite differences of the squared-error loss, one parameter at a
/// time, against the analytic gradient. Returns the largest relative error
/// |fd - an| / max(|fd|, |an|, 1e-6).
inline double gradient_max_relative_error(const GradientCase& c, double step = 1e-5) {
    using namespace covidcast::lstm;
    LstmParams p = glorot_init(c.hidden, c.input_dim, c.input_dim, c.seed);
    std::mt19937_64 rng(c.seed + 1000);
    // push weights and biases away from the init distribution so every gate
    // is exercised, including negative elu arguments
    zip_tensors([&](auto& t) {
        for (Eigen::Index k = 0; k < t.size(); ++k) t.data()[k] += uniform01(rng) - 0.5;
    }, p);
    std::vector<Eigen::VectorXd> xs;
    for (std::size_t k = 0; k < c.lookback; ++k) {
        Eigen::VectorXd x(c.input_dim);
        for (Eigen::Index j = 0; j < c.input_dim; ++j) x[j] = 2.0 * uniform01(rng) - 1.0;
        xs.push_back(x);
    }
    Eigen::VectorXd target(c.input_dim);
    for (Eigen::Index j = 0; j < c.input_dim; ++j) target[j] = 2.0 * uniform01(rng) - 1.0;

    const Gradient an = bptt_gradient(p, xs, target, c.g);
    auto loss = [&](const LstmParams& q) { return (predict(q, xs, c.g) - target).squaredNorm(); };
    double worst = 0.0;
    LstmParams q = p;
    zip_tensors(
        [&](auto& w, const auto& gw) {
            for (Eigen::Index k = 0; k < w.size(); ++k) {
                const double orig = w.data()[k];
                w.data()[k] = orig + step;
                const double up = loss(q);
                w.data()[k] = orig - step;
                const double down = loss(q);
                w.data()[k] = orig;
                const double fd = (up - down) / (2.0 * step);
                const double a = gw.data()[k];
                worst = std::max(worst, std::abs(fd - a) / std::max({std::abs(fd), std::abs(a), 1e-6}));
            }
        },
        q, an.grad);
    return worst;
}

/// hidden {1,2,4} x lookback {1,2,3} x g {elu,tanh} x input dim {1,2}: 36 configurations.
inline std::vector<GradientCase> gradient_suite() {
    std::vector<GradientCase> out;
    std::uint64_t seed = 1;
    for (Eigen::Index h : {1, 2, 4})
        for (std::size_t l : {1u, 2u, 3u})
            for (auto g : {lstm::Activation::elu, lstm::Activation::tanh})
                for (Eigen::Index d : {1, 2}) out.push_back({h, l, d, g, seed++});
    return out;
}

} // namespace covidcast::testing
