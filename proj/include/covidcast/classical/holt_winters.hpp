#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covidcast/classical/nelder_mead.hpp"

namespace covidcast::classical {

struct HwParams {
    double alpha = 0.5;
    double beta = 0.1;
    double gamma = 0.1;
    double phi = 0.96;
};

/// States before the first observation. `seasonal[j]` is the index applied
/// to observation j (j < m), i.e. s_{j-m}.
struct HwState {
    double level = 0.0;
    double trend = 0.0;
    std::vector<double> seasonal;
};

/// Additive seasonal, damped additive trend exponential smoothing.
struct HwFit {
    HwParams params;
    std::size_t period = 7;
    HwState initial;
    double level = 0.0;            // final level
    double trend = 0.0;            // final trend
    std::vector<double> seasonal;  // last m indices, oldest first: seasonal[k] serves forecast step k+1 (mod m)
    std::vector<double> fitted;    // one-step-ahead in-sample forecasts
    std::vector<double> residuals; // y - fitted
    double sse = 0.0;
};

/// Runs the smoothing recursions over `y`:
///
///   l_t = a (y_t - s_{t-m}) + (1 - a)(l_{t-1} + phi b_{t-1})
///   b_t = b (l_t - l_{t-1}) + (1 - b) phi b_{t-1}
///   s_t = g (y_t - l_{t-1} - phi b_{t-1}) + (1 - g) s_{t-m}
inline HwFit hw_filter(std::span<const double> y, const HwParams& params, const HwState& init) {
    const std::size_t m = init.seasonal.size();
    if (m < 1) {
        throw std::invalid_argument("seasonal state must have at least one index");
    }
    HwFit fit;
    fit.params = params;
    fit.period = m;
    fit.initial = init;

    std::vector<double> seas(init.seasonal);
    seas.reserve(m + y.size());
    double level = init.level;
    double trend = init.trend;
    fit.fitted.reserve(y.size());
    fit.residuals.reserve(y.size());
    const auto [a, b, g, phi] = params;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double s_old = seas[t];
        const double damped = phi * trend;
        const double forecast = level + damped + s_old;
        const double err = y[t] - forecast;
        fit.fitted.push_back(forecast);
        fit.residuals.push_back(err);
        fit.sse += err * err;

        const double new_level = a * (y[t] - s_old) + (1.0 - a) * (level + damped);
        const double new_trend = b * (new_level - level) + (1.0 - b) * damped;
        seas.push_back(g * (y[t] - level - damped) + (1.0 - g) * s_old);
        level = new_level;
        trend = new_trend;
    }
    fit.level = level;
    fit.trend = trend;
    fit.seasonal.assign(seas.end() - static_cast<std::ptrdiff_t>(m), seas.end());
    return fit;
}

/// Start states from a classical decomposition of the leading full seasons:
/// a centred moving average gives the trend, per-position means of the
/// detrended values give zero-mean seasonal indices, and a straight line
/// through the first (up to) ten deseasonalised values gives level and slope
/// at t = 0.
inline HwState hw_initial_state(std::span<const double> y, std::size_t m) {
    if (m < 2 || y.size() < 2 * m) {
        throw std::invalid_argument("Holt-Winters initialisation needs at least two full seasons (" +
                                    std::to_string(2 * m) + " values), got " + std::to_string(y.size()));
    }
    std::size_t cycles = std::min<std::size_t>(5, y.size() / m);
    while ((cycles & (cycles - 1)) != 0) --cycles; // largest power of two
    const std::size_t n = m * cycles;

    // centred moving average; even periods use the 2 x m filter
    std::vector<double> trend(n, NAN);
    const std::size_t half = m / 2;
    for (std::size_t t = half; t + half < n; ++t) {
        double s = 0.0;
        if (m % 2 == 1) {
            for (std::size_t k = t - half; k <= t + half; ++k) s += y[k];
            trend[t] = s / static_cast<double>(m);
        } else {
            s = 0.5 * (y[t - half] + y[t + half]);
            for (std::size_t k = t - half + 1; k < t + half; ++k) s += y[k];
            trend[t] = s / static_cast<double>(m);
        }
    }

    HwState st;
    st.seasonal.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t t = j; t < n; t += m) {
            if (std::isnan(trend[t])) continue;
            sum += y[t] - trend[t];
            ++count;
        }
        st.seasonal[j] = count ? sum / static_cast<double>(count) : 0.0;
    }
    const double mean = std::accumulate(st.seasonal.begin(), st.seasonal.end(), 0.0) / static_cast<double>(m);
    for (double& s : st.seasonal) s -= mean;

    const std::size_t k = std::min<std::size_t>(10, y.size());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(k), 2);
    Eigen::VectorXd z(static_cast<Eigen::Index>(k));
    for (std::size_t t = 0; t < k; ++t) {
        x(static_cast<Eigen::Index>(t), 0) = 1.0;
        x(static_cast<Eigen::Index>(t), 1) = static_cast<double>(t + 1);
        z[static_cast<Eigen::Index>(t)] = y[t] - st.seasonal[t % m];
    }
    const Eigen::Vector2d coef = x.colPivHouseholderQr().solve(z);
    st.level = coef[0];
    st.trend = coef[1];
    return st;
}

struct HwOptions {
    std::size_t period = 7;
    double phi = 0.96;
    std::array<double, 3> start{0.5, 0.1, 0.1}; // alpha, beta, gamma
    NelderMeadOptions optimizer{};
};

namespace detail {

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

} // namespace detail

/// In-sample SSE objective over (alpha, beta, gamma). Points outside the
/// unit cube are evaluated at their projection plus a quadratic penalty.
struct HwObjective {
    std::span<const double> y;
    HwState init;
    double phi;
    double penalty_scale;

    double operator()(const std::array<double, 3>& x) const {
        double excess = 0.0;
        std::array<double, 3> c{};
        for (std::size_t k = 0; k < 3; ++k) {
            c[k] = detail::clamp01(x[k]);
            excess += (x[k] - c[k]) * (x[k] - c[k]);
        }
        const double sse = hw_filter(y, {c[0], c[1], c[2], phi}, init).sse;
        return sse + penalty_scale * excess;
    }
};

/// Fits alpha, beta, gamma by Nelder-Mead on the one-step SSE with phi fixed.
/// The simplex is restarted once from its converged point.
inline HwFit hw_fit(std::span<const double> y, const HwOptions& opt = {}) {
    const HwState init = hw_initial_state(y, opt.period);
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double scale = 0.0;
    for (double v : y) scale += (v - mean) * (v - mean);
    const HwObjective objective{y, init, opt.phi, 1e6 * std::max(scale, 1.0)};

    auto result = nelder_mead<3>(objective, opt.start, opt.optimizer);
    result = nelder_mead<3>(objective, result.x, opt.optimizer);

    const HwParams params{detail::clamp01(result.x[0]), detail::clamp01(result.x[1]), detail::clamp01(result.x[2]),
                          opt.phi};
    return hw_filter(y, params, init);
}

/// l + (phi + ... + phi^h) b + seasonal index of the matching phase.
inline std::vector<double> hw_forecast(const HwFit& fit, std::size_t horizon) {
    std::vector<double> out;
    out.reserve(horizon);
    double damp = 0.0;
    double phi_pow = 1.0;
    const std::size_t m = fit.seasonal.size();
    for (std::size_t h = 1; h <= horizon; ++h) {
        phi_pow *= fit.params.phi;
        damp += phi_pow;
        const double s = m ? fit.seasonal[(h - 1) % m] : 0.0;
        out.push_back(fit.level + damp * fit.trend + s);
    }
    return out;
}

} // namespace covidcast::classical
