#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covidcast/errors.hpp"

namespace covidcast::classical {

/// First difference: out[k] = in[k+1] - in[k].
inline std::vector<double> difference(std::span<const double> series) {
    if (series.size() < 2) {
        throw std::invalid_argument("difference needs at least 2 values");
    }
    std::vector<double> out(series.size() - 1);
    for (std::size_t k = 0; k + 1 < series.size(); ++k) out[k] = series[k + 1] - series[k];
    return out;
}

/// Inverse of `difference`: cumulative sum of `diffs` starting from `first`.
inline std::vector<double> integrate(double first, std::span<const double> diffs) {
    std::vector<double> out;
    out.reserve(diffs.size() + 1);
    out.push_back(first);
    for (double d : diffs) out.push_back(out.back() + d);
    return out;
}

struct ArimaOrder {
    std::size_t p = 6;
    std::size_t d = 1;
    std::size_t q = 0;
};

/// AR(p) fit on the differenced scale by conditional least squares.
struct ArimaFit {
    ArimaOrder order{};
    bool with_intercept = true;
    double intercept = 0.0;
    std::vector<double> ar;        // phi_1..phi_p
    std::vector<double> residuals; // in-sample one-step errors, t = p+1..n
    double condition_number = 0.0; // of the regressor matrix

    double residual_variance() const {
        if (residuals.empty()) return 0.0;
        double s = 0.0;
        for (double r : residuals) s += r * r;
        return s / static_cast<double>(residuals.size());
    }
};

/// Regresses y_t on (1, y_{t-1}, ..., y_{t-p}) for t = p+1..n.
inline ArimaFit fit_ar(std::span<const double> series, std::size_t p, bool with_intercept = true) {
    if (p < 1) {
        throw std::invalid_argument("AR order must be >= 1");
    }
    if (series.size() < 2 * p + 2) {
        throw std::invalid_argument("AR(" + std::to_string(p) + ") needs at least " + std::to_string(2 * p + 2) +
                                    " observations, got " + std::to_string(series.size()));
    }
    const auto rows = static_cast<Eigen::Index>(series.size() - p);
    const auto cols = static_cast<Eigen::Index>(p + (with_intercept ? 1 : 0));
    Eigen::MatrixXd x(rows, cols);
    Eigen::VectorXd y(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = static_cast<std::size_t>(r) + p;
        Eigen::Index c = 0;
        if (with_intercept) x(r, c++) = 1.0;
        for (std::size_t k = 1; k <= p; ++k) x(r, c++) = series[t - k];
        y[r] = series[t];
    }

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(x);
    const auto& sv = svd.singularValues();
    const double cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : INFINITY;
    if (!std::isfinite(cond) || cond > 1e12) {
        throw NumericalError("AR normal equations are singular (condition number " + std::to_string(cond) + ")");
    }
    const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);

    ArimaFit fit;
    fit.order = {p, 1, 0};
    fit.with_intercept = with_intercept;
    fit.condition_number = cond;
    Eigen::Index c = 0;
    if (with_intercept) fit.intercept = beta[c++];
    for (std::size_t k = 0; k < p; ++k) fit.ar.push_back(beta[c++]);
    const Eigen::VectorXd resid = y - x * beta;
    fit.residuals.assign(resid.data(), resid.data() + resid.size());
    return fit;
}

/// Iterates the AR recursion on the differenced scale, feeding forecasts
/// back, then integrates from `last_level`. `history` holds at least the
/// last p differences, most recent last.
inline std::vector<double> forecast_arima(const ArimaFit& fit, std::span<const double> history, double last_level,
                                          std::size_t horizon) {
    const std::size_t p = fit.ar.size();
    if (history.size() < p) {
        throw std::invalid_argument("forecast needs the last " + std::to_string(p) + " differences");
    }
    std::vector<double> lags(history.end() - static_cast<std::ptrdiff_t>(p), history.end());
    std::vector<double> out;
    out.reserve(horizon);
    double level = last_level;
    for (std::size_t h = 0; h < horizon; ++h) {
        double next = fit.intercept;
        for (std::size_t k = 1; k <= p; ++k) next += fit.ar[k - 1] * lags[lags.size() - k];
        lags.push_back(next);
        level += next;
        out.push_back(level);
    }
    return out;
}

/// ARIMA(p,1,0) on a level series: difference, fit, forecast `horizon` levels.
struct ArimaModel {
    ArimaFit fit;
    std::vector<double> diffs;
    double last_level = 0.0;

    std::vector<double> forecast(std::size_t horizon) const { return forecast_arima(fit, diffs, last_level, horizon); }
};

inline ArimaModel fit_arima(std::span<const double> levels, const ArimaOrder& order = {}, bool with_intercept = true) {
    if (order.d != 1 || order.q != 0) {
        throw std::invalid_argument("only ARIMA(p,1,0) is supported");
    }
    ArimaModel m;
    m.diffs = difference(levels);
    m.fit = fit_ar(m.diffs, order.p, with_intercept);
    m.last_level = levels.back();
    return m;
}

} // namespace covidcast::classical
