#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covidcast/data.hpp"
#include "covidcast/errors.hpp"

namespace covidcast::classical {

// A small stand-in for an additive trend + seasonality regression: a
// continuous piecewise-linear trend with fixed changepoints plus a weekly
// Fourier series, estimated by ridge least squares. Not a port of any
// particular forecasting package.

struct ProphetLiteOptions {
    std::vector<double> changepoints{0.1, 0.3, 0.5, 0.7, 0.9}; // fractions of the training span
    std::size_t fourier_order = 3;
    double period_days = 7.0;
    double ridge = 1.0; // on changepoint deltas and Fourier terms; intercept and base slope are free
};

struct ProphetLiteFit {
    Date start;
    std::size_t n = 0;            // training length in days
    double y_scale = 1.0;         // max |y| over the training window
    std::vector<double> changepoints; // fractions of the training span
    std::vector<Date> changepoint_dates;
    double intercept = 0.0;       // scaled units
    double slope = 0.0;           // per unit of scaled time
    std::vector<double> deltas;   // slope changes at each changepoint
    std::vector<double> fourier;  // sin_1, cos_1, sin_2, cos_2, ...
    std::size_t fourier_order = 3;
    double period_days = 7.0;
    double ridge = 1.0;
    std::vector<double> residuals; // original units

    double time_scale() const { return n > 1 ? static_cast<double>(n - 1) : 1.0; }

    /// Trend slope in original units per day after the last changepoint.
    double final_slope_per_day() const {
        double s = slope;
        for (double d : deltas) s += d;
        return s * y_scale / time_scale();
    }
    double base_slope_per_day() const { return slope * y_scale / time_scale(); }
};

namespace detail {

inline long epoch_day(Date d) { return static_cast<long>(std::chrono::sys_days{d}.time_since_epoch().count()); }

/// Design row for day offset `k` from the training start.
inline Eigen::RowVectorXd prophet_row(double k, long day_number, double time_scale, std::span<const double> changepoints,
                                      std::size_t order, double period) {
    const auto cols = static_cast<Eigen::Index>(2 + changepoints.size() + 2 * order);
    Eigen::RowVectorXd r(cols);
    const double tau = k / time_scale;
    Eigen::Index c = 0;
    r[c++] = 1.0;
    r[c++] = tau;
    for (double cp : changepoints) r[c++] = std::max(0.0, tau - cp);
    constexpr double two_pi = 6.283185307179586476925;
    // phase from the absolute day number keeps weekdays aligned across windows
    const double phase = std::fmod(static_cast<double>(day_number), period) / period;
    for (std::size_t j = 1; j <= order; ++j) {
        r[c++] = std::sin(two_pi * static_cast<double>(j) * phase);
        r[c++] = std::cos(two_pi * static_cast<double>(j) * phase);
    }
    return r;
}

} // namespace detail

inline ProphetLiteFit prophet_lite_fit(Date start, std::span<const double> y, const ProphetLiteOptions& opt = {}) {
    if (y.size() < 14) {
        throw std::invalid_argument("prophet-lite needs at least 14 daily observations, got " + std::to_string(y.size()));
    }
    ProphetLiteFit fit;
    fit.start = start;
    fit.n = y.size();
    fit.changepoints = opt.changepoints;
    fit.fourier_order = opt.fourier_order;
    fit.period_days = opt.period_days;
    fit.ridge = opt.ridge;
    for (double cp : opt.changepoints) {
        fit.changepoint_dates.push_back(add_days(start, std::lround(cp * fit.time_scale())));
    }
    double ymax = 0.0;
    for (double v : y) ymax = std::max(ymax, std::abs(v));
    fit.y_scale = ymax > 0.0 ? ymax : 1.0;

    const auto rows = static_cast<Eigen::Index>(y.size());
    const auto cols = static_cast<Eigen::Index>(2 + opt.changepoints.size() + 2 * opt.fourier_order);
    Eigen::MatrixXd x(rows, cols);
    Eigen::VectorXd z(rows);
    const long day0 = detail::epoch_day(start);
    for (Eigen::Index k = 0; k < rows; ++k) {
        x.row(k) = detail::prophet_row(static_cast<double>(k), day0 + k, fit.time_scale(), opt.changepoints,
                                       opt.fourier_order, opt.period_days);
        z[k] = y[static_cast<std::size_t>(k)] / fit.y_scale;
    }

    Eigen::MatrixXd normal = x.transpose() * x;
    for (Eigen::Index c = 2; c < cols; ++c) normal(c, c) += opt.ridge;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0) {
        throw NumericalError("prophet-lite design is rank deficient after ridge");
    }
    const Eigen::VectorXd beta = ldlt.solve(x.transpose() * z);

    Eigen::Index c = 0;
    fit.intercept = beta[c++];
    fit.slope = beta[c++];
    for (std::size_t j = 0; j < opt.changepoints.size(); ++j) fit.deltas.push_back(beta[c++]);
    for (std::size_t j = 0; j < 2 * opt.fourier_order; ++j) fit.fourier.push_back(beta[c++]);

    const Eigen::VectorXd resid = (z - x * beta) * fit.y_scale;
    fit.residuals.assign(resid.data(), resid.data() + resid.size());
    return fit;
}

inline ProphetLiteFit prophet_lite_fit(const TimeSeries& ts, const ProphetLiteOptions& opt = {}) {
    return prophet_lite_fit(ts.start(), ts.cases(), opt);
}

/// Model value at day offset `k` from the training start (k may exceed n-1).
inline double prophet_lite_value(const ProphetLiteFit& fit, double k) {
    const Eigen::RowVectorXd r =
        detail::prophet_row(k, detail::epoch_day(fit.start) + std::lround(k), fit.time_scale(), fit.changepoints,
                            fit.fourier_order, fit.period_days);
    Eigen::VectorXd beta(r.size());
    Eigen::Index c = 0;
    beta[c++] = fit.intercept;
    beta[c++] = fit.slope;
    for (double d : fit.deltas) beta[c++] = d;
    for (double f : fit.fourier) beta[c++] = f;
    return r.dot(beta) * fit.y_scale;
}

/// Extends the design matrix `horizon` days past the training window.
inline std::vector<double> prophet_lite_forecast(const ProphetLiteFit& fit, std::size_t horizon) {
    std::vector<double> out;
    out.reserve(horizon);
    for (std::size_t h = 1; h <= horizon; ++h) {
        out.push_back(prophet_lite_value(fit, static_cast<double>(fit.n - 1 + h)));
    }
    return out;
}

} // namespace covidcast::classical
