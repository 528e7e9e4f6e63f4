#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>

namespace covidcast::classical {

struct NelderMeadOptions {
    double initial_step = 0.1;
    double f_tolerance = 1e-12; // relative spread of simplex values
    double x_tolerance = 1e-10; // simplex diameter
    std::size_t max_evaluations = 20000;
};

template <std::size_t N>
struct NelderMeadResult {
    std::array<double, N> x{};
    double value = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Downhill simplex with the standard coefficients (reflection 1,
/// expansion 2, contraction 1/2, shrink 1/2).
template <std::size_t N, class F>
NelderMeadResult<N> nelder_mead(F&& f, const std::array<double, N>& start, const NelderMeadOptions& opt = {}) {
    using Point = std::array<double, N>;
    std::array<Point, N + 1> simplex;
    std::array<double, N + 1> values;
    std::size_t evals = 0;
    auto eval = [&](const Point& p) {
        ++evals;
        return f(p);
    };

    simplex[0] = start;
    for (std::size_t i = 0; i < N; ++i) {
        simplex[i + 1] = start;
        simplex[i + 1][i] += start[i] != 0.0 ? opt.initial_step * std::max(1.0, std::abs(start[i])) : opt.initial_step;
    }
    for (std::size_t i = 0; i <= N; ++i) values[i] = eval(simplex[i]);

    std::array<std::size_t, N + 1> order;
    bool converged = false;
    while (evals < opt.max_evaluations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[N - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= N; ++i)
            for (std::size_t k = 0; k < N; ++k) diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[best][k]));
        const double spread = std::abs(values[worst] - values[best]);
        if (diameter < opt.x_tolerance ||
            spread <= opt.f_tolerance * (std::abs(values[best]) + std::abs(values[worst])) + 1e-300) {
            converged = true;
            break;
        }

        Point centroid{};
        for (std::size_t i = 0; i <= N; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < N; ++k) centroid[k] += simplex[i][k] / static_cast<double>(N);
        }
        auto along = [&](double t) {
            Point p;
            for (std::size_t k = 0; k < N; ++k) p[k] = centroid[k] + t * (simplex[worst][k] - centroid[k]);
            return p;
        };

        const Point reflected = along(-1.0);
        const double fr = eval(reflected);
        if (fr < values[best]) {
            const Point expanded = along(-2.0);
            const double fe = eval(expanded);
            if (fe < fr) {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if (fr < values[second]) {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            const bool outside = fr < values[worst];
            const Point contracted = along(outside ? -0.5 : 0.5);
            const double fc = eval(contracted);
            if (fc < (outside ? fr : values[worst])) {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= N; ++i) {
                    if (i == best) continue;
                    for (std::size_t k = 0; k < N; ++k)
                        simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
                    values[i] = eval(simplex[i]);
                }
            }
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    return {simplex[best], values[best], evals, converged};
}

} // namespace covidcast::classical
