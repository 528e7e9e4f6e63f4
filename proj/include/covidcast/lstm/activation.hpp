#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace covidcast::lstm {

/// Choice of the cell nonlinearity `g`. `identity` exists for tests.
enum class Activation { elu, tanh, identity };

inline std::string_view to_string(Activation a) {
    switch (a) {
    case Activation::elu: return "elu";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
    }
    return "?";
}

inline Activation parse_activation(std::string_view name) {
    if (name == "elu") return Activation::elu;
    if (name == "tanh") return Activation::tanh;
    if (name == "identity") return Activation::identity;
    throw std::invalid_argument("unknown activation '" + std::string(name) + "' (expected elu or tanh)");
}

/// Exponential linear unit with alpha = 1.
inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double activate(Activation a, double x) {
    switch (a) {
    case Activation::elu: return elu(x);
    case Activation::tanh: return std::tanh(x);
    case Activation::identity: return x;
    }
    return x;
}

/// Derivative of `activate(a, .)` at the pre-activation `x`.
inline double activate_grad(Activation a, double x) {
    switch (a) {
    case Activation::elu: return x > 0.0 ? 1.0 : std::exp(x);
    case Activation::tanh: {
        const double t = std::tanh(x);
        return 1.0 - t * t;
    }
    case Activation::identity: return 1.0;
    }
    return 1.0;
}

inline Eigen::VectorXd activate(Activation a, const Eigen::VectorXd& x) {
    return x.unaryExpr([a](double v) { return activate(a, v); });
}

inline Eigen::VectorXd activate_grad(Activation a, const Eigen::VectorXd& x) {
    return x.unaryExpr([a](double v) { return activate_grad(a, v); });
}

inline Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
    return x.unaryExpr([](double v) { return sigmoid(v); });
}

} // namespace covidcast::lstm
