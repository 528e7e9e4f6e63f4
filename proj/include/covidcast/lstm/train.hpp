#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "covidcast/data.hpp"
#include "covidcast/errors.hpp"
#include "covidcast/lstm/adam.hpp"
#include "covidcast/lstm/cell.hpp"

namespace covidcast::lstm {

struct TrainConfig {
    std::size_t epochs = 2000;
    std::size_t hidden = 32;
    AdamConfig adam{};
    Activation activation = Activation::elu;
    std::uint64_t seed = 42;
    InitConfig init{};
    bool shuffle = false; // reshuffle sample order every epoch (seeded)

    void validate() const {
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (hidden < 1) throw ConfigError("hidden size must be >= 1");
        if (!(adam.beta1 > 0.0 && adam.beta1 < 1.0) || !(adam.beta2 > 0.0 && adam.beta2 < 1.0)) {
            throw ConfigError("adam betas must lie in (0, 1)");
        }
        if (!(adam.learning_rate > 0.0) || !(adam.epsilon > 0.0)) {
            throw ConfigError("adam learning rate and epsilon must be positive");
        }
    }
};

/// Trained network: weights, optimizer state and the per-epoch mean loss.
struct LstmModel {
    LstmParams params;
    AdamState optimizer;
    TrainConfig config;
    std::size_t lookback = 0;
    std::vector<double> loss_history;

    Activation activation() const { return config.activation; }

    Eigen::VectorXd predict(std::span<const Eigen::VectorXd> window) const {
        return lstm::predict(params, window, config.activation);
    }
    Eigen::VectorXd operator()(std::span<const Eigen::VectorXd> window) const { return predict(window); }
};

/// Sample-by-sample (batch size 1) training in chronological order.
/// Deterministic in (dataset, cfg).
inline LstmModel train(const WindowedDataset& dataset, const TrainConfig& cfg) {
    cfg.validate();
    if (dataset.empty()) {
        throw std::invalid_argument("cannot train on an empty dataset");
    }
    const auto dim = static_cast<Eigen::Index>(dataset.input_dim());
    LstmModel model;
    model.config = cfg;
    model.lookback = dataset.lookback;
    model.params = glorot_init(static_cast<Eigen::Index>(cfg.hidden), dim, dim, cfg.seed, cfg.init);
    model.optimizer = AdamState::like(model.params);
    model.loss_history.reserve(cfg.epochs);

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    std::uint64_t t = 0;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (cfg.shuffle) {
            // Fisher-Yates with our own uniform draw, so the order is portable
            for (std::size_t k = order.size(); k > 1; --k) {
                const auto j = static_cast<std::size_t>(uniform01(shuffle_rng) * static_cast<double>(k));
                std::swap(order[k - 1], order[j]);
            }
        }
        double total = 0.0;
        for (const std::size_t idx : order) {
            const auto& sample = dataset.samples[idx];
            Gradient g = bptt_gradient(model.params, sample.inputs, sample.target, cfg.activation);
            if (!std::isfinite(g.loss)) {
                throw NumericalError("training diverged: non-finite loss at epoch " + std::to_string(epoch));
            }
            total += g.loss;
            adam_update(model.params, g.grad, model.optimizer, ++t, cfg.adam);
        }
        const double mean = total / static_cast<double>(dataset.size());
        if (!all_finite(model.params)) {
            throw NumericalError("training diverged: non-finite weights at epoch " + std::to_string(epoch));
        }
        model.loss_history.push_back(mean);
    }
    return model;
}

} // namespace covidcast::lstm
