#pragma once

#include <cmath>
#include <concepts>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "covidcast/data.hpp"
#include "covidcast/errors.hpp"
#include "covidcast/lstm/train.hpp"

namespace covidcast::lstm {

/// Anything mapping a window of input vectors (oldest first) to the next
/// vector: trained models and test stubs alike.
template <class P>
concept WindowPredictor = requires(const P& p, std::span<const Eigen::VectorXd> window) {
    { p(window) } -> std::convertible_to<Eigen::VectorXd>;
};

/// Recursive multi-step forecast: each prediction is appended to the window
/// and the oldest row dropped before predicting the next step. Outputs are
/// returned in the predictor's (normalized) units.
template <WindowPredictor P>
std::vector<Eigen::VectorXd> forecast_recursive(const P& predictor, std::vector<Eigen::VectorXd> window,
                                                std::size_t horizon) {
    if (window.empty()) {
        throw std::invalid_argument("recursive forecast needs a non-empty seed window");
    }
    std::vector<Eigen::VectorXd> out;
    out.reserve(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        Eigen::VectorXd next = predictor(std::span<const Eigen::VectorXd>(window));
        window.erase(window.begin());
        window.push_back(next);
        out.push_back(std::move(next));
    }
    return out;
}

enum class Schema {
    u1, // one step ahead from observed values
    u2, // recursive, cases only
    u3, // recursive, cases and deaths
};

inline std::string_view to_string(Schema s) {
    switch (s) {
    case Schema::u1: return "u1";
    case Schema::u2: return "u2";
    case Schema::u3: return "u3";
    }
    return "?";
}

inline Schema parse_schema(std::string_view name) {
    if (name == "u1") return Schema::u1;
    if (name == "u2") return Schema::u2;
    if (name == "u3") return Schema::u3;
    throw std::invalid_argument("unknown schema '" + std::string(name) + "'");
}

inline bool uses_deaths(Schema s) { return s == Schema::u3; }

struct SchemaConfig {
    DateRange train{Date{std::chrono::year{2020}, std::chrono::month{3}, std::chrono::day{24}},
                    Date{std::chrono::year{2020}, std::chrono::month{4}, std::chrono::day{23}}};
    std::size_t horizon = 15;
    std::size_t lookback = 4;
    TrainConfig training{};

    void validate() const {
        if (horizon < 1) throw ConfigError("horizon must be >= 1");
        if (lookback < 1) throw ConfigError("lookback must be >= 1");
        training.validate();
    }
};

/// Point forecasts in case counts for the days following the training window.
struct ForecastRun {
    Schema schema = Schema::u2;
    DateRange train;
    std::size_t horizon = 0;
    std::vector<Date> dates;
    std::vector<double> forecasts;
    std::vector<double> actuals; // observed cases for the leading forecast dates, possibly fewer than horizon

    bool fully_observed() const { return actuals.size() == forecasts.size(); }
};

/// Training-side artefacts of a schema: the fitted scaling and the network.
struct TrainedSchema {
    Schema schema = Schema::u2;
    Normalizer normalizer;
    LstmModel model;
};

/// The training window restricted to the schema's channels.
inline TimeSeries schema_window(const TimeSeries& ts, Schema schema, const DateRange& train) {
    if (uses_deaths(schema) && !ts.has_deaths()) {
        throw DataError(DataErrorKind::malformed_row, "schema u3 needs a total_deaths channel");
    }
    TimeSeries window = slice_window(ts, train);
    return uses_deaths(schema) ? window : window.cases_only();
}

inline TrainedSchema train_schema(const TimeSeries& ts, Schema schema, const SchemaConfig& cfg) {
    cfg.validate();
    const TimeSeries window = schema_window(ts, schema, cfg.train);
    TrainedSchema out{schema, fit_normalizer(window), {}};
    const WindowedDataset ds = make_windows(out.normalizer.apply(window), cfg.lookback);
    out.model = train(ds, cfg.training);
    return out;
}

/// Runs the inference side of a schema with any predictor working in the
/// normalized space of `normalizer`.
template <WindowPredictor P>
ForecastRun forecast_schema(const P& predictor, const Normalizer& normalizer, const TimeSeries& ts, Schema schema,
                            const SchemaConfig& cfg) {
    cfg.validate();
    const auto train_end = ts.index_of(cfg.train.end);
    const auto train_start = ts.index_of(cfg.train.start);
    if (!train_start || !train_end) {
        throw DataError(DataErrorKind::out_of_range, "training window " + format_date(cfg.train.start) + ".." +
                                                         format_date(cfg.train.end) + " not covered by data");
    }
    if (cfg.train.length() < cfg.lookback) {
        throw DataError(DataErrorKind::too_short, "training window shorter than lookback");
    }
    const std::size_t channels = uses_deaths(schema) ? 2 : 1;
    if (normalizer.channels() != channels) {
        throw std::invalid_argument("normalizer channel count does not match schema");
    }
    auto normalized_row = [&](std::size_t k) {
        Eigen::VectorXd r = ts.row(k).head(static_cast<Eigen::Index>(channels));
        return normalizer.normalize(r);
    };

    ForecastRun run;
    run.schema = schema;
    run.train = cfg.train;
    run.horizon = cfg.horizon;
    const std::size_t first = *train_end + 1;

    std::vector<Eigen::VectorXd> normalized_out;
    if (schema == Schema::u1) {
        // observed values enter the input window as the days pass
        if (first + cfg.horizon - 1 > ts.size()) {
            throw DataError(DataErrorKind::out_of_range,
                            "one-step schema needs observations through " +
                                format_date(add_days(cfg.train.end, static_cast<long>(cfg.horizon) - 1)));
        }
        for (std::size_t h = 0; h < cfg.horizon; ++h) {
            std::vector<Eigen::VectorXd> window;
            for (std::size_t j = cfg.lookback; j > 0; --j) window.push_back(normalized_row(first + h - j));
            normalized_out.push_back(predictor(std::span<const Eigen::VectorXd>(window)));
        }
    } else {
        std::vector<Eigen::VectorXd> seed;
        for (std::size_t j = cfg.lookback; j > 0; --j) seed.push_back(normalized_row(first - j));
        normalized_out = forecast_recursive(predictor, std::move(seed), cfg.horizon);
    }

    for (std::size_t h = 0; h < cfg.horizon; ++h) {
        const double cases = normalizer.denormalize(normalized_out[h][0], 0);
        if (!std::isfinite(cases) || cases <= 0.0) {
            throw NumericalError("schema " + std::string(to_string(schema)) + " produced an invalid forecast (" +
                                 std::to_string(cases) + ") on day " + std::to_string(h + 1));
        }
        run.dates.push_back(add_days(cfg.train.end, static_cast<long>(h) + 1));
        run.forecasts.push_back(cases);
        if (first + h < ts.size()) run.actuals.push_back(ts.cases()[first + h]);
    }
    return run;
}

inline ForecastRun forecast_schema(const TrainedSchema& trained, const TimeSeries& ts, const SchemaConfig& cfg) {
    return forecast_schema(trained.model, trained.normalizer, ts, trained.schema, cfg);
}

/// Trains the schema's network on the configured window and forecasts the
/// following `cfg.horizon` days.
inline ForecastRun run_schema(const TimeSeries& ts, Schema schema, const SchemaConfig& cfg) {
    return forecast_schema(train_schema(ts, schema, cfg), ts, cfg);
}

} // namespace covidcast::lstm
