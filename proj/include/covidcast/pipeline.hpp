#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <filesystem>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "covidcast/checkpoint.hpp"
#include "covidcast/classical/arima.hpp"
#include "covidcast/classical/holt_winters.hpp"
#include "covidcast/classical/prophet_lite.hpp"
#include "covidcast/data.hpp"
#include "covidcast/errors.hpp"
#include "covidcast/eval.hpp"
#include "covidcast/lstm/forecast.hpp"
#include "covidcast/plot.hpp"

namespace covidcast {

enum class ModelKind { lstm_u1, lstm_u2, lstm_u3, arima, hwaas, prophet_lite };

inline constexpr ModelKind all_models[] = {ModelKind::lstm_u1, ModelKind::lstm_u2, ModelKind::lstm_u3,
                                           ModelKind::arima,   ModelKind::hwaas,   ModelKind::prophet_lite};

inline std::string_view to_string(ModelKind k) {
    switch (k) {
    case ModelKind::lstm_u1: return "lstm-u1";
    case ModelKind::lstm_u2: return "lstm-u2";
    case ModelKind::lstm_u3: return "lstm-u3";
    case ModelKind::arima: return "arima";
    case ModelKind::hwaas: return "hwaas";
    case ModelKind::prophet_lite: return "prophet-lite";
    }
    return "?";
}

inline ModelKind parse_model(std::string_view name) {
    for (ModelKind k : all_models)
        if (to_string(k) == name) return k;
    throw ConfigError("unknown model '" + std::string(name) +
                      "' (expected lstm-u1, lstm-u2, lstm-u3, arima, hwaas or prophet-lite)");
}

inline std::optional<lstm::Schema> schema_of(ModelKind k) {
    switch (k) {
    case ModelKind::lstm_u1: return lstm::Schema::u1;
    case ModelKind::lstm_u2: return lstm::Schema::u2;
    case ModelKind::lstm_u3: return lstm::Schema::u3;
    default: return std::nullopt;
    }
}

/// Column label used in tables and plots.
inline std::string display_name(ModelKind k) {
    switch (k) {
    case ModelKind::lstm_u1: return "U1";
    case ModelKind::lstm_u2: return "U2";
    case ModelKind::lstm_u3: return "U3";
    case ModelKind::arima: return "ARIMA(6,1,0)";
    case ModelKind::hwaas: return "HWAAS";
    case ModelKind::prophet_lite: return "Prophet-lite";
    }
    return "?";
}

/// Everything a single model run needs. Defaults reproduce the reference
/// experiment: train on 2020-03-24..2020-04-23, forecast 15 days.
struct RunConfig {
    std::filesystem::path data = "data/turkey_covid19.csv";
    DateRange train{parse_date("2020-03-24"), parse_date("2020-04-23")};
    std::size_t horizon = 15;
    ModelKind model = ModelKind::lstm_u2;
    std::size_t lookback = 4;
    lstm::Activation activation = lstm::Activation::elu;
    std::size_t epochs = 2000;
    std::uint64_t seed = 42;
    std::filesystem::path out = "out";

    // secondary knobs
    std::size_t hidden = 32;
    double learning_rate = 1e-3;
    std::size_t arima_p = 6;
    bool arima_intercept = false;
    std::size_t hw_period = 7;
    double hw_phi = 0.96;
    double prophet_ridge = 1.0;

    void validate() const {
        if (horizon < 1) throw ConfigError("horizon must be >= 1");
        if (lookback < 1) throw ConfigError("lookback must be >= 1");
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (hidden < 1) throw ConfigError("hidden must be >= 1");
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
        if (arima_p < 1) throw ConfigError("arima_p must be >= 1");
        if (hw_period < 2) throw ConfigError("hw_period must be >= 2");
        if (!(hw_phi > 0.0 && hw_phi <= 1.0)) throw ConfigError("hw_phi must lie in (0, 1]");
        if (!(prophet_ridge >= 0.0)) throw ConfigError("prophet_ridge must be >= 0");
    }

    lstm::SchemaConfig schema_config() const {
        lstm::SchemaConfig s;
        s.train = train;
        s.horizon = horizon;
        s.lookback = lookback;
        s.training.epochs = epochs;
        s.training.hidden = hidden;
        s.training.adam.learning_rate = learning_rate;
        s.training.activation = activation;
        s.training.seed = seed;
        return s;
    }
};

struct ModelResult {
    ModelKind kind = ModelKind::lstm_u2;
    lstm::Activation activation = lstm::Activation::elu;
    std::vector<Date> dates;
    std::vector<double> forecasts;
    std::vector<double> actuals; // leading observed values, may be shorter than forecasts
    std::optional<eval::ErrorReport> report; // when actuals cover the horizon
    checkpoint::json checkpoint;
    std::vector<double> loss_history; // LSTM only
    double seconds = 0.0;
};

namespace detail {

inline void attach_actuals(ModelResult& r, const TimeSeries& ts, const RunConfig& cfg) {
    for (std::size_t h = 0; h < cfg.horizon; ++h) {
        const Date d = add_days(cfg.train.end, static_cast<long>(h) + 1);
        r.dates.push_back(d);
        if (auto k = ts.index_of(d)) r.actuals.push_back(ts.cases()[*k]);
    }
}

inline void attach_report(ModelResult& r) {
    if (r.actuals.size() != r.forecasts.size()) return;
    std::string schema;
    if (auto s = schema_of(r.kind)) schema = std::string(lstm::to_string(*s));
    r.report = eval::summarize(r.forecasts, r.actuals, display_name(r.kind), schema);
    r.report->dates = r.dates;
}

inline ModelResult from_lstm(ModelKind kind, const lstm::TrainedSchema& trained, const TimeSeries& ts,
                             const RunConfig& cfg) {
    ModelResult r;
    r.kind = kind;
    r.activation = cfg.activation;
    const lstm::ForecastRun run = lstm::forecast_schema(trained.model, trained.normalizer, ts, *schema_of(kind),
                                                        cfg.schema_config());
    r.dates = run.dates;
    r.forecasts = run.forecasts;
    r.actuals = run.actuals;
    lstm::TrainedSchema tagged = trained;
    tagged.schema = *schema_of(kind);
    r.checkpoint = checkpoint::save(tagged);
    r.loss_history = trained.model.loss_history;
    attach_report(r);
    return r;
}

} // namespace detail

/// Fits the configured model on the training window and forecasts the
/// horizon. LSTM schemas u1 and u2 train identically; pass `shared` to reuse
/// a network already trained for either of them.
inline ModelResult run_model(const TimeSeries& ts, const RunConfig& cfg,
                             const lstm::TrainedSchema* shared = nullptr) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    ModelResult r;
    if (auto schema = schema_of(cfg.model)) {
        const lstm::SchemaConfig scfg = cfg.schema_config();
        if (shared && *schema != lstm::Schema::u3 && shared->schema != lstm::Schema::u3) {
            r = detail::from_lstm(cfg.model, *shared, ts, cfg);
        } else {
            r = detail::from_lstm(cfg.model, lstm::train_schema(ts, *schema, scfg), ts, cfg);
        }
    } else {
        const TimeSeries window = slice_window(ts, cfg.train);
        r.kind = cfg.model;
        switch (cfg.model) {
        case ModelKind::arima: {
            const auto m = classical::fit_arima(window.cases(), {cfg.arima_p, 1, 0}, cfg.arima_intercept);
            r.forecasts = m.forecast(cfg.horizon);
            r.checkpoint = checkpoint::save(m);
            break;
        }
        case ModelKind::hwaas: {
            classical::HwOptions opt;
            opt.period = cfg.hw_period;
            opt.phi = cfg.hw_phi;
            const auto fit = classical::hw_fit(window.cases(), opt);
            r.forecasts = classical::hw_forecast(fit, cfg.horizon);
            r.checkpoint = checkpoint::save(fit);
            break;
        }
        case ModelKind::prophet_lite: {
            classical::ProphetLiteOptions opt;
            opt.ridge = cfg.prophet_ridge;
            const auto fit = classical::prophet_lite_fit(window, opt);
            r.forecasts = classical::prophet_lite_forecast(fit, cfg.horizon);
            r.checkpoint = checkpoint::save(fit);
            break;
        }
        default: break;
        }
        detail::attach_actuals(r, ts, cfg);
        detail::attach_report(r);
    }
    r.checkpoint["seed"] = std::to_string(cfg.seed);
    r.checkpoint["train"] = format_date(cfg.train.start) + ":" + format_date(cfg.train.end);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

/// Runs independent jobs on up to `hardware_concurrency` threads and
/// returns results in job order.
template <class T>
std::vector<T> run_parallel(std::vector<std::function<T()>> jobs) {
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<T> out(jobs.size());
    for (std::size_t start = 0; start < jobs.size(); start += workers) {
        std::vector<std::future<T>> batch;
        const std::size_t stop = std::min(jobs.size(), start + workers);
        for (std::size_t k = start; k < stop; ++k) batch.push_back(std::async(std::launch::async, jobs[k]));
        for (std::size_t k = start; k < stop; ++k) out[k] = batch[k - start].get();
    }
    return out;
}

/// All six models with the configured activation, in `all_models` order.
/// u1 and u2 share one trained network.
inline std::vector<ModelResult> run_all(const TimeSeries& ts, RunConfig cfg) {
    cfg.validate();
    std::vector<std::function<ModelResult()>> jobs;
    jobs.emplace_back([&ts, cfg]() mutable {
        cfg.model = ModelKind::lstm_u2;
        return run_model(ts, cfg);
    });
    jobs.emplace_back([&ts, cfg]() mutable {
        cfg.model = ModelKind::lstm_u3;
        return run_model(ts, cfg);
    });
    for (ModelKind k : {ModelKind::arima, ModelKind::hwaas, ModelKind::prophet_lite}) {
        jobs.emplace_back([&ts, cfg, k]() mutable {
            cfg.model = k;
            return run_model(ts, cfg);
        });
    }
    auto done = run_parallel(std::move(jobs));

    // u1 reuses the u2 network
    ModelResult u2 = std::move(done[0]);
    const lstm::TrainedSchema trained = checkpoint::load_lstm(u2.checkpoint);
    RunConfig c1 = cfg;
    c1.model = ModelKind::lstm_u1;
    ModelResult u1 = detail::from_lstm(ModelKind::lstm_u1, trained, ts, c1);
    u1.loss_history = u2.loss_history;
    u1.seconds = u2.seconds;
    u1.checkpoint["seed"] = u2.checkpoint["seed"];
    u1.checkpoint["train"] = u2.checkpoint["train"];

    std::vector<ModelResult> out;
    out.push_back(std::move(u1));
    out.push_back(std::move(u2));
    for (std::size_t k = 1; k < done.size(); ++k) out.push_back(std::move(done[k]));
    return out;
}

/// The three LSTM schemas only (u1 and u2 share a network).
inline std::vector<ModelResult> run_lstm_schemas(const TimeSeries& ts, RunConfig cfg) {
    cfg.validate();
    std::vector<std::function<ModelResult()>> jobs;
    for (ModelKind k : {ModelKind::lstm_u2, ModelKind::lstm_u3}) {
        jobs.emplace_back([&ts, cfg, k]() mutable {
            cfg.model = k;
            return run_model(ts, cfg);
        });
    }
    auto done = run_parallel(std::move(jobs));
    const lstm::TrainedSchema trained = checkpoint::load_lstm(done[0].checkpoint);
    RunConfig c1 = cfg;
    c1.model = ModelKind::lstm_u1;
    ModelResult u1 = detail::from_lstm(ModelKind::lstm_u1, trained, ts, c1);
    u1.loss_history = done[0].loss_history;
    u1.checkpoint["seed"] = done[0].checkpoint["seed"];
    u1.checkpoint["train"] = done[0].checkpoint["train"];
    return {std::move(u1), std::move(done[0]), std::move(done[1])};
}


// Published per-day APEs (percent) and mean±std rows used as comparison
// targets by `reproduce` and the acceptance suite.
namespace reference {

inline constexpr std::array<double, 15> ape_u1{0.55, 0.24, 0.53, 0.72, 0.29, 1.07, 1.15, 0.86,
                                               1.16, 0.66, 0.26, 0.48, 0.86, 1.03, 0.64};
inline constexpr std::array<double, 15> ape_u2{0.45, 0.40, 0.88, 1.46, 1.36, 0.54, 0.30, 0.58,
                                               1.23, 1.39, 2.08, 2.57, 3.02, 4.36, 4.67};
inline constexpr std::array<double, 15> ape_u3{0.69, 0.54, 0.94, 1.31, 1.33, 0.99, 0.20, 0.30,
                                               0.21, 0.77, 0.66, 0.50, 1.58, 2.22, 2.68};
inline constexpr std::array<double, 15> ape_arima{0.52, 1.42, 1.81, 2.03, 2.43, 2.64, 2.63, 2.56,
                                                  2.90, 3.85, 4.65, 4.88, 4.86, 5.41, 6.06};
inline constexpr std::array<double, 15> ape_prophet{4.34, 3.12, 1.51, 0.23, 1.67, 2.57, 3.71, 5.17,
                                                    6.75, 8.55, 10.35, 11.91, 13.08, 14.43, 15.86};
inline constexpr std::array<double, 15> ape_hwaas{0.12, 0.11, 0.25, 0.71, 0.82, 0.38, 0.14, 0.19,
                                                  0.33, 0.64, 0.93, 0.97, 0.64, 0.47, 0.34};

struct MeanStd {
    double mean;
    double std;
};

inline constexpr MeanStd u1{0.70, 0.30}, u2{1.69, 1.35}, u3{0.99, 0.51};
inline constexpr MeanStd arima{3.24, 1.56}, prophet{6.88, 4.96}, hwaas{0.47, 0.28};
inline constexpr MeanStd tanh_u1{0.81, 0.51}, tanh_u2{3.33, 2.76}, tanh_u3{3.71, 2.89};

inline constexpr double hwaas_tolerance = 0.5;
inline constexpr double arima_tolerance = 1.5;
inline constexpr double u1_ceiling = 2.0;
inline constexpr double u2_ceiling = 5.0;
inline constexpr double printed_std_tolerance = 0.01; // two printed decimals

inline MeanStd published(ModelKind k) {
    switch (k) {
    case ModelKind::lstm_u1: return u1;
    case ModelKind::lstm_u2: return u2;
    case ModelKind::lstm_u3: return u3;
    case ModelKind::arima: return arima;
    case ModelKind::hwaas: return hwaas;
    case ModelKind::prophet_lite: return prophet;
    }
    return {0, 0};
}

} // namespace reference

/// Convention that reproduces the published HWAAS std from its per-day APEs.
inline eval::StdConvention reference_std_convention() {
    const auto m = eval::match_std_convention(reference::ape_hwaas, reference::hwaas.std,
                                              reference::printed_std_tolerance);
    return m.value_or(eval::StdConvention::population);
}

/// Table column order: the three schemas, then ARIMA, prophet-lite, HWAAS.
inline constexpr ModelKind table_order[] = {ModelKind::lstm_u1, ModelKind::lstm_u2,      ModelKind::lstm_u3,
                                            ModelKind::arima,   ModelKind::prophet_lite, ModelKind::hwaas};

struct Reproduction {
    std::vector<ModelResult> elu;  // all_models order
    std::vector<ModelResult> tanh; // u1, u2, u3
    eval::StdConvention convention = eval::StdConvention::population;
    double seconds = 0.0;

    const ModelResult& get(ModelKind k) const {
        for (const auto& r : elu)
            if (r.kind == k) return r;
        throw std::out_of_range("no result for " + std::string(to_string(k)));
    }
};

inline Reproduction reproduce_runs(const TimeSeries& ts, RunConfig cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig elu = cfg, tanh = cfg;
    elu.activation = lstm::Activation::elu;
    tanh.activation = lstm::Activation::tanh;
    auto tanh_future = std::async(std::launch::async, [&ts, tanh] { return run_lstm_schemas(ts, tanh); });
    Reproduction out;
    out.elu = run_all(ts, elu);
    out.tanh = tanh_future.get();
    out.convention = reference_std_convention();
    for (auto* group : {&out.elu, &out.tanh}) {
        for (auto& r : *group) {
            if (!r.report) {
                throw DataError(DataErrorKind::out_of_range,
                                std::string(to_string(r.kind)) + ": observations do not cover the forecast horizon");
            }
            r.report->convention = out.convention;
        }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    return f;
}

inline std::string verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

inline eval::PlotSeries plot_series(const ModelResult& r, std::string label) {
    return {std::move(label), r.dates, r.forecasts};
}

inline checkpoint::json config_json(const RunConfig& c) {
    return {{"data", c.data.generic_string()},
            {"train", format_date(c.train.start) + ":" + format_date(c.train.end)},
            {"horizon", c.horizon},
            {"model", std::string(to_string(c.model))},
            {"lookback", c.lookback},
            {"activation", std::string(lstm::to_string(c.activation))},
            {"epochs", c.epochs},
            {"seed", c.seed},
            {"hidden", c.hidden},
            {"learning_rate", c.learning_rate},
            {"arima_p", c.arima_p},
            {"arima_intercept", c.arima_intercept},
            {"hw_period", c.hw_period},
            {"hw_phi", c.hw_phi},
            {"prophet_ridge", c.prophet_ridge}};
}

} // namespace detail

/// RunConfig as a JSON object using the config-file field names.
inline checkpoint::json to_json(const RunConfig& c) { return detail::config_json(c); }

/// Markdown comparison of a reproduction with the published numbers. The
/// timestamp, when given, is the only line that varies between runs.
inline std::string reproduction_summary(const Reproduction& rep, const RunConfig& cfg, const std::string& timestamp = {}) {
    using detail::verdict;
    std::ostringstream md;
    md << "# Reproduction summary\n\n";
    if (!timestamp.empty()) md << "Generated " << timestamp << "\n\n";
    md << "Seed " << cfg.seed << ", lookback " << cfg.lookback << ", " << cfg.epochs << " epochs, hidden " << cfg.hidden
       << ", training window " << format_date(cfg.train.start) << ".." << format_date(cfg.train.end) << ", horizon "
       << cfg.horizon << ".\n";
    md << "Std convention: " << eval::to_string(rep.convention)
       << " (the one that reproduces the published HWAAS std from its per-day APEs).\n\n";

    md << "## Per-model MAPE\n\n| model | MAPE | std | published | check |\n|---|---|---|---|---|\n";
    for (ModelKind k : table_order) {
        const auto& r = *rep.get(k).report;
        const auto pub = reference::published(k);
        std::string check = "reference only";
        if (k == ModelKind::hwaas)
            check = verdict(std::abs(r.mape - pub.mean) <= reference::hwaas_tolerance) + " (within ±0.5)";
        else if (k == ModelKind::arima)
            check = verdict(std::abs(r.mape - pub.mean) <= reference::arima_tolerance) + " (within ±1.5)";
        else if (k == ModelKind::lstm_u1)
            check = verdict(r.mape <= reference::u1_ceiling) + " (<= 2, single seed)";
        else if (k == ModelKind::lstm_u2)
            check = verdict(r.mape <= reference::u2_ceiling) + " (<= 5, single seed)";
        else if (k == ModelKind::prophet_lite)
            check = "not a target (substitute model)";
        md << "| " << r.model << " | " << eval::fixed2(r.mape) << " | " << eval::fixed2(r.std()) << " | "
           << eval::fixed2(pub.mean) << "±" << eval::fixed2(pub.std) << " | " << check << " |\n";
    }

    const double u2 = rep.get(ModelKind::lstm_u2).report->mape;
    const double u3 = rep.get(ModelKind::lstm_u3).report->mape;
    md << "\n## Tendencies (single seed; the acceptance suite uses 5-seed medians)\n\n";
    md << "- u3 <= u2: " << verdict(u3 <= u2) << " (" << eval::fixed2(u3) << " vs " << eval::fixed2(u2) << ")\n";
    const char* names[] = {"u1", "u2", "u3"};
    for (std::size_t s = 0; s < 3; ++s) {
        const double e = rep.elu[s].report->mape;
        const double t = rep.tanh[s].report->mape;
        md << "- elu <= tanh on " << names[s] << ": " << verdict(e <= t) << " (" << eval::fixed2(e) << " vs "
           << eval::fixed2(t) << ")\n";
    }
    const auto& prophet = rep.get(ModelKind::prophet_lite).report->ape;
    md << "- prophet-lite error grows over the horizon: "
       << verdict(prophet.back() > prophet[prophet.size() / 2] && prophet[prophet.size() / 2] > 0.0) << "\n";

    md << "\n## Activation ablation\n\n| activation | U1 | U2 | U3 |\n|---|---|---|---|\n";
    for (const auto* group : {&rep.elu, &rep.tanh}) {
        md << "| " << lstm::to_string(group->front().activation);
        for (std::size_t s = 0; s < 3; ++s) {
            const auto& r = *(*group)[s].report;
            md << " | " << eval::fixed2(r.mape) << "±" << eval::fixed2(r.std());
        }
        md << " |\n";
    }
    md << "| published elu | 0.70±0.30 | 1.69±1.35 | 0.99±0.51 |\n";
    md << "| published tanh | 0.81±0.51 | 3.33±2.76 | 3.71±2.89 |\n";

    const std::vector<double> pub_u3(reference::ape_u3.begin(), reference::ape_u3.end());
    md << "\nNote: the published U3 per-day APEs average " << eval::fixed2(eval::mean(pub_u3)) << " with std "
       << eval::fixed2(eval::stddev(pub_u3, rep.convention)) << ", not the printed " << eval::fixed2(reference::u3.mean)
       << "±" << eval::fixed2(reference::u3.std) << ".\n";
    return md.str();
}

/// Runs the full comparison and writes table1.csv, table2.csv,
/// table2_ape.csv, summary.csv, fig3.svg, fig4.svg, summary.md and run.json
/// into `dir`.
inline Reproduction reproduce(const TimeSeries& ts, const RunConfig& cfg, const std::filesystem::path& dir,
                              const std::string& timestamp = {}) {
    Reproduction rep = reproduce_runs(ts, cfg);
    std::filesystem::create_directories(dir);

    std::vector<eval::ErrorReport> table2;
    for (ModelKind k : table_order) table2.push_back(*rep.get(k).report);
    {
        auto f = detail::open_out(dir / "table2.csv");
        eval::emit_table(f, table2, eval::TableFormat::csv);
    }
    {
        auto f = detail::open_out(dir / "table2.txt");
        eval::emit_table(f, table2, eval::TableFormat::text);
    }
    {
        auto f = detail::open_out(dir / "table2_ape.csv");
        eval::emit_ape_csv(f, table2);
    }
    {
        auto f = detail::open_out(dir / "summary.csv");
        eval::emit_summary_csv(f, table2);
    }
    {
        std::vector<eval::ErrorReport> table1;
        for (const auto* group : {&rep.elu, &rep.tanh}) {
            for (std::size_t s = 0; s < 3; ++s) {
                eval::ErrorReport r = *(*group)[s].report;
                r.model = "LSTM-" + std::string(lstm::to_string((*group)[s].activation));
                table1.push_back(std::move(r));
            }
        }
        auto f = detail::open_out(dir / "table1.csv");
        eval::emit_summary_csv(f, table1);
    }

    const TimeSeries span = slice_window(ts, cfg.train.start, rep.elu.front().dates.back());
    const eval::PlotSeries actual{"Actual", [&] {
                                      std::vector<Date> d;
                                      for (std::size_t k = 0; k < span.size(); ++k) d.push_back(span.date(k));
                                      return d;
                                  }(),
                                  span.cases()};
    {
        auto f = detail::open_out(dir / "fig3.svg");
        eval::emit_plot(f, actual,
                        {detail::plot_series(rep.get(ModelKind::lstm_u1), "U1"),
                         detail::plot_series(rep.get(ModelKind::lstm_u2), "U2"),
                         detail::plot_series(rep.get(ModelKind::lstm_u3), "U3")},
                        {"LSTM schemas vs actual total cases", 800, 500});
    }
    {
        auto f = detail::open_out(dir / "fig4.svg");
        eval::emit_plot(f, actual,
                        {detail::plot_series(rep.get(ModelKind::lstm_u2), "U2"),
                         detail::plot_series(rep.get(ModelKind::arima), "ARIMA(6,1,0)"),
                         detail::plot_series(rep.get(ModelKind::hwaas), "HWAAS"),
                         detail::plot_series(rep.get(ModelKind::prophet_lite), "Prophet-lite")},
                        {"Forecasting models vs actual total cases", 800, 500});
    }
    {
        auto f = detail::open_out(dir / "summary.md");
        f << reproduction_summary(rep, cfg, timestamp);
    }
    {
        checkpoint::json manifest;
        manifest["seed"] = std::to_string(cfg.seed);
        manifest["config"] = detail::config_json(cfg);
        manifest["std_convention"] = std::string(eval::to_string(rep.convention));
        manifest["files"] = {"table1.csv", "table2.csv", "table2.txt", "table2_ape.csv", "summary.csv",
                             "fig3.svg",   "fig4.svg",   "summary.md"};
        checkpoint::json models = checkpoint::json::object();
        for (const auto* group : {&rep.elu, &rep.tanh}) {
            for (const auto& r : *group) {
                std::string key(to_string(r.kind));
                if (schema_of(r.kind)) key += "-" + std::string(lstm::to_string(r.activation));
                models[key] = {{"mape", eval::full_precision(r.report->mape)},
                               {"std", eval::full_precision(r.report->std())}};
            }
        }
        manifest["models"] = models;
        auto f = detail::open_out(dir / "run.json");
        f << manifest.dump(1) << '\n';
    }
    return rep;
}

} // namespace covidcast
