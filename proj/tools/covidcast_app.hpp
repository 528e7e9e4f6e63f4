#pragma once

#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "covidcast/pipeline.hpp"

#ifndef COVIDCAST_DEFAULT_DATA
#define COVIDCAST_DEFAULT_DATA "data/turkey_covid19.csv"
#endif

namespace covidcast::app {

enum ExitCode { ok = 0, config_error = 1, data_error = 2, numerical_error = 3 };

struct Flags {
    std::optional<std::string> data, model, train, activation, out, config;
    std::optional<std::size_t> horizon, lookback, epochs;
    std::optional<std::uint64_t> seed;
};

inline void apply_json(RunConfig& c, const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, v] : j.items()) {
        try {
            if (key == "data") c.data = v.get<std::string>();
            else if (key == "train") c.train = parse_date_range(v.get<std::string>());
            else if (key == "horizon") c.horizon = v.get<std::size_t>();
            else if (key == "model") c.model = parse_model(v.get<std::string>());
            else if (key == "lookback") c.lookback = v.get<std::size_t>();
            else if (key == "activation") c.activation = lstm::parse_activation(v.get<std::string>());
            else if (key == "epochs") c.epochs = v.get<std::size_t>();
            else if (key == "seed") c.seed = v.is_string() ? std::stoull(v.get<std::string>()) : v.get<std::uint64_t>();
            else if (key == "out") c.out = v.get<std::string>();
            else if (key == "hidden") c.hidden = v.get<std::size_t>();
            else if (key == "learning_rate") c.learning_rate = v.get<double>();
            else if (key == "arima_p") c.arima_p = v.get<std::size_t>();
            else if (key == "arima_intercept") c.arima_intercept = v.get<bool>();
            else if (key == "hw_period") c.hw_period = v.get<std::size_t>();
            else if (key == "hw_phi") c.hw_phi = v.get<double>();
            else if (key == "prophet_ridge") c.prophet_ridge = v.get<double>();
            else throw ConfigError("unknown config key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        } catch (const std::invalid_argument& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
}

/// Defaults, then the JSON config file, then explicit flags.
inline RunConfig resolve(const Flags& f) {
    RunConfig c;
    c.data = COVIDCAST_DEFAULT_DATA;
    if (f.config) {
        std::ifstream in(*f.config);
        if (!in) throw ConfigError("cannot read config file '" + *f.config + "'");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("config file '" + *f.config + "': " + e.what());
        }
        apply_json(c, j);
    }
    try {
        if (f.data) c.data = *f.data;
        if (f.train) c.train = parse_date_range(*f.train);
        if (f.horizon) c.horizon = *f.horizon;
        if (f.model) c.model = parse_model(*f.model);
        if (f.lookback) c.lookback = *f.lookback;
        if (f.activation) c.activation = lstm::parse_activation(*f.activation);
        if (f.epochs) c.epochs = *f.epochs;
        if (f.seed) c.seed = *f.seed;
        if (f.out) c.out = *f.out;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    c.validate();
    return c;
}

inline void check_dates(const RunConfig& c, const TimeSeries& ts) {
    if (!ts.index_of(c.train.start) || !ts.index_of(c.train.end)) {
        throw DataError(DataErrorKind::out_of_range, "training window " + format_date(c.train.start) + ".." +
                                                         format_date(c.train.end) + " is outside the data (" +
                                                         format_date(ts.start()) + ".." + format_date(ts.end()) + ")");
    }
}

inline std::string now_utc() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline int cmd_validate(const RunConfig& c, std::ostream& out) {
    const TimeSeries ts = load_csv(c.data);
    out << ts.size() << " days, " << format_date(ts.start()) << ".." << format_date(ts.end()) << ", OK\n";
    return ok;
}

inline int cmd_run(const RunConfig& c, std::ostream& out) {
    const TimeSeries ts = load_csv(c.data);
    check_dates(c, ts);
    const ModelResult r = run_model(ts, c);
    std::filesystem::create_directories(c.out);
    const std::string stem(to_string(c.model));
    {
        std::ofstream f(c.out / ("forecast_" + stem + ".csv"), std::ios::binary);
        f << "date,forecast,actual,seed\n";
        for (std::size_t h = 0; h < r.forecasts.size(); ++h) {
            f << format_date(r.dates[h]) << ',' << eval::full_precision(r.forecasts[h]) << ',';
            if (h < r.actuals.size()) f << eval::full_precision(r.actuals[h]);
            f << ',' << c.seed << '\n';
        }
    }
    checkpoint::write_file(c.out / ("checkpoint_" + stem + ".json"), r.checkpoint);
    out << "wrote " << r.forecasts.size() << " forecasts to " << (c.out / ("forecast_" + stem + ".csv")).string()
        << '\n';
    if (r.report) {
        const std::vector<eval::ErrorReport> reports{*r.report};
        {
            std::ofstream f(c.out / ("errors_" + stem + ".csv"), std::ios::binary);
            eval::emit_ape_csv(f, reports);
        }
        {
            std::ofstream f(c.out / ("summary_" + stem + ".csv"), std::ios::binary);
            eval::emit_summary_csv(f, reports);
        }
        out << stem << " MAPE " << eval::fixed2(r.report->mape) << "% (std " << eval::fixed2(r.report->std())
            << ", " << eval::to_string(r.report->convention) << ")\n";
    } else {
        out << stem << " MAPE n/a (observations end before the horizon)\n";
    }
    return ok;
}

inline int cmd_reproduce(const RunConfig& c, std::ostream& out) {
    const TimeSeries ts = load_csv(c.data);
    check_dates(c, ts);
    const Reproduction rep = reproduce(ts, c, c.out, now_utc());
    std::vector<eval::ErrorReport> table;
    for (ModelKind k : table_order) table.push_back(*rep.get(k).report);
    eval::emit_table(out, table, eval::TableFormat::text);
    out << "outputs in " << c.out.string() << " (" << eval::fixed2(rep.seconds) << " s)\n";
    return ok;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Forecast cumulative COVID-19 cases with an LSTM and classical baselines"};
    app.require_subcommand(1);
    Flags f;

    auto common = [&f](CLI::App* sub) {
        sub->add_option("--data", f.data, "input CSV (date,total_cases[,total_deaths])");
        sub->add_option("--config", f.config, "JSON file with RunConfig fields; flags override it");
    };
    auto modelling = [&f](CLI::App* sub) {
        sub->add_option("--train", f.train, "training window START:END (YYYY-MM-DD)");
        sub->add_option("--horizon", f.horizon, "days to forecast");
        sub->add_option("--lookback", f.lookback, "input window length L");
        sub->add_option("--epochs", f.epochs, "LSTM training epochs");
        sub->add_option("--seed", f.seed, "random seed");
        sub->add_option("--out", f.out, "output directory");
    };
    CLI::App* validate = app.add_subcommand("validate", "check a data file");
    common(validate);
    CLI::App* run = app.add_subcommand("run", "fit one model and forecast");
    common(run);
    modelling(run);
    run->add_option("--model", f.model, "lstm-u1, lstm-u2, lstm-u3, arima, hwaas or prophet-lite");
    run->add_option("--activation", f.activation, "LSTM cell activation: elu or tanh");
    CLI::App* repro = app.add_subcommand("reproduce", "run every model and write tables and plots");
    common(repro);
    modelling(repro);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : config_error;
    }

    try {
        RunConfig c = resolve(f);
        if (*validate) return cmd_validate(c, out);
        if (*run) return cmd_run(c, out);
        if (!f.out && !f.config) c.out = "reproduction";
        return cmd_reproduce(c, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return numerical_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return config_error;
    }
}

} // namespace covidcast::app
