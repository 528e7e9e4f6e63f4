#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cstring>
#include <random>

#include "covidcast/checkpoint.hpp"
#include "covidcast/pipeline.hpp"
#include "support.hpp"

using namespace covidcast;
namespace ck = covidcast::checkpoint;

namespace {

bool same_params(const lstm::LstmParams& a, const lstm::LstmParams& b) {
    bool same = true;
    lstm::zip_tensors([&](const auto& x, const auto& y) { same = same && x.size() == y.size() && x == y; }, a, b);
    return same;
}

ck::json reparse(const ck::json& j) { return ck::json::parse(j.dump()); }

std::vector<double> window_cases() {
    return slice_window(load_csv(testing::bundled_csv()), parse_date("2020-03-24"), parse_date("2020-04-23")).cases();
}

} // namespace

TEST_CASE("doubles survive the decimal encoding bit for bit", "[checkpoint][property]") {
    std::mt19937_64 rng(31);
    int tested = 0;
    while (tested < 20000) {
        const double v = std::bit_cast<double>(rng());
        if (!std::isfinite(v)) continue;
        ++tested;
        const double back = ck::decode(ck::json(ck::encode(v)));
        CHECK(std::bit_cast<std::uint64_t>(back) == std::bit_cast<std::uint64_t>(v));
    }
    for (double v : {0.0, -0.0, 1e-310, 5e-324, 1.7976931348623157e308, 0.1, 1.0 / 3.0}) {
        CHECK(std::bit_cast<std::uint64_t>(ck::decode(ck::json(ck::encode(v)))) == std::bit_cast<std::uint64_t>(v));
    }
    CHECK_THROWS_AS(ck::decode(ck::json(1.5)), ck::CheckpointError);
    CHECK_THROWS_AS(ck::decode(ck::json("1.5x")), ck::CheckpointError);
    CHECK_THROWS_AS(ck::decode(ck::json("1e999")), ck::CheckpointError);
}

TEST_CASE("LSTM checkpoint round trip", "[checkpoint]") {
    const TimeSeries ts = load_csv(testing::bundled_csv());
    lstm::SchemaConfig cfg;
    cfg.training.epochs = 15;
    cfg.training.hidden = 6;
    cfg.training.seed = 18446744073709551557ULL; // does not fit a double
    for (lstm::Schema s : {lstm::Schema::u2, lstm::Schema::u3}) {
        const lstm::TrainedSchema t = lstm::train_schema(ts, s, cfg);
        const lstm::TrainedSchema back = ck::load_lstm(reparse(ck::save(t)));
        CHECK(back.schema == s);
        CHECK(back.model.lookback == t.model.lookback);
        CHECK(back.model.config.seed == cfg.training.seed);
        CHECK(back.model.config.activation == t.model.config.activation);
        CHECK(back.normalizer.min() == t.normalizer.min());
        CHECK(back.normalizer.max() == t.normalizer.max());
        CHECK(same_params(back.model.params, t.model.params));
        // forecasts from the restored model are identical (not only close)
        const lstm::ForecastRun a = lstm::forecast_schema(t, ts, cfg);
        const lstm::ForecastRun b = lstm::forecast_schema(back, ts, cfg);
        CHECK(a.forecasts == b.forecasts);
    }
}

TEST_CASE("classical checkpoints round trip", "[checkpoint]") {
    const std::vector<double> y = window_cases();
    const classical::ArimaModel arima = classical::fit_arima(y, {}, false);
    CHECK(ck::load_arima(reparse(ck::save(arima))).forecast(15) == arima.forecast(15));

    const classical::HwFit hw = classical::hw_fit(y);
    const classical::HwFit hw2 = ck::load_hwaas(reparse(ck::save(hw)));
    CHECK(classical::hw_forecast(hw2, 15) == classical::hw_forecast(hw, 15));
    CHECK(hw2.params.alpha == hw.params.alpha);
    CHECK(hw2.fitted == hw.fitted);

    const classical::ProphetLiteFit pl = classical::prophet_lite_fit(parse_date("2020-03-24"), y);
    const classical::ProphetLiteFit pl2 = ck::load_prophet_lite(reparse(ck::save(pl)));
    CHECK(classical::prophet_lite_forecast(pl2, 15) == classical::prophet_lite_forecast(pl, 15));
    CHECK(pl2.changepoint_dates == pl.changepoint_dates);
}

TEST_CASE("checkpoint headers are checked", "[checkpoint]") {
    const ck::json arima = ck::save(classical::fit_arima(window_cases(), {}, false));
    CHECK(ck::kind_of(arima) == "arima");
    CHECK_THROWS_AS(ck::load_hwaas(arima), ck::CheckpointError);
    ck::json wrong = arima;
    wrong["format"] = "something-else";
    CHECK_THROWS_AS(ck::load_arima(wrong), ck::CheckpointError);
    wrong = arima;
    wrong["version"] = 99;
    CHECK_THROWS_AS(ck::load_arima(wrong), ck::CheckpointError);
    CHECK_THROWS_AS(ck::kind_of(ck::json::array()), ck::CheckpointError);
}

TEST_CASE("checkpoint files", "[checkpoint]") {
    const auto dir = std::filesystem::temp_directory_path() / "covidcast_checkpoint_test";
    std::filesystem::create_directories(dir);
    const ck::json j = ck::save(classical::hw_fit(window_cases()));
    ck::write_file(dir / "hw.json", j);
    CHECK(ck::read_file(dir / "hw.json") == j);
    {
        std::ofstream(dir / "broken.json") << "{ not json";
    }
    CHECK_THROWS_AS(ck::read_file(dir / "broken.json"), ck::CheckpointError);
    CHECK_THROWS_AS(ck::read_file(dir / "absent.json"), ck::CheckpointError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_model checkpoints restore the same forecasts", "[checkpoint][pipeline]") {
    const TimeSeries ts = load_csv(testing::bundled_csv());
    RunConfig cfg;
    cfg.epochs = 10;
    cfg.hidden = 4;
    for (ModelKind k : {ModelKind::arima, ModelKind::hwaas, ModelKind::prophet_lite}) {
        cfg.model = k;
        const ModelResult r = run_model(ts, cfg);
        CHECK(r.checkpoint.at("seed") == "42");
        CHECK(ck::kind_of(r.checkpoint) == std::string(to_string(k)));
        std::vector<double> again;
        if (k == ModelKind::arima) again = ck::load_arima(r.checkpoint).forecast(15);
        if (k == ModelKind::hwaas) again = classical::hw_forecast(ck::load_hwaas(r.checkpoint), 15);
        if (k == ModelKind::prophet_lite) again = classical::prophet_lite_forecast(ck::load_prophet_lite(r.checkpoint), 15);
        CHECK(again == r.forecasts);
    }
}
