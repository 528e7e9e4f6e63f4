#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <random>

#include "covidcast/lstm/forecast.hpp"
#include "support.hpp"

using namespace covidcast;
using namespace covidcast::lstm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (double x : v) out[k++] = x;
    return out;
}

bool same_params(const LstmParams& a, const LstmParams& b) {
    bool same = true;
    zip_tensors([&](const auto& x, const auto& y) { same = same && x.size() == y.size() && x == y; }, a, b);
    return same;
}

LstmParams scalar_params() {
    LstmParams p = LstmParams::zeros(1, 1, 1);
    p.input.wx(0, 0) = 0.5, p.input.wh(0, 0) = -0.3, p.input.b[0] = 0.1;
    p.forget.wx(0, 0) = -0.2, p.forget.wh(0, 0) = 0.4, p.forget.b[0] = 0.3;
    p.output.wx(0, 0) = 0.7, p.output.wh(0, 0) = 0.1, p.output.b[0] = -0.2;
    p.cell.wx(0, 0) = -1.2, p.cell.wh(0, 0) = 0.6, p.cell.b[0] = 0.05;
    p.dense_w(0, 0) = 1.5, p.dense_b[0] = -0.1;
    return p;
}

LstmParams random_params(Eigen::Index hidden, Eigen::Index dim, std::uint64_t seed) {
    LstmParams p = glorot_init(hidden, dim, dim, seed);
    std::mt19937_64 rng(seed);
    zip_tensors([&](auto& t) {
        for (Eigen::Index k = 0; k < t.size(); ++k) t.data()[k] += uniform01(rng) - 0.5;
    }, p);
    return p;
}

/// Predictor adding a fixed step to the last row of the window.
struct StepStub {
    Eigen::VectorXd step;
    Eigen::VectorXd operator()(std::span<const Eigen::VectorXd> w) const { return w.back() + step; }
};

/// Returns the observed next value: the window's last row is looked up by
/// position, counting calls.
struct OracleStub {
    std::shared_ptr<std::size_t> calls = std::make_shared<std::size_t>(0);
    std::vector<Eigen::VectorXd> truth;
    Eigen::VectorXd operator()(std::span<const Eigen::VectorXd>) const { return truth.at((*calls)++); }
};

TrainConfig small_config(std::size_t epochs = 50) {
    TrainConfig c;
    c.epochs = epochs;
    c.hidden = 4;
    c.seed = 11;
    return c;
}

} // namespace

TEST_CASE("elu", "[lstm]") {
    CHECK(elu(0.0) == 0.0);
    CHECK(elu(2.5) == 2.5);
    CHECK_THAT(elu(-1.0), WithinAbs(std::exp(-1.0) - 1.0, 1e-15));
    CHECK_THAT(elu(-1.0), WithinAbs(-0.63212, 1e-5));
    CHECK(activate(Activation::identity, -3.0) == -3.0);
    CHECK(parse_activation("tanh") == Activation::tanh);
    CHECK_THROWS(parse_activation("relu"));
}

TEST_CASE("all-zero parameters give half-open gates and a zero state", "[lstm]") {
    for (Activation g : {Activation::elu, Activation::tanh}) {
        const LstmParams p = LstmParams::zeros(3, 2, 2);
        const auto [next, gates] = lstm_step(p, vec({0.7, -4.0}), LstmState::zeros(3), g);
        CHECK(gates.i == Eigen::VectorXd::Constant(3, 0.5));
        CHECK(gates.f == Eigen::VectorXd::Constant(3, 0.5));
        CHECK(gates.o == Eigen::VectorXd::Constant(3, 0.5));
        CHECK(next.c == Eigen::VectorXd::Zero(3));
        CHECK(next.h == Eigen::VectorXd::Zero(3));
    }
}

TEST_CASE("saturated forget gate carries the cell state", "[lstm]") {
    LstmParams p = LstmParams::zeros(2, 1, 1);
    p.forget.b.setConstant(10.0);
    LstmState s = LstmState::zeros(2);
    s.c = vec({1.0, -2.0});
    const auto [next, gates] = lstm_step(p, vec({0.3}), s, Activation::elu);
    CHECK_THAT(next.c[0], WithinAbs(0.9999546021312976 * 1.0, 1e-15));
    CHECK_THAT(next.c[1], WithinAbs(0.9999546021312976 * -2.0, 1e-15));
}

TEST_CASE("single-unit network matches a hand trace", "[lstm]") {
    const LstmParams p = scalar_params();
    const std::vector<Eigen::VectorXd> seq{vec({0.4}), vec({-0.9})};
    const ForwardResult fw = forward(p, seq, Activation::elu);
    REQUIRE(fw.steps.size() == 2);
    CHECK_THAT(fw.steps[0].next.c[0], WithinAbs(-0.20076243522992318, 1e-12));
    CHECK_THAT(fw.steps[0].next.h[0], WithinAbs(-0.09458254490273497, 1e-12));
    CHECK_THAT(fw.steps[1].next.c[0], WithinAbs(0.3288462011616438, 1e-12));
    CHECK_THAT(fw.steps[1].next.h[0], WithinAbs(0.0991960929190593, 1e-12));
    CHECK_THAT(fw.y[0], WithinAbs(0.04879413937858895, 1e-12));
}

TEST_CASE("g enters only at the candidate and the cell output", "[lstm]") {
    const LstmParams p = random_params(3, 2, 5);
    LstmState s = LstmState::zeros(3);
    s.h = vec({0.2, -0.4, 0.9});
    s.c = vec({-1.0, 0.5, 2.0});
    const Eigen::VectorXd x = vec({0.3, -0.8});

    const auto [lin, gl] = lstm_step(p, x, s, Activation::identity);
    // with g = identity the cell update is affine in the candidate pre-activation
    const Eigen::VectorXd c = gl.f.cwiseProduct(s.c) + gl.i.cwiseProduct(gl.cell_pre);
    CHECK(lin.c.isApprox(c, 1e-14));
    CHECK(lin.h.isApprox(gl.o.cwiseProduct(c), 1e-14));

    // the standard tanh LSTM, written out independently
    const auto [th, gt] = lstm_step(p, x, s, Activation::tanh);
    auto sig = [](const Eigen::VectorXd& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix().eval(); };
    const Eigen::VectorXd i = sig(p.input.wx * x + p.input.wh * s.h + p.input.b);
    const Eigen::VectorXd f = sig(p.forget.wx * x + p.forget.wh * s.h + p.forget.b);
    const Eigen::VectorXd o = sig(p.output.wx * x + p.output.wh * s.h + p.output.b);
    const Eigen::VectorXd cand = (p.cell.wx * x + p.cell.wh * s.h + p.cell.b).array().tanh().matrix();
    const Eigen::VectorXd c2 = f.cwiseProduct(s.c) + i.cwiseProduct(cand);
    CHECK(th.c.isApprox(c2, 1e-13));
    CHECK(th.h.isApprox(o.cwiseProduct(c2.array().tanh().matrix()), 1e-13));
    // gates do not depend on g
    CHECK(gt.i == gl.i);
    CHECK(gt.f == gl.f);
    CHECK(gt.o == gl.o);
}

TEST_CASE("gates stay strictly inside (0,1)", "[lstm][property]") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto g = trial % 2 ? Activation::elu : Activation::tanh;
        const LstmParams p = random_params(4, 2, static_cast<std::uint64_t>(trial));
        LstmState s = LstmState::zeros(4);
        for (int step = 0; step < 5; ++step) {
            Eigen::VectorXd x(2);
            x << 10.0 * uniform01(rng) - 5.0, 10.0 * uniform01(rng) - 5.0;
            auto [next, gates] = lstm_step(p, x, s, g);
            for (const auto* v : {&gates.i, &gates.f, &gates.o}) {
                CHECK(v->minCoeff() > 0.0);
                CHECK(v->maxCoeff() < 1.0);
            }
            s = next;
        }
    }
}

TEST_CASE("forward", "[lstm]") {
    LstmParams zero = LstmParams::zeros(4, 2, 2);
    zero.dense_b = vec({0.25, -3.0});
    const std::vector<Eigen::VectorXd> seq{vec({1, 2}), vec({3, 4}), vec({5, 6})};
    CHECK(predict(zero, seq, Activation::elu) == zero.dense_b);

    const LstmParams p = random_params(4, 2, 9);
    const std::vector<Eigen::VectorXd> one{vec({0.1, 0.9})};
    const auto [state, gates] = lstm_step(p, one[0], LstmState::zeros(4), Activation::elu);
    CHECK(predict(p, one, Activation::elu) == p.dense_w * state.h + p.dense_b);

    const Eigen::VectorXd a = predict(p, seq, Activation::elu);
    const Eigen::VectorXd b = forward(p, seq, Activation::elu).y;
    CHECK(a == b);
    CHECK(predict(p, seq, Activation::elu) == a);

    CHECK_THROWS(predict(p, std::vector<Eigen::VectorXd>{}, Activation::elu));
    CHECK_THROWS(predict(p, std::vector<Eigen::VectorXd>{vec({1})}, Activation::elu));
}

TEST_CASE("BPTT agrees with central finite differences", "[lstm][gradient]") {
    const auto suite = testing::gradient_suite();
    REQUIRE(suite.size() >= 20);
    for (const auto& c : suite) {
        INFO("hidden " << c.hidden << " lookback " << c.lookback << " dim " << c.input_dim << " g "
                       << to_string(c.g));
        CHECK(testing::gradient_max_relative_error(c) < 1e-4);
    }
}

TEST_CASE("output bias gradient is twice the residual", "[lstm][gradient]") {
    const LstmParams p = random_params(3, 2, 4);
    const std::vector<Eigen::VectorXd> seq{vec({0.1, 0.2}), vec({0.3, 0.1})};
    const Eigen::VectorXd target = vec({0.5, -0.5});
    const Gradient g = bptt_gradient(p, seq, target, Activation::elu);
    CHECK(g.grad.dense_b.isApprox(2.0 * (g.y - target), 1e-15));
    CHECK_THAT(g.loss, WithinRel((g.y - target).squaredNorm(), 1e-15));
}

TEST_CASE("zero loss gives a zero gradient", "[lstm][gradient]") {
    const LstmParams p = random_params(3, 2, 4);
    const std::vector<Eigen::VectorXd> seq{vec({0.1, 0.2}), vec({0.3, 0.1})};
    const Eigen::VectorXd y = predict(p, seq, Activation::tanh);
    const Gradient g = bptt_gradient(p, seq, y, Activation::tanh);
    CHECK(g.loss == 0.0);
    zip_tensors([](const auto& t) { CHECK(t.isZero(0.0)); }, g.grad);
}

TEST_CASE("adam", "[lstm][adam]") {
    const LstmParams p0 = random_params(2, 1, 8);

    LstmParams p = p0;
    AdamState st = AdamState::like(p);
    adam_update(p, p.zeros_like(), st, 1);
    CHECK(same_params(p, p0));

    LstmParams ones = p0.zeros_like();
    zip_tensors([](auto& t) { t.setOnes(); }, ones);
    LstmParams q = p0;
    AdamState sq = AdamState::like(q);
    const AdamConfig cfg;
    adam_update(q, ones, sq, 1, cfg);
    // bias-corrected moments are exactly 1 at t=1: step = lr / (1 + eps)
    zip_tensors(
        [&](const auto& after, const auto& before) {
            for (Eigen::Index k = 0; k < after.size(); ++k) {
                CHECK_THAT(after.data()[k] - before.data()[k], WithinRel(-1e-3 / (1.0 + 1e-8), 1e-9));
            }
        },
        q, p0);
    CHECK(sq.step == 1);

    LstmParams r = p0;
    AdamState sr = AdamState::like(r);
    adam_update(r, ones, sr, 1, cfg);
    CHECK(same_params(q, r));
    CHECK_THROWS(adam_update(r, ones, sr, 0, cfg));
}

TEST_CASE("training reaches an exactly representable target", "[lstm][train]") {
    // constant series: every window maps 0.5 to 0.5
    WindowedDataset ds;
    ds.lookback = 1;
    for (int k = 0; k < 10; ++k) ds.samples.push_back({{vec({0.5})}, vec({0.5})});
    TrainConfig cfg = small_config(600);
    const LstmModel m = train(ds, cfg);
    REQUIRE(m.loss_history.size() == 600);
    CHECK(m.loss_history.back() < 1e-6);
}

TEST_CASE("training is deterministic in the seed", "[lstm][train]") {
    const TimeSeries z(parse_date("2020-01-01"), {0.0, 0.1, 0.25, 0.4, 0.6, 0.8, 1.0});
    const WindowedDataset ds = make_windows(z, 2);
    const LstmModel a = train(ds, small_config());
    const LstmModel b = train(ds, small_config());
    CHECK(same_params(a.params, b.params));
    CHECK(a.loss_history == b.loss_history);

    TrainConfig other = small_config();
    other.seed = 12;
    CHECK_FALSE(same_params(a.params, train(ds, other).params));

    TrainConfig shuffled = small_config();
    shuffled.shuffle = true;
    CHECK(same_params(train(ds, shuffled).params, train(ds, shuffled).params));
}

TEST_CASE("training rejects bad configurations", "[lstm][train]") {
    const TimeSeries z(parse_date("2020-01-01"), {0.0, 0.5, 1.0});
    const WindowedDataset ds = make_windows(z, 1);
    TrainConfig c = small_config();
    c.epochs = 0;
    CHECK_THROWS_AS(train(ds, c), ConfigError);
    c = small_config();
    c.adam.learning_rate = 0.0;
    CHECK_THROWS_AS(train(ds, c), ConfigError);
    c = small_config();
    c.adam.learning_rate = 1e307; // weights overflow within a few steps
    c.epochs = 200;
    CHECK_THROWS_AS(train(ds, c), NumericalError);
}

TEST_CASE("paper-scale training loss falls", "[lstm][train][slow]") {
    const TimeSeries ts = load_csv(testing::bundled_csv());
    const SchemaConfig cfg;
    const TrainedSchema t = train_schema(ts, Schema::u2, cfg);
    REQUIRE(t.model.loss_history.size() == 2000);
    CHECK(t.model.loss_history[1999] <= t.model.loss_history[99]);
    CHECK(t.model.params.hidden() == 32);
}

TEST_CASE("recursive forecasting with stub predictors", "[lstm][forecast]") {
    const std::vector<Eigen::VectorXd> seed{vec({0.1}), vec({0.2}), vec({0.3})};
    const auto flat = forecast_recursive([](std::span<const Eigen::VectorXd> w) { return w.back(); }, seed, 15);
    REQUIRE(flat.size() == 15);
    for (const auto& v : flat) CHECK(v[0] == 0.3);

    const LstmParams p = random_params(4, 1, 2);
    const auto net = [&](std::span<const Eigen::VectorXd> w) { return predict(p, w, Activation::elu); };
    const auto one = forecast_recursive(net, seed, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == predict(p, seed, Activation::elu));

    const std::vector<Eigen::VectorXd> seed2{vec({0.5, 0.1}), vec({0.6, 0.2})};
    const auto prog = forecast_recursive(StepStub{vec({0.01, 0.001})}, seed2, 15);
    for (std::size_t h = 0; h < 15; ++h) {
        CHECK_THAT(prog[h][0], WithinAbs(0.6 + 0.01 * static_cast<double>(h + 1), 1e-12));
        CHECK_THAT(prog[h][1], WithinAbs(0.2 + 0.001 * static_cast<double>(h + 1), 1e-12));
    }
    CHECK(forecast_recursive(net, seed, 0).empty());
    CHECK_THROWS(forecast_recursive(net, std::vector<Eigen::VectorXd>{}, 3));
}

TEST_CASE("recursion can be resumed from its own window", "[lstm][forecast][property]") {
    for (std::uint64_t s = 1; s <= 10; ++s) {
        const LstmParams p = random_params(3, 2, s);
        const auto net = [&](std::span<const Eigen::VectorXd> w) { return predict(p, w, Activation::elu); };
        const std::vector<Eigen::VectorXd> seed{vec({0.1, 0.0}), vec({0.4, 0.2}), vec({0.5, 0.3})};
        const std::size_t h = 1 + s % 5, more = 2 + s % 4;
        const auto full = forecast_recursive(net, seed, h + more);
        const auto first = forecast_recursive(net, seed, h);
        std::vector<Eigen::VectorXd> window(seed);
        for (const auto& v : first) {
            window.erase(window.begin());
            window.push_back(v);
        }
        const auto rest = forecast_recursive(net, window, more);
        for (std::size_t k = 0; k < h; ++k) CHECK(full[k] == first[k]);
        for (std::size_t k = 0; k < more; ++k) CHECK(full[h + k] == rest[k]);
    }
}

TEST_CASE("forecast_schema with a perfect oracle has zero error", "[lstm][forecast]") {
    const TimeSeries ts = load_csv(testing::bundled_csv());
    SchemaConfig cfg;
    cfg.training.epochs = 1;
    const TimeSeries window = slice_window(ts, cfg.train).cases_only();
    const Normalizer n = fit_normalizer(window);
    const std::size_t first = *ts.index_of(cfg.train.end) + 1;
    for (Schema schema : {Schema::u1, Schema::u2}) {
        OracleStub oracle;
        for (std::size_t h = 0; h < cfg.horizon; ++h) oracle.truth.push_back(vec({n.normalize(ts.cases()[first + h])}));
        const ForecastRun run = forecast_schema(oracle, n, ts, schema, cfg);
        REQUIRE(run.fully_observed());
        REQUIRE(run.forecasts.size() == 15);
        CHECK(format_date(run.dates.front()) == "2020-04-24");
        CHECK(format_date(run.dates.back()) == "2020-05-08");
        for (std::size_t h = 0; h < 15; ++h) {
            CHECK_THAT(run.forecasts[h], WithinRel(run.actuals[h], 1e-12));
        }
    }
}

TEST_CASE("invalid forecasts are reported as numerical failures", "[lstm][forecast]") {
    const TimeSeries ts = load_csv(testing::bundled_csv());
    const SchemaConfig cfg;
    const Normalizer n = fit_normalizer(slice_window(ts, cfg.train).cases_only());
    const auto negative = [](std::span<const Eigen::VectorXd>) { return vec({-5.0}); };
    CHECK_THROWS_AS(forecast_schema(negative, n, ts, Schema::u2, cfg), NumericalError);
    const auto nan = [](std::span<const Eigen::VectorXd>) { return vec({std::nan("")}); };
    CHECK_THROWS_AS(forecast_schema(nan, n, ts, Schema::u2, cfg), NumericalError);
}

TEST_CASE("schema configuration and data requirements", "[lstm][forecast]") {
    const TimeSeries ts = load_csv(testing::bundled_csv());
    SchemaConfig cfg;
    cfg.horizon = 0;
    CHECK_THROWS_AS(run_schema(ts, Schema::u2, cfg), ConfigError);

    cfg = SchemaConfig{};
    cfg.training.epochs = 2;
    CHECK_THROWS_AS(run_schema(ts.cases_only(), Schema::u3, cfg), DataError);

    // one-step forecasts need observations for every horizon day
    cfg.horizon = 30;
    const Normalizer n = fit_normalizer(slice_window(ts, cfg.train).cases_only());
    CHECK_THROWS_AS(forecast_schema(StepStub{vec({0.01})}, n, ts, Schema::u1, cfg), DataError);
    const ForecastRun long_run = forecast_schema(StepStub{vec({0.01})}, n, ts, Schema::u2, cfg);
    CHECK(long_run.forecasts.size() == 30);
    CHECK(long_run.actuals.size() == 15);
    CHECK_FALSE(long_run.fully_observed());

    CHECK(parse_schema("u3") == Schema::u3);
    CHECK_THROWS(parse_schema("u4"));
}

TEST_CASE("u1 and u2 train the same network", "[lstm][forecast]") {
    const TimeSeries ts = load_csv(testing::bundled_csv());
    SchemaConfig cfg;
    cfg.training.epochs = 20;
    cfg.training.hidden = 8;
    const TrainedSchema a = train_schema(ts, Schema::u1, cfg);
    const TrainedSchema b = train_schema(ts, Schema::u2, cfg);
    CHECK(same_params(a.model.params, b.model.params));
    const TrainedSchema c = train_schema(ts, Schema::u3, cfg);
    CHECK(c.model.params.input_dim() == 2);
    CHECK(c.normalizer.channels() == 2);
}
