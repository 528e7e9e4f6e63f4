#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "covidcast/errors.hpp"

namespace covidcast {

using Date = std::chrono::year_month_day;

inline std::optional<Date> try_parse_date(std::string_view text) {
    // strict YYYY-MM-DD
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    int y = 0;
    unsigned m = 0, d = 0;
    auto parse = [](std::string_view s, auto& out) {
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc() && ptr == s.data() + s.size();
    };
    if (!parse(text.substr(0, 4), y) || !parse(text.substr(5, 2), m) || !parse(text.substr(8, 2), d)) {
        return std::nullopt;
    }
    Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) {
        return std::nullopt;
    }
    return date;
}

inline Date parse_date(std::string_view text) {
    if (auto d = try_parse_date(text)) {
        return *d;
    }
    throw std::invalid_argument("invalid ISO-8601 date '" + std::string(text) + "'");
}

inline std::string format_date(Date date) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

inline Date add_days(Date date, long n) {
    return Date{std::chrono::sys_days{date} + std::chrono::days{n}};
}

/// Signed number of days from `from` to `to`.
inline long days_between(Date from, Date to) {
    return static_cast<long>((std::chrono::sys_days{to} - std::chrono::sys_days{from}).count());
}

/// Inclusive calendar range.
struct DateRange {
    Date start;
    Date end;

    std::size_t length() const { return static_cast<std::size_t>(days_between(start, end) + 1); }
    friend bool operator==(const DateRange&, const DateRange&) = default;
};

/// Parses "YYYY-MM-DD:YYYY-MM-DD".
inline DateRange parse_date_range(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw std::invalid_argument("date range must look like START:END, got '" + std::string(text) + "'");
    }
    DateRange r{parse_date(text.substr(0, colon)), parse_date(text.substr(colon + 1))};
    if (days_between(r.start, r.end) < 0) {
        throw std::invalid_argument("date range end precedes start: '" + std::string(text) + "'");
    }
    return r;
}

/// Daily cumulative series with one (cases) or two (cases, deaths) channels.
///
/// Dates are implied by `start()` and the daily cadence, so the
/// "no gaps, strictly increasing" invariant holds by construction; the
/// constructor checks equal channel lengths and non-decreasing values.
class TimeSeries {
public:
    TimeSeries(Date start, std::vector<double> cases, std::optional<std::vector<double>> deaths = std::nullopt)
        : start_(start), cases_(std::move(cases)), deaths_(std::move(deaths)) {
        if (deaths_ && deaths_->size() != cases_.size()) {
            throw DataError(DataErrorKind::malformed_row, "deaths and cases channels differ in length");
        }
        check_channel(cases_, "total_cases");
        if (deaths_) {
            check_channel(*deaths_, "total_deaths");
        }
    }

    std::size_t size() const noexcept { return cases_.size(); }
    bool empty() const noexcept { return cases_.empty(); }
    std::size_t channels() const noexcept { return deaths_ ? 2 : 1; }
    bool has_deaths() const noexcept { return deaths_.has_value(); }

    Date start() const noexcept { return start_; }
    Date end() const { return add_days(start_, static_cast<long>(size()) - 1); }
    Date date(std::size_t k) const { return add_days(start_, static_cast<long>(k)); }
    DateRange range() const { return {start(), end()}; }

    const std::vector<double>& cases() const noexcept { return cases_; }
    const std::optional<std::vector<double>>& deaths() const noexcept { return deaths_; }

    /// Channel 0 is cases, channel 1 deaths.
    const std::vector<double>& channel(std::size_t c) const {
        if (c == 0) return cases_;
        if (c == 1 && deaths_) return *deaths_;
        throw std::out_of_range("time series has no channel " + std::to_string(c));
    }

    Eigen::VectorXd row(std::size_t k) const {
        Eigen::VectorXd v(static_cast<Eigen::Index>(channels()));
        v[0] = cases_.at(k);
        if (deaths_) v[1] = deaths_->at(k);
        return v;
    }

    /// Index of `date`, or nullopt if outside the series.
    std::optional<std::size_t> index_of(Date date) const {
        const long k = days_between(start_, date);
        if (k < 0 || static_cast<std::size_t>(k) >= size()) return std::nullopt;
        return static_cast<std::size_t>(k);
    }

    /// Copy with only the cases channel.
    TimeSeries cases_only() const { return TimeSeries(start_, cases_); }

private:
    static void check_channel(const std::vector<double>& v, const char* name) {
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (!std::isfinite(v[k])) {
                throw DataError(DataErrorKind::malformed_row, std::string(name) + " contains a non-finite value");
            }
            if (k > 0 && v[k] < v[k - 1]) {
                throw DataError(DataErrorKind::non_monotone, std::string(name) + " decreases at position " +
                                                                 std::to_string(k));
            }
        }
    }

    Date start_;
    std::vector<double> cases_;
    std::optional<std::vector<double>> deaths_;
};

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline std::optional<std::int64_t> parse_count(std::string_view s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 0 || s.empty()) return std::nullopt;
    return v;
}

} // namespace detail

/// Reads a `date,total_cases,total_deaths` CSV (the deaths column may be
/// omitted entirely, giving a single-channel series).
inline TimeSeries load_csv(std::istream& in, const std::string& source = "<stream>") {
    std::string line;
    std::size_t lineno = 0;
    auto err = [&](DataErrorKind kind, const std::string& msg) {
        return DataError(kind, source + ":" + std::to_string(lineno) + ": " + msg, lineno);
    };

    if (!std::getline(in, line)) {
        lineno = 1;
        throw err(DataErrorKind::malformed_row, "empty file, expected header");
    }
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool with_deaths = false;
    if (line == "date,total_cases,total_deaths") {
        with_deaths = true;
    } else if (line != "date,total_cases") {
        throw err(DataErrorKind::malformed_row, "unexpected header '" + line + "'");
    }

    std::optional<Date> first, prev;
    std::vector<double> cases, deaths;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const auto fields = detail::split_commas(line);
        if (fields.size() != (with_deaths ? 3u : 2u)) {
            throw err(DataErrorKind::malformed_row, "expected " + std::to_string(with_deaths ? 3 : 2) +
                                                        " fields, got " + std::to_string(fields.size()));
        }
        const auto date = try_parse_date(fields[0]);
        if (!date) throw err(DataErrorKind::malformed_row, "bad date '" + std::string(fields[0]) + "'");
        const auto c = detail::parse_count(fields[1]);
        if (!c) throw err(DataErrorKind::malformed_row, "bad case count '" + std::string(fields[1]) + "'");
        std::optional<std::int64_t> d;
        if (with_deaths) {
            d = detail::parse_count(fields[2]);
            if (!d) throw err(DataErrorKind::malformed_row, "bad death count '" + std::string(fields[2]) + "'");
        }

        if (prev && days_between(*prev, *date) != 1) {
            throw err(DataErrorKind::date_order,
                      "expected " + format_date(add_days(*prev, 1)) + ", got " + format_date(*date));
        }
        if (!cases.empty() && static_cast<double>(*c) < cases.back()) {
            throw err(DataErrorKind::non_monotone, "total_cases drops from " +
                                                       std::to_string(static_cast<std::int64_t>(cases.back())) +
                                                       " to " + std::to_string(*c));
        }
        if (d && !deaths.empty() && static_cast<double>(*d) < deaths.back()) {
            throw err(DataErrorKind::non_monotone, "total_deaths drops from " +
                                                       std::to_string(static_cast<std::int64_t>(deaths.back())) +
                                                       " to " + std::to_string(*d));
        }
        if (!first) first = date;
        prev = date;
        cases.push_back(static_cast<double>(*c));
        if (d) deaths.push_back(static_cast<double>(*d));
    }
    if (!first) {
        throw err(DataErrorKind::too_short, "no data rows");
    }
    if (with_deaths) return TimeSeries(*first, std::move(cases), std::move(deaths));
    return TimeSeries(*first, std::move(cases));
}

inline TimeSeries load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError(DataErrorKind::missing_file, "cannot open '" + path.string() + "'");
    }
    return load_csv(in, path.string());
}

/// Inclusive date slice.
inline TimeSeries slice_window(const TimeSeries& ts, Date start, Date end) {
    if (days_between(start, end) < 0) {
        throw DataError(DataErrorKind::out_of_range, "slice end " + format_date(end) + " precedes start " +
                                                         format_date(start));
    }
    const auto i0 = ts.index_of(start);
    const auto i1 = ts.index_of(end);
    if (!i0 || !i1) {
        throw DataError(DataErrorKind::out_of_range, "slice " + format_date(start) + ".." + format_date(end) +
                                                         " outside series " + format_date(ts.start()) + ".." +
                                                         format_date(ts.end()));
    }
    auto sub = [&](const std::vector<double>& v) {
        return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(*i0),
                                   v.begin() + static_cast<std::ptrdiff_t>(*i1) + 1);
    };
    if (ts.has_deaths()) return TimeSeries(start, sub(ts.cases()), sub(*ts.deaths()));
    return TimeSeries(start, sub(ts.cases()));
}

inline TimeSeries slice_window(const TimeSeries& ts, const DateRange& r) { return slice_window(ts, r.start, r.end); }

/// Per-channel affine map of [min, max] onto [0, 1]. Values outside the fitted
/// range map outside [0, 1].
class Normalizer {
public:
    Normalizer() = default;
    Normalizer(std::vector<double> min, std::vector<double> max) : min_(std::move(min)), max_(std::move(max)) {
        if (min_.size() != max_.size() || min_.empty()) {
            throw std::invalid_argument("normalizer needs matching non-empty min/max vectors");
        }
        for (std::size_t c = 0; c < min_.size(); ++c) {
            if (!(max_[c] > min_[c])) {
                throw DataError(DataErrorKind::degenerate_channel,
                                "channel " + std::to_string(c) + " has max <= min");
            }
        }
    }

    std::size_t channels() const noexcept { return min_.size(); }
    const std::vector<double>& min() const noexcept { return min_; }
    const std::vector<double>& max() const noexcept { return max_; }

    double normalize(double x, std::size_t c = 0) const { return (x - min_.at(c)) / (max_[c] - min_[c]); }
    double denormalize(double z, std::size_t c = 0) const { return z * (max_.at(c) - min_[c]) + min_[c]; }

    Eigen::VectorXd normalize(const Eigen::VectorXd& x) const {
        Eigen::VectorXd out(x.size());
        for (Eigen::Index c = 0; c < x.size(); ++c) out[c] = normalize(x[c], static_cast<std::size_t>(c));
        return out;
    }
    Eigen::VectorXd denormalize(const Eigen::VectorXd& z) const {
        Eigen::VectorXd out(z.size());
        for (Eigen::Index c = 0; c < z.size(); ++c) out[c] = denormalize(z[c], static_cast<std::size_t>(c));
        return out;
    }

    TimeSeries apply(const TimeSeries& ts) const {
        require_channels(ts);
        auto map = [&](const std::vector<double>& v, std::size_t c) {
            std::vector<double> out(v.size());
            std::transform(v.begin(), v.end(), out.begin(), [&](double x) { return normalize(x, c); });
            return out;
        };
        if (ts.has_deaths()) return TimeSeries(ts.start(), map(ts.cases(), 0), map(*ts.deaths(), 1));
        return TimeSeries(ts.start(), map(ts.cases(), 0));
    }

    TimeSeries invert(const TimeSeries& ts) const {
        require_channels(ts);
        auto map = [&](const std::vector<double>& v, std::size_t c) {
            std::vector<double> out(v.size());
            std::transform(v.begin(), v.end(), out.begin(), [&](double z) { return denormalize(z, c); });
            return out;
        };
        if (ts.has_deaths()) return TimeSeries(ts.start(), map(ts.cases(), 0), map(*ts.deaths(), 1));
        return TimeSeries(ts.start(), map(ts.cases(), 0));
    }

private:
    void require_channels(const TimeSeries& ts) const {
        if (ts.channels() != channels()) {
            throw std::invalid_argument("normalizer fitted on " + std::to_string(channels()) +
                                        " channel(s), series has " + std::to_string(ts.channels()));
        }
    }

    std::vector<double> min_;
    std::vector<double> max_;
};

/// Fits min/max per channel on `ts` (the training window).
inline Normalizer fit_normalizer(const TimeSeries& ts) {
    if (ts.size() < 2) {
        throw DataError(DataErrorKind::too_short, "normalizer needs at least 2 observations");
    }
    std::vector<double> lo, hi;
    for (std::size_t c = 0; c < ts.channels(); ++c) {
        const auto [mn, mx] = std::minmax_element(ts.channel(c).begin(), ts.channel(c).end());
        lo.push_back(*mn);
        hi.push_back(*mx);
    }
    return Normalizer(std::move(lo), std::move(hi));
}

struct WindowSample {
    std::vector<Eigen::VectorXd> inputs; // `lookback` consecutive rows, oldest first
    Eigen::VectorXd target;              // the row following the block
};

struct WindowedDataset {
    std::size_t lookback = 0;
    std::vector<WindowSample> samples;

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
    std::size_t input_dim() const { return samples.empty() ? 0 : static_cast<std::size_t>(samples[0].target.size()); }
};

/// Sliding supervised windows: sample k maps rows [k, k+L) to row k+L.
inline WindowedDataset make_windows(const TimeSeries& ts, std::size_t lookback) {
    if (lookback < 1) {
        throw std::invalid_argument("lookback must be >= 1");
    }
    if (ts.size() <= lookback) {
        throw DataError(DataErrorKind::too_short, "series of length " + std::to_string(ts.size()) +
                                                      " cannot form windows with lookback " +
                                                      std::to_string(lookback));
    }
    WindowedDataset ds;
    ds.lookback = lookback;
    ds.samples.reserve(ts.size() - lookback);
    for (std::size_t k = 0; k + lookback < ts.size(); ++k) {
        WindowSample s;
        s.inputs.reserve(lookback);
        for (std::size_t j = 0; j < lookback; ++j) s.inputs.push_back(ts.row(k + j));
        s.target = ts.row(k + lookback);
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

} // namespace covidcast
