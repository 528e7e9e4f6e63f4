#pragma once

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "covidcast/data.hpp"

namespace covidcast::eval {

/// Absolute percentage error |actual - forecast| / actual * 100.
inline double ape(double actual, double forecast) {
    if (!(actual > 0.0)) {
        throw std::invalid_argument("APE needs a positive actual value, got " + std::to_string(actual));
    }
    return std::abs(actual - forecast) / actual * 100.0;
}

enum class StdConvention { population, sample };

inline std::string_view to_string(StdConvention c) { return c == StdConvention::population ? "population" : "sample"; }

inline double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Standard deviation; population divides by N, sample by N - 1.
inline double stddev(std::span<const double> v, StdConvention c) {
    const std::size_t n = v.size();
    if (n == 0 || (c == StdConvention::sample && n < 2)) return 0.0;
    const double mu = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(c == StdConvention::population ? n : n - 1));
}

struct ErrorReport {
    std::string model;
    std::string schema;
    std::vector<Date> dates; // may be empty
    std::vector<double> ape; // percent, day order
    double mape = 0.0;
    double std_population = 0.0;
    double std_sample = 0.0;
    StdConvention convention = StdConvention::population;

    double std() const { return convention == StdConvention::population ? std_population : std_sample; }
};

inline ErrorReport summarize(std::span<const double> forecasts, std::span<const double> actuals, std::string model,
                             std::string schema = {}, StdConvention convention = StdConvention::population) {
    if (forecasts.size() != actuals.size()) {
        throw std::invalid_argument("summarize: " + std::to_string(forecasts.size()) + " forecasts vs " +
                                    std::to_string(actuals.size()) + " actuals");
    }
    ErrorReport r;
    r.model = std::move(model);
    r.schema = std::move(schema);
    r.convention = convention;
    r.ape.reserve(forecasts.size());
    for (std::size_t k = 0; k < forecasts.size(); ++k) r.ape.push_back(ape(actuals[k], forecasts[k]));
    r.mape = mean(r.ape);
    r.std_population = stddev(r.ape, StdConvention::population);
    r.std_sample = stddev(r.ape, StdConvention::sample);
    return r;
}

/// Returns the convention whose recomputed std agrees with `printed_std`
/// within `tolerance`, preferring population on ties; nullopt if neither.
inline std::optional<StdConvention> match_std_convention(std::span<const double> apes, double printed_std,
                                                         double tolerance) {
    const double pop = stddev(apes, StdConvention::population);
    const double smp = stddev(apes, StdConvention::sample);
    const double dp = std::abs(pop - printed_std);
    const double ds = std::abs(smp - printed_std);
    if (dp <= tolerance && dp <= ds) return StdConvention::population;
    if (ds <= tolerance) return StdConvention::sample;
    return std::nullopt;
}

enum class TableFormat { csv, text };

inline std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string full_precision(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// RFC 4180 quoting for labels such as "ARIMA(6,1,0)".
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

/// Day-by-model table: one row per forecast day and a final MAPE row.
/// CSV cells are 2-decimal percentages; the text form prints `mean±std` in
/// the MAPE row and labels days with their dates when available.
inline void emit_table(std::ostream& out, std::span<const ErrorReport> reports, TableFormat format) {
    if (reports.empty()) {
        throw std::invalid_argument("emit_table needs at least one report");
    }
    const std::size_t days = reports.front().ape.size();
    for (const auto& r : reports) {
        if (r.ape.size() != days) throw std::invalid_argument("reports cover different numbers of days");
    }
    const std::vector<Date>& dates = reports.front().dates;

    if (format == TableFormat::csv) {
        out << "day";
        for (const auto& r : reports) out << ',' << csv_field(r.model);
        out << '\n';
        for (std::size_t d = 0; d < days; ++d) {
            out << d + 1;
            for (const auto& r : reports) out << ',' << fixed2(r.ape[d]);
            out << '\n';
        }
        out << "MAPE";
        for (const auto& r : reports) out << ',' << fixed2(r.mape);
        out << '\n';
        return;
    }

    std::vector<std::string> labels;
    for (std::size_t d = 0; d < days; ++d) {
        std::string label = std::to_string(d + 1) + ". Day";
        if (dates.size() == days) label += " (" + format_date(dates[d]) + ")";
        labels.push_back(std::move(label));
    }
    labels.emplace_back("MAPE");
    std::size_t w0 = 0;
    for (const auto& l : labels) w0 = std::max(w0, l.size());
    std::vector<std::size_t> widths;
    for (const auto& r : reports) {
        // "±" is two bytes in UTF-8 but one column
        widths.push_back(std::max<std::size_t>(r.model.size(), fixed2(r.mape).size() + fixed2(r.std()).size() + 1));
    }
    auto pad = [&](const std::string& s, std::size_t w, std::size_t visible) {
        out << std::string(w > visible ? w - visible : 0, ' ') << s;
    };
    pad("", w0, 0);
    for (std::size_t j = 0; j < reports.size(); ++j) {
        out << "  ";
        pad(reports[j].model, widths[j], reports[j].model.size());
    }
    out << '\n';
    for (std::size_t d = 0; d < days; ++d) {
        out << labels[d] << std::string(w0 - labels[d].size(), ' ');
        for (std::size_t j = 0; j < reports.size(); ++j) {
            out << "  ";
            const std::string cell = fixed2(reports[j].ape[d]) + " %";
            pad(cell, widths[j], cell.size());
        }
        out << '\n';
    }
    out << labels.back() << std::string(w0 - labels.back().size(), ' ');
    for (std::size_t j = 0; j < reports.size(); ++j) {
        out << "  ";
        const std::string cell = fixed2(reports[j].mape) + "±" + fixed2(reports[j].std());
        pad(cell, widths[j], cell.size() - 1);
    }
    out << '\n';
}

inline std::string emit_table(std::span<const ErrorReport> reports, TableFormat format) {
    std::ostringstream os;
    emit_table(os, reports, format);
    return os.str();
}

/// Long format, full precision: `day,model,ape_percent`.
inline void emit_ape_csv(std::ostream& out, std::span<const ErrorReport> reports) {
    out << "day,model,ape_percent\n";
    for (const auto& r : reports) {
        for (std::size_t d = 0; d < r.ape.size(); ++d) {
            out << d + 1 << ',' << csv_field(r.model) << ',' << full_precision(r.ape[d]) << '\n';
        }
    }
}

/// `model,schema,mape,std,convention`.
inline void emit_summary_csv(std::ostream& out, std::span<const ErrorReport> reports) {
    out << "model,schema,mape,std,convention\n";
    for (const auto& r : reports) {
        out << csv_field(r.model) << ',' << csv_field(r.schema) << ',' << full_precision(r.mape) << ',' << full_precision(r.std()) << ','
            << to_string(r.convention) << '\n';
    }
}

} // namespace covidcast::eval
