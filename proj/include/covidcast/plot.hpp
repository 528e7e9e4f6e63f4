#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "covidcast/data.hpp"

namespace covidcast::eval {

struct PlotSeries {
    std::string label;
    std::vector<Date> dates;
    std::vector<double> values;
};

struct PlotOptions {
    std::string title;
    int width = 800;
    int height = 500;
};

inline std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += ch;
        }
    }
    return out;
}

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

/// 1, 2 or 5 times a power of ten, giving roughly `target` ticks.
inline double nice_step(double span, int target) {
    const double raw = span / std::max(1, target);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double f : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= f * mag) return f * mag;
    }
    return 10.0 * mag;
}

} // namespace detail

/// Static SVG 1.1 line chart: the observed series first, then one polyline
/// per forecast run, sharing a date axis. Series are drawn in order with a
/// legend in the top-left corner.
inline void emit_plot(std::ostream& out, const PlotSeries& actual, const std::vector<PlotSeries>& runs,
                      const PlotOptions& opt = {}) {
    std::vector<const PlotSeries*> all{&actual};
    for (const auto& r : runs) all.push_back(&r);
    bool any = false;
    for (const auto* s : all) {
        if (s->dates.size() != s->values.size()) {
            throw std::invalid_argument("plot series '" + s->label + "' has mismatched dates and values");
        }
        any = any || !s->values.empty();
    }
    if (!any) {
        throw std::invalid_argument("nothing to plot");
    }

    long d_min = std::numeric_limits<long>::max(), d_max = std::numeric_limits<long>::min();
    double y_min = std::numeric_limits<double>::infinity(), y_max = -y_min;
    const Date origin = [&] {
        for (const auto* s : all)
            if (!s->dates.empty()) return s->dates.front();
        return Date{};
    }();
    for (const auto* s : all) {
        for (std::size_t k = 0; k < s->values.size(); ++k) {
            const long d = days_between(origin, s->dates[k]);
            d_min = std::min(d_min, d);
            d_max = std::max(d_max, d);
            y_min = std::min(y_min, s->values[k]);
            y_max = std::max(y_max, s->values[k]);
        }
    }
    if (d_max == d_min) ++d_max;
    if (!(y_max > y_min)) {
        y_min -= 1.0;
        y_max += 1.0;
    }
    const double y_step = detail::nice_step(y_max - y_min, 6);
    y_min = std::floor(y_min / y_step) * y_step;
    y_max = std::ceil(y_max / y_step) * y_step;

    const double left = 80, right = 20, top = opt.title.empty() ? 20 : 45, bottom = 60;
    const double pw = opt.width - left - right, ph = opt.height - top - bottom;
    auto px = [&](long d) { return left + pw * static_cast<double>(d - d_min) / static_cast<double>(d_max - d_min); };
    auto py = [&](double v) { return top + ph * (1.0 - (v - y_min) / (y_max - y_min)); };

    static const char* palette[] = {"#000000", "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << opt.width << "\" height=\""
        << opt.height << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << opt.width << "\" height=\"" << opt.height << "\" fill=\"#ffffff\"/>\n";
    if (!opt.title.empty()) {
        out << "<text x=\"" << detail::num(opt.width / 2.0) << "\" y=\"25\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"16\">" << xml_escape(opt.title) << "</text>\n";
    }

    out << "<g stroke=\"#dddddd\" stroke-width=\"1\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (double v = y_min; v <= y_max + 0.5 * y_step; v += y_step) {
        out << "<line x1=\"" << detail::num(left) << "\" y1=\"" << detail::num(py(v)) << "\" x2=\""
            << detail::num(left + pw) << "\" y2=\"" << detail::num(py(v)) << "\"/>\n";
        char label[32];
        std::snprintf(label, sizeof(label), "%.0f", v);
        out << "<text x=\"" << detail::num(left - 6) << "\" y=\"" << detail::num(py(v) + 4)
            << "\" text-anchor=\"end\" stroke=\"none\" fill=\"#333333\">" << label << "</text>\n";
    }
    const long span = d_max - d_min;
    const long x_step = std::max(1L, span / 8);
    for (long d = d_min; d <= d_max; d += x_step) {
        out << "<line x1=\"" << detail::num(px(d)) << "\" y1=\"" << detail::num(top) << "\" x2=\""
            << detail::num(px(d)) << "\" y2=\"" << detail::num(top + ph) << "\"/>\n";
        out << "<text x=\"" << detail::num(px(d)) << "\" y=\"" << detail::num(top + ph + 18)
            << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#333333\">" << format_date(add_days(origin, d))
            << "</text>\n";
    }
    out << "</g>\n";
    out << "<rect x=\"" << detail::num(left) << "\" y=\"" << detail::num(top) << "\" width=\"" << detail::num(pw)
        << "\" height=\"" << detail::num(ph) << "\" fill=\"none\" stroke=\"#333333\"/>\n";

    for (std::size_t j = 0; j < all.size(); ++j) {
        const auto& s = *all[j];
        if (s.values.empty()) continue;
        out << "<polyline fill=\"none\" stroke=\"" << palette[j % 7] << "\" stroke-width=\"" << (j == 0 ? "2.5" : "1.8")
            << "\"" << (j == 0 ? "" : " stroke-dasharray=\"6 3\"") << " points=\"";
        for (std::size_t k = 0; k < s.values.size(); ++k) {
            if (k) out << ' ';
            out << detail::num(px(days_between(origin, s.dates[k]))) << ',' << detail::num(py(s.values[k]));
        }
        out << "\"><title>" << xml_escape(s.label) << "</title></polyline>\n";
    }

    out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t j = 0; j < all.size(); ++j) {
        const double y = top + 15 + 18.0 * static_cast<double>(j);
        out << "<line x1=\"" << detail::num(left + 10) << "\" y1=\"" << detail::num(y - 4) << "\" x2=\""
            << detail::num(left + 35) << "\" y2=\"" << detail::num(y - 4) << "\" stroke=\"" << palette[j % 7]
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << detail::num(left + 42) << "\" y=\"" << detail::num(y) << "\">"
            << xml_escape(all[j]->label) << "</text>\n";
    }
    out << "</g>\n</svg>\n";
}

inline std::string emit_plot(const PlotSeries& actual, const std::vector<PlotSeries>& runs, const PlotOptions& opt = {}) {
    std::ostringstream os;
    emit_plot(os, actual, runs, opt);
    return os.str();
}

} // namespace covidcast::eval
