#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "isac/metrics.hpp"
#include "isac/optimizer.hpp"

// CSV and SVG emission. CSV is the normative output; every number is
// printed with %.10g so repeated seeded runs are byte-identical.

namespace isac::harness {

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace detail

inline constexpr const char* kTraceHeader =
    "scan,time_s,beam,hypothesis,resi,p_used_dbm,p_budget_dbm,tg_in_region,tg_in_beam,"
    "report_kind";

inline std::string trace_csv(const metrics::ScenarioTrace& trace) {
    std::ostringstream out;
    out << kTraceHeader << '\n';
    for (const auto& r : trace.records) {
        out << r.scan << ',' << detail::fmt(r.time_s) << ',' << r.beam << ','
            << metrics::hypo_name(r.hypothesis) << ',' << detail::fmt(r.resi) << ','
            << detail::fmt(r.p_used_dbm) << ',' << detail::fmt(r.p_budget_dbm) << ','
            << (r.tg_in_region ? 1 : 0) << ',' << (r.tg_in_beam ? 1 : 0) << ','
            << metrics::report_name(r.report) << '\n';
    }
    return out.str();
}

// Minimal parser for the trace CSV; used by the trace-completeness checks
// and the CLI.
inline metrics::ScenarioTrace parse_trace_csv(std::istream& in, const metrics::TraceMeta& meta) {
    metrics::ScenarioTrace trace;
    trace.meta = meta;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        metrics::ScanRecord r;
        auto next = [&] {
            std::getline(ss, field, ',');
            return field;
        };
        r.scan = std::stoi(next());
        r.time_s = std::stod(next());
        r.beam = std::stoi(next());
        const std::string hypo = next();
        for (int h = 0; h <= 7; ++h)
            if (hypo == metrics::hypo_name(static_cast<metrics::HypoLabel>(h)))
                r.hypothesis = static_cast<metrics::HypoLabel>(h);
        r.resi = std::stod(next());
        r.p_used_dbm = std::stod(next());
        r.p_budget_dbm = std::stod(next());
        r.tg_in_region = next() == "1";
        r.tg_in_beam = next() == "1";
        const std::string rep = next();
        for (int k = 0; k <= 3; ++k)
            if (rep == metrics::report_name(static_cast<feedback::ReportKind>(k)))
                r.report = static_cast<feedback::ReportKind>(k);
        trace.records.push_back(r);
    }
    return trace;
}

inline constexpr const char* kMetricsHeader =
    "protocol,threshold_method,p_budget_dbm,p_consumed_dbm,p_det,latency_scans,latency_s,"
    "realloc_ratio,seed_count";

struct MetricsRow {
    std::string protocol;
    std::string threshold_method;
    double p_budget_dbm = 0.0;
    double p_consumed_dbm = 0.0;
    double p_det = 0.0;
    double p_det_min = 0.0;
    double p_det_max = 0.0;
    double latency_scans = 0.0; // NaN when no completed interval
    double latency_s = 0.0;
    double realloc_ratio = 0.0;
    int seed_count = 0;
};

inline std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream out;
    out << kMetricsHeader << '\n';
    for (const auto& r : rows) {
        out << r.protocol << ',' << r.threshold_method << ',' << detail::fmt(r.p_budget_dbm)
            << ',' << detail::fmt(r.p_consumed_dbm) << ',' << detail::fmt(r.p_det) << ','
            << detail::fmt(r.latency_scans) << ',' << detail::fmt(r.latency_s) << ','
            << detail::fmt(r.realloc_ratio) << ',' << r.seed_count << '\n';
    }
    return out.str();
}

inline constexpr const char* kOptHeader = "iteration,T1,T2,T3,f,phi,alpha,mu";

inline std::string optimization_csv(const optimizer::OptimizationTrace& trace) {
    std::ostringstream out;
    out << kOptHeader << '\n';
    for (const auto& it : trace.iterations) {
        out << it.iteration;
        for (int i = 0; i < 3; ++i)
            out << ',' << (i < static_cast<int>(it.t.size()) ? detail::fmt(it.t[i]) : "");
        out << ',' << detail::fmt(it.f) << ',' << detail::fmt(it.phi) << ','
            << detail::fmt(it.alpha) << ',' << detail::fmt(it.mu) << '\n';
    }
    return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

// ---- minimal SVG line charts ----------------------------------------------

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// A small self-contained line chart; CSV stays the normative output.
inline std::string svg_line_chart(const std::string& title, const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<SvgSeries>& series) {
    const int w = 640, h = 440, ml = 70, mr = 20, mt = 40, mb = 55;
    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
        }
    if (x_lo > x_hi) { x_lo = 0; x_hi = 1; }
    if (y_lo > y_hi) { y_lo = 0; y_hi = 1; }
    if (x_hi - x_lo < 1e-12) x_hi = x_lo + 1.0;
    if (y_hi - y_lo < 1e-12) y_hi = y_lo + 1.0;
    const double y_pad = 0.05 * (y_hi - y_lo);
    y_lo -= y_pad;
    y_hi += y_pad;

    auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - y_lo) / (y_hi - y_lo) * (h - mt - mb); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                   "#8c564b"};
    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
        << "' viewBox='0 0 " << w << ' ' << h << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16' "
        << "font-family='sans-serif'>" << title << "</text>\n";
    // axes
    out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
        << "' stroke='black'/>\n";
    out << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
        << "' stroke='black'/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = x_lo + (x_hi - x_lo) * i / 5.0;
        const double yv = y_lo + (y_hi - y_lo) * i / 5.0;
        out << "<text x='" << px(xv) << "' y='" << h - mb + 18
            << "' text-anchor='middle' font-size='11' font-family='sans-serif'>"
            << detail::fmt(std::round(xv * 100) / 100) << "</text>\n";
        out << "<text x='" << ml - 8 << "' y='" << py(yv) + 4
            << "' text-anchor='end' font-size='11' font-family='sans-serif'>"
            << detail::fmt(std::round(yv * 1000) / 1000) << "</text>\n";
        out << "<line x1='" << ml << "' y1='" << py(yv) << "' x2='" << w - mr << "' y2='"
            << py(yv) << "' stroke='#dddddd'/>\n";
    }
    out << "<text x='" << (ml + w - mr) / 2 << "' y='" << h - 12
        << "' text-anchor='middle' font-size='13' font-family='sans-serif'>" << x_label
        << "</text>\n";
    out << "<text x='16' y='" << (mt + h - mb) / 2
        << "' text-anchor='middle' font-size='13' font-family='sans-serif' transform='rotate(-90 "
        << 16 << ' ' << (mt + h - mb) / 2 << ")'>" << y_label << "</text>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = colors[si % 6];
        out << "<polyline fill='none' stroke='" << color << "' stroke-width='2' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (std::isfinite(s.y[i])) out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        out << "'/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (std::isfinite(s.y[i]))
                out << "<circle cx='" << px(s.x[i]) << "' cy='" << py(s.y[i])
                    << "' r='3' fill='" << color << "'/>\n";
        out << "<text x='" << w - mr - 10 << "' y='" << mt + 16 * (si + 1)
            << "' text-anchor='end' font-size='12' font-family='sans-serif' fill='" << color
            << "'>" << s.label << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace isac::harness
