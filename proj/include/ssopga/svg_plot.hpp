#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <string>
#include <vector>

#include "solvers.hpp"
#include "trace_io.hpp"

namespace ssopga {

struct NamedTrace {
    std::string name;
    IterationTrace trace;
};

namespace detail {

inline std::string fixed2(double v)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_label(double v)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline std::string xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Series {
    std::vector<double> x;
    std::vector<double> y;
};

struct Box {
    double left, top, width, height;
};

inline std::pair<double, double> padded_range(double lo, double hi)
{
    if (!(lo <= hi)) return {0.0, 1.0};
    if (lo == hi) {
        const double pad = lo == 0.0 ? 1.0 : 0.5 * std::abs(lo);
        return {lo - pad, hi + pad};
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

inline void draw_panel(std::string& svg, const Box& box, const std::string& title,
                       const std::vector<Series>& series, const std::vector<std::string>& colors)
{
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const Series& s : series) {
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            xlo = std::min(xlo, s.x[k]);
            xhi = std::max(xhi, s.x[k]);
            ylo = std::min(ylo, s.y[k]);
            yhi = std::max(yhi, s.y[k]);
        }
    }
    if (xlo == xhi) xhi = xlo + 1.0;
    if (!(xlo < xhi)) {
        xlo = 0.0;
        xhi = 1.0;
    }
    std::tie(ylo, yhi) = padded_range(ylo, yhi);

    auto px = [&](double x) { return box.left + (x - xlo) / (xhi - xlo) * box.width; };
    auto py = [&](double y) { return box.top + box.height - (y - ylo) / (yhi - ylo) * box.height; };

    svg += "<rect x=\"" + fixed2(box.left) + "\" y=\"" + fixed2(box.top) + "\" width=\""
           + fixed2(box.width) + "\" height=\"" + fixed2(box.height)
           + "\" fill=\"none\" stroke=\"#444\"/>\n";
    svg += "<text x=\"" + fixed2(box.left + box.width / 2) + "\" y=\"" + fixed2(box.top - 8)
           + "\" text-anchor=\"middle\">" + xml_escape(title) + "</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = xlo + (xhi - xlo) * k / 4.0;
        const double fy = ylo + (yhi - ylo) * k / 4.0;
        svg += "<text x=\"" + fixed2(px(fx)) + "\" y=\"" + fixed2(box.top + box.height + 16)
               + "\" text-anchor=\"middle\" font-size=\"11\">" + tick_label(fx) + "</text>\n";
        svg += "<text x=\"" + fixed2(box.left - 6) + "\" y=\"" + fixed2(py(fy) + 4)
               + "\" text-anchor=\"end\" font-size=\"11\">" + tick_label(fy) + "</text>\n";
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        svg += "<polyline fill=\"none\" stroke=\"" + colors[i % colors.size()]
               + "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < series[i].x.size(); ++k) {
            if (k) svg += ' ';
            svg += fixed2(px(series[i].x[k])) + "," + fixed2(py(series[i].y[k]));
        }
        svg += "\"/>\n";
    }
}

}  // namespace detail

/// Energies are drawn on a log10 axis, floored here.
inline constexpr double svg_energy_floor = 1e-16;

/*
 * Two stacked panels, iterate (first component) and log10 energy versus
 * iteration, one polyline per trace per panel and a legend keyed by trace
 * name. Non-finite points are skipped. Output depends only on the inputs.
 */
inline std::string render_svg(const std::vector<NamedTrace>& traces)
{
    if (traces.empty()) throw std::invalid_argument("render_svg: no traces");
    static const std::vector<std::string> colors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                                    "#bcbd22", "#17becf"};
    std::vector<detail::Series> iterates, energies;
    for (const NamedTrace& nt : traces) {
        detail::Series si, se;
        for (const IterationRecord& r : nt.trace.records) {
            const double x = static_cast<double>(r.iter);
            const double yv = r.iterate.empty() ? r.iterate_inf_norm : r.iterate.front();
            if (std::isfinite(yv)) {
                si.x.push_back(x);
                si.y.push_back(yv);
            }
            if (std::isfinite(r.energy)) {
                se.x.push_back(x);
                se.y.push_back(std::log10(std::max(r.energy, svg_energy_floor)));
            }
        }
        iterates.push_back(std::move(si));
        energies.push_back(std::move(se));
    }

    const double width = 960.0;
    const double legend_rows = static_cast<double>(traces.size());
    const double height = 760.0 + 18.0 * legend_rows;
    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fixed2(width)
           + "\" height=\"" + detail::fixed2(height) + "\" font-family=\"sans-serif\" "
           + "font-size=\"13\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    detail::draw_panel(svg, {80.0, 40.0, 840.0, 300.0}, "iterate vs iteration", iterates, colors);
    detail::draw_panel(svg, {80.0, 420.0, 840.0, 300.0}, "log10 energy vs iteration", energies,
                       colors);
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const double y = 760.0 + 18.0 * static_cast<double>(i);
        svg += "<line x1=\"80.00\" y1=\"" + detail::fixed2(y - 4) + "\" x2=\"110.00\" y2=\""
               + detail::fixed2(y - 4) + "\" stroke=\"" + colors[i % colors.size()]
               + "\" stroke-width=\"3\"/>\n";
        svg += "<text x=\"118.00\" y=\"" + detail::fixed2(y) + "\">"
               + detail::xml_escape(traces[i].name) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

/// Reads each trace CSV (ParseError names file and line) and writes the SVG.
inline void plot_traces(const std::vector<std::filesystem::path>& files,
                        const std::filesystem::path& output)
{
    if (files.empty()) throw std::invalid_argument("plot: at least one trace file is required");
    std::vector<NamedTrace> traces;
    for (const auto& f : files) traces.push_back({f.stem().string(), read_trace_file(f)});
    write_file_atomic(output, render_svg(traces));
}

}  // namespace ssopga
