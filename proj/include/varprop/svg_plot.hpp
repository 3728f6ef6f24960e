#pragma once

// Minimal SVG line plots: axes, ticks, polylines, legend. Output is a pure
// function of the data series and labels, so plots are regenerable offline
// from the CSV files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "varprop/errors.hpp"

namespace varprop {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

namespace detail {

inline std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

// nice tick step: 1/2/5 times a power of ten
inline double nice_step(double span, int target_ticks) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / target_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double r = raw / mag;
    if (r <= 1.0) return mag;
    if (r <= 2.0) return 2.0 * mag;
    if (r <= 5.0) return 5.0 * mag;
    return 10.0 * mag;
}

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    return colors[i % (sizeof(colors) / sizeof(colors[0]))];
}

} // namespace detail

inline std::string render_line_plot(const std::string& title, const std::string& xlabel,
                                    const std::string& ylabel, const std::vector<PlotSeries>& series,
                                    const std::vector<std::pair<std::string, std::string>>& provenance = {}) {
    const int width = 720, height = 480;
    const int ml = 70, mr = 150, mt = 40, mb = 55;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw dimension_error("render_line_plot: x/y size mismatch in " + s.name);
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (xmin > xmax) { xmin = 0.0; xmax = 1.0; }
    if (ymin > ymax) { ymin = 0.0; ymax = 1.0; }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) { ymax += 0.5; ymin -= 0.5; }

    const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    const auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
           std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " + std::to_string(height) +
           "\">\n";
    for (const auto& [k, v] : provenance) svg += "<!-- " + k + "=" + v + " -->\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + std::to_string(width / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           title + "</text>\n";

    // axes
    svg += "<line x1=\"" + detail::fmt2(ml) + "\" y1=\"" + detail::fmt2(mt + ph) + "\" x2=\"" +
           detail::fmt2(ml + pw) + "\" y2=\"" + detail::fmt2(mt + ph) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + detail::fmt2(ml) + "\" y1=\"" + detail::fmt2(mt) + "\" x2=\"" + detail::fmt2(ml) +
           "\" y2=\"" + detail::fmt2(mt + ph) + "\" stroke=\"black\"/>\n";

    const double xstep = detail::nice_step(xmax - xmin, 6);
    for (double t = std::ceil(xmin / xstep) * xstep; t <= xmax + 1e-9 * xstep; t += xstep) {
        const double x = px(t);
        svg += "<line x1=\"" + detail::fmt2(x) + "\" y1=\"" + detail::fmt2(mt + ph) + "\" x2=\"" + detail::fmt2(x) +
               "\" y2=\"" + detail::fmt2(mt + ph + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::fmt2(x) + "\" y=\"" + detail::fmt2(mt + ph + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + detail::fmt_tick(t) +
               "</text>\n";
    }
    const double ystep = detail::nice_step(ymax - ymin, 6);
    for (double t = std::ceil(ymin / ystep) * ystep; t <= ymax + 1e-9 * ystep; t += ystep) {
        const double y = py(t);
        svg += "<line x1=\"" + detail::fmt2(ml - 5) + "\" y1=\"" + detail::fmt2(y) + "\" x2=\"" + detail::fmt2(ml) +
               "\" y2=\"" + detail::fmt2(y) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::fmt2(ml - 8) + "\" y=\"" + detail::fmt2(y + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + detail::fmt_tick(t) +
               "</text>\n";
    }
    svg += "<text x=\"" + std::to_string(ml + static_cast<int>(pw) / 2) + "\" y=\"" + std::to_string(height - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + xlabel + "</text>\n";
    svg += "<text x=\"18\" y=\"" + std::to_string(mt + static_cast<int>(ph) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 " +
           std::to_string(mt + static_cast<int>(ph) / 2) + ")\">" + ylabel + "</text>\n";

    // polylines
    for (std::size_t si = 0; si < series.size(); ++si) {
        std::string pts;
        for (std::size_t i = 0; i < series[si].x.size(); ++i) {
            if (!std::isfinite(series[si].x[i]) || !std::isfinite(series[si].y[i])) continue;
            pts += detail::fmt2(px(series[si].x[i])) + "," + detail::fmt2(py(series[si].y[i])) + " ";
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(detail::palette(si)) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    }

    // legend
    for (std::size_t si = 0; si < series.size(); ++si) {
        const double y = mt + 14.0 + 18.0 * static_cast<double>(si);
        svg += "<line x1=\"" + detail::fmt2(ml + pw + 10) + "\" y1=\"" + detail::fmt2(y) + "\" x2=\"" +
               detail::fmt2(ml + pw + 30) + "\" y2=\"" + detail::fmt2(y) + "\" stroke=\"" +
               std::string(detail::palette(si)) + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + detail::fmt2(ml + pw + 35) + "\" y=\"" + detail::fmt2(y + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + series[si].name + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace varprop
