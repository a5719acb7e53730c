#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "tspq/errors.hpp"

namespace tspq {

struct ChartSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '&')
            out += "&amp;";
        else if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else
            out += c;
    }
    return out;
}

inline std::string num(double v, const char* fmt = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

} // namespace detail

/// Renders a small self-contained SVG line chart. No external assets, no
/// scripts; output depends only on the inputs.
inline std::string render_line_chart(const std::string& title,
                                     const std::string& x_label,
                                     const std::string& y_label,
                                     const std::vector<ChartSeries>& series) {
    using detail::num;
    using detail::svg_escape;

    const double width = 840, height = 560;
    const double left = 80, right = 680, top = 60, bottom = 500;

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            if (first) {
                xmin = xmax = x;
                ymin = ymax = y;
                first = false;
            }
            xmin = std::min(xmin, x), xmax = std::max(xmax, x);
            ymin = std::min(ymin, y), ymax = std::max(ymax, y);
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad, ymax += ypad;

    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (right - left); };
    auto py = [&](double y) { return bottom - (y - ymin) / (ymax - ymin) * (bottom - top); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width, "%.0f") +
           "\" height=\"" + num(height, "%.0f") + "\" viewBox=\"0 0 " +
           num(width, "%.0f") + " " + num(height, "%.0f") + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num((left + right) / 2) + "\" y=\"32\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"18\">" + svg_escape(title) + "</text>\n";

    const int ticks = 6;
    for (int t = 0; t < ticks; ++t) {
        double fx = xmin + (xmax - xmin) * t / (ticks - 1);
        double fy = ymin + (ymax - ymin) * t / (ticks - 1);
        std::string gx = num(px(fx)), gy = num(py(fy));
        svg += "<line x1=\"" + gx + "\" y1=\"" + num(top) + "\" x2=\"" + gx +
               "\" y2=\"" + num(bottom) + "\" stroke=\"#dddddd\"/>\n";
        svg += "<line x1=\"" + num(left) + "\" y1=\"" + gy + "\" x2=\"" + num(right) +
               "\" y2=\"" + gy + "\" stroke=\"#dddddd\"/>\n";
        svg += "<text x=\"" + gx + "\" y=\"" + num(bottom + 22) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
               num(fx, "%.6g") + "</text>\n";
        svg += "<text x=\"" + num(left - 8) + "\" y=\"" + num(py(fy) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" +
               num(fy, "%.6g") + "</text>\n";
    }
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(right) +
           "\" y2=\"" + num(bottom) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) +
           "\" y2=\"" + num(bottom) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num((left + right) / 2) + "\" y=\"" + num(bottom + 46) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
           svg_escape(x_label) + "</text>\n";
    svg += "<text x=\"24\" y=\"" + num((top + bottom) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
           "transform=\"rotate(-90 24 " + num((top + bottom) / 2) + ")\">" +
           svg_escape(y_label) + "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % (sizeof palette / sizeof palette[0])];
        std::string pts;
        for (auto [x, y] : series[s].points)
            pts += num(px(x)) + "," + num(py(y)) + " ";
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
        for (auto [x, y] : series[s].points)
            svg += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) +
                   "\" r=\"3\" fill=\"" + color + "\"/>\n";
        double ly = top + 10 + 24.0 * double(s);
        svg += "<line x1=\"" + num(right + 16) + "\" y1=\"" + num(ly) + "\" x2=\"" +
               num(right + 44) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + num(right + 50) + "\" y=\"" + num(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"13\">" +
               svg_escape(series[s].label) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::string& x_label, const std::string& y_label,
                             const std::vector<ChartSeries>& series) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << render_line_chart(title, x_label, y_label, series);
    if (!os) throw IoError("write to '" + path + "' failed");
}

} // namespace tspq
