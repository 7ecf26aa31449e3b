#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "captrap/csv.hpp"

// Minimal SVG line charts rendered straight from a SweepTable. The CSVs are
// the contract; these are a convenience behind --plots.

namespace captrap::plot {

namespace detail {

inline const char* color_of(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    return palette[i % 8];
}

}  // namespace detail

inline std::string table_to_svg(const optimize::SweepTable& t,
                                const std::string& title) {
    const double width = 720, height = 480;
    const double ml = 70, mr = 180, mt = 40, mb = 50;
    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    for (double x : t.x_grid) {
        x_lo = std::min(x_lo, x);
        x_hi = std::max(x_hi, x);
    }
    for (const auto& col : t.columns)
        for (const auto& v : col.values)
            if (v && std::isfinite(*v)) {
                y_lo = std::min(y_lo, *v);
                y_hi = std::max(y_hi, *v);
            }
    if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
    if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    auto sx = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * (width - ml - mr); };
    auto sy = [&](double y) {
        return height - mb - (y - y_lo) / (y_hi - y_lo) * (height - mt - mb);
    };
    auto fmt = [](double v) { return csv::format_number(v, 4); };

    std::string svg = "<svg xmlns='http://www.w3.org/2000/svg' width='" + fmt(width) +
                      "' height='" + fmt(height) + "'>\n";
    svg += "<rect width='100%' height='100%' fill='white'/>\n";
    svg += "<text x='" + fmt(width / 2) + "' y='22' text-anchor='middle' "
           "font-family='sans-serif' font-size='15'>" + title + "</text>\n";
    svg += "<rect x='" + fmt(ml) + "' y='" + fmt(mt) + "' width='" +
           fmt(width - ml - mr) + "' height='" + fmt(height - mt - mb) +
           "' fill='none' stroke='black'/>\n";
    // axis ticks
    for (int i = 0; i <= 5; ++i) {
        const double gx = x_lo + (x_hi - x_lo) * i / 5.0;
        const double gy = y_lo + (y_hi - y_lo) * i / 5.0;
        svg += "<text x='" + fmt(sx(gx)) + "' y='" + fmt(height - mb + 18) +
               "' text-anchor='middle' font-family='sans-serif' font-size='11'>" +
               fmt(gx) + "</text>\n";
        svg += "<text x='" + fmt(ml - 8) + "' y='" + fmt(sy(gy) + 4) +
               "' text-anchor='end' font-family='sans-serif' font-size='11'>" +
               fmt(gy) + "</text>\n";
    }
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        const auto& col = t.columns[c];
        bool broken = true;
        std::string path;
        for (std::size_t i = 0; i < t.x_grid.size(); ++i) {
            if (!col.values[i] || !std::isfinite(*col.values[i])) {
                broken = true;
                continue;
            }
            path += broken ? "M" : "L";
            path += fmt(sx(t.x_grid[i])) + " " + fmt(sy(*col.values[i])) + " ";
            broken = false;
        }
        svg += "<path d='" + path + "' fill='none' stroke='" + detail::color_of(c) +
               "' stroke-width='1.6'/>\n";
        svg += "<text x='" + fmt(width - mr + 12) + "' y='" +
               fmt(mt + 18 + 18.0 * static_cast<double>(c)) +
               "' font-family='sans-serif' font-size='12' fill='" +
               detail::color_of(c) + "'>" + col.label + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace captrap::plot
