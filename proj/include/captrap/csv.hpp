#pragma once

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include "captrap/optimize.hpp"

// CSV emission: comma-separated, '\n' line endings, numbers at 12
// significant digits through std::to_chars so the output is byte-identical
// across locales and platforms.

namespace captrap::csv {

inline std::string format_number(double v, int significant_digits = 12) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                   std::chars_format::general, significant_digits);
    if (res.ec != std::errc())
        throw std::runtime_error("csv: number formatting failed");
    return std::string(buf, res.ptr);
}

/// Header `x,<label>...`, one row per grid point, empty field for a failed
/// cell.
inline std::string table_to_csv(const optimize::SweepTable& t) {
    std::string out = "x";
    for (const auto& col : t.columns) {
        out += ',';
        out += col.label;
    }
    out += '\n';
    for (std::size_t i = 0; i < t.x_grid.size(); ++i) {
        out += format_number(t.x_grid[i]);
        for (const auto& col : t.columns) {
            out += ',';
            if (col.values[i]) out += format_number(*col.values[i]);
        }
        out += '\n';
    }
    return out;
}

/// Three-column layout for the optimizer commands: x, value, verdict.
inline std::string verdict_table_to_csv(const optimize::SweepTable& t) {
    if (t.columns.size() != 1)
        throw std::invalid_argument("csv: verdict layout expects one column");
    std::string out = "x,value,verdict\n";
    const auto& col = t.columns[0];
    for (std::size_t i = 0; i < t.x_grid.size(); ++i) {
        out += format_number(t.x_grid[i]);
        out += ',';
        if (col.values[i]) out += format_number(*col.values[i]);
        out += ',';
        out += col.tags[i];
        out += '\n';
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("csv: cannot open " + path + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("csv: short write to " + path);
}

}  // namespace captrap::csv
