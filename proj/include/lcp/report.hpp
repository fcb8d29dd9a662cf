#pragma once

#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "lcp/distributions.hpp"
#include "lcp/pipeline.hpp"

namespace lcp {

namespace report_detail {

inline std::string num(double v, int width) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", 12, v);
    std::ostringstream os;
    os << std::left << std::setw(width) << buf;
    return os.str();
}

inline std::string pad(const std::string& s, int width) {
    std::ostringstream os;
    os << std::left << std::setw(width) << s;
    return os.str();
}

}  // namespace report_detail

/// Forecast-quality table: one row per nonoverlapping evaluation period,
/// one column per horizon, cells are the adaptive/benchmark error ratios
/// (< 1 favors the adaptive forecast).
[[nodiscard]] inline std::string format_msqe_table(const MsqeTable& table) {
    using report_detail::num;
    using report_detail::pad;
    std::ostringstream os;
    os << pad("period", 10);
    for (const std::int64_t h : table.horizons) {
        os << pad("h=" + std::to_string(h), 16);
    }
    os << '\n';
    for (std::size_t p = 0; p < table.ratios.size(); ++p) {
        os << pad(std::to_string(p + 1), 10);
        for (const double v : table.ratios[p]) {
            os << num(v, 16);
        }
        os << '\n';
    }
    return os.str();
}

/// Backtest summary grid: one row per (innovation law, VaR level), one
/// column per horizon, cells are overshoot percentages.
[[nodiscard]] inline std::string format_backtest_grid(const std::vector<VarGridCell>& grid,
                                                      const PipelineConfig& cfg) {
    using report_detail::num;
    using report_detail::pad;
    std::ostringstream os;
    os << pad("law", 12) << pad("level", 10);
    for (const std::int64_t h : cfg.horizons) {
        os << pad("h=" + std::to_string(h), 16);
    }
    os << '\n';
    for (const InnovationLaw law : cfg.laws) {
        for (const double level : cfg.levels) {
            os << pad(to_string(law), 12);
            os << num(100.0 * level, 10);
            for (const std::int64_t h : cfg.horizons) {
                for (const auto& cell : grid) {
                    if (cell.law == law && cell.level == level && cell.h == h) {
                        os << num(100.0 * cell.frequency, 16);
                    }
                }
            }
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace lcp
