#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lcp/distributions.hpp"
#include "lcp/errors.hpp"

namespace lcp {

/// Value-at-Risk quantile forecast for the aggregated return over the next
/// h steps: sqrt(h sigma^2) times the level quantile of the innovation law.
/// The empirical law takes the one-step quantile of the residual pool and
/// scales it by sqrt(h), mirroring the parametric laws.
[[nodiscard]] inline double var_quantile(double sigma2, std::int64_t h, double level,
                                         InnovationLaw law,
                                         const std::vector<double>* residual_pool = nullptr,
                                         std::int64_t min_pool = 100) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        throw ValueError("variance forecast must be positive");
    }
    if (h < 1) {
        throw ValueError("horizon must be at least 1");
    }
    detail::check_level(level);
    double q = 0.0;
    switch (law) {
        case InnovationLaw::gaussian:
            q = gaussian_quantile(level);
            break;
        case InnovationLaw::student5:
            q = student5_unit_quantile(level);
            break;
        case InnovationLaw::empirical: {
            if (residual_pool == nullptr ||
                static_cast<std::int64_t>(residual_pool->size()) < min_pool) {
                throw ValueError("empirical law needs a residual pool of at least " +
                                 std::to_string(min_pool) + " values");
            }
            q = empirical_quantile(*residual_pool, level);
            break;
        }
    }
    return std::sqrt(static_cast<double>(h) * sigma2) * q;
}

/// Supervisory traffic-light zone for the number of level-1% exceptions in
/// a 250-day window: fewer than 5 is green, 5 to 9 yellow, 10 or more red.
enum class Zone { green, yellow, red };

[[nodiscard]] inline const char* to_string(Zone z) noexcept {
    switch (z) {
        case Zone::green: return "green";
        case Zone::yellow: return "yellow";
        case Zone::red: return "red";
    }
    return "?";
}

[[nodiscard]] inline Zone zone_for_count(std::int64_t exceptions) {
    if (exceptions < 0) {
        throw ValueError("exception count cannot be negative");
    }
    if (exceptions >= 10) {
        return Zone::red;
    }
    if (exceptions >= 5) {
        return Zone::yellow;
    }
    return Zone::green;
}

/// One scored forecast: the VaR value predicted at `stamp` for the
/// aggregated return over the next h observations, the realized aggregated
/// return, and whether the realized return undershot the forecast (strict).
struct VarForecast {
    std::int64_t stamp;
    std::int64_t h;
    double level;
    InnovationLaw law;
    double var_value;
    double realized;
    bool exception;
};

struct BacktestWindow {
    std::int64_t first_stamp;
    std::int64_t last_stamp;
    std::int64_t exceptions;
    Zone zone;
};

struct BacktestReport {
    std::int64_t scored = 0;
    std::int64_t exceptions = 0;
    double frequency = 0.0;
    std::int64_t window_size = 250;
    std::vector<BacktestWindow> windows;  // consecutive full windows of scored stamps
};

/// Aggregates scored forecasts of one (horizon, level, law) cell into the
/// overall exception frequency and per-window zone classification. Rows
/// must be homogeneous in the cell coordinates and strictly ordered by
/// stamp; only full windows receive a zone.
[[nodiscard]] inline BacktestReport backtest(const std::vector<VarForecast>& rows,
                                             std::int64_t window = 250) {
    if (rows.empty()) {
        throw ValueError("cannot backtest zero scored forecasts");
    }
    if (window < 1) {
        throw ValueError("window must be at least 1");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].h != rows[0].h || rows[i].level != rows[0].level ||
            rows[i].law != rows[0].law) {
            throw ValueError("backtest rows mix forecast cells");
        }
        if (i > 0 && rows[i].stamp <= rows[i - 1].stamp) {
            throw ValueError("backtest rows must be strictly ordered by stamp");
        }
    }
    BacktestReport report;
    report.window_size = window;
    report.scored = static_cast<std::int64_t>(rows.size());
    for (const auto& row : rows) {
        report.exceptions += row.exception ? 1 : 0;
    }
    report.frequency = static_cast<double>(report.exceptions) / static_cast<double>(report.scored);
    for (std::size_t base = 0; base + static_cast<std::size_t>(window) <= rows.size();
         base += static_cast<std::size_t>(window)) {
        std::int64_t count = 0;
        for (std::size_t i = base; i < base + static_cast<std::size_t>(window); ++i) {
            count += rows[i].exception ? 1 : 0;
        }
        report.windows.push_back(BacktestWindow{rows[base].stamp,
                                                rows[base + static_cast<std::size_t>(window) - 1].stamp,
                                                count, zone_for_count(count)});
    }
    return report;
}

/// Sample autocorrelations of a residual sequence with the usual +-1.96/sqrt(n)
/// reference band, plus a fixed-width histogram. A constant sequence has no
/// defined autocorrelation and is flagged instead of failing.
struct ResidualDiagnostics {
    std::vector<double> acf;  // lags 1..max_lag
    double band = 0.0;
    std::vector<std::int64_t> histogram;
    double hist_lo = 0.0;
    double hist_hi = 0.0;
    std::int64_t n = 0;
    bool degenerate = false;
};

[[nodiscard]] inline ResidualDiagnostics residual_diagnostics(const std::vector<double>& x,
                                                              int max_lag = 20, int bins = 40) {
    if (max_lag < 1 || bins < 1) {
        throw ValueError("need max_lag >= 1 and bins >= 1");
    }
    if (static_cast<int>(x.size()) <= max_lag + 1) {
        throw ValueError("series too short for " + std::to_string(max_lag) + " lags");
    }
    ResidualDiagnostics d;
    d.n = static_cast<std::int64_t>(x.size());
    double mean = 0.0;
    for (double v : x) {
        mean += v;
    }
    mean /= static_cast<double>(x.size());
    double denom = 0.0;
    double lo = x[0], hi = x[0];
    for (double v : x) {
        denom += (v - mean) * (v - mean);
        lo = v < lo ? v : lo;
        hi = v > hi ? v : hi;
    }
    d.band = 1.96 / std::sqrt(static_cast<double>(x.size()));
    d.hist_lo = lo;
    d.hist_hi = hi;
    d.histogram.assign(static_cast<std::size_t>(bins), 0);
    if (denom == 0.0) {
        d.degenerate = true;
        return d;
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    for (double v : x) {
        auto b = width > 0.0 ? static_cast<std::int64_t>((v - lo) / width) : 0;
        if (b >= bins) {
            b = bins - 1;
        }
        ++d.histogram[static_cast<std::size_t>(b)];
    }
    d.acf.resize(static_cast<std::size_t>(max_lag));
    for (int lag = 1; lag <= max_lag; ++lag) {
        double num = 0.0;
        for (std::size_t t = 0; t + static_cast<std::size_t>(lag) < x.size(); ++t) {
            num += (x[t] - mean) * (x[t + static_cast<std::size_t>(lag)] - mean);
        }
        d.acf[static_cast<std::size_t>(lag - 1)] = num / denom;
    }
    return d;
}

}  // namespace lcp
