#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lcp/critical_values.hpp"
#include "lcp/errors.hpp"
#include "lcp/estimator.hpp"
#include "lcp/forecast.hpp"
#include "lcp/garch.hpp"
#include "lcp/scheme.hpp"
#include "lcp/series.hpp"
#include "lcp/var.hpp"

namespace lcp {

/// End-to-end forecasting run over one return series: adaptive local
/// variance at every stamp, a scrolling GARCH(1,1) benchmark refit on a
/// fixed cadence, aggregated variance forecasts per horizon, and VaR rows
/// per (law, level, horizon) cell.
struct PipelineConfig {
    IntervalScheme scheme = IntervalScheme::reference();
    CriticalValues crits;
    std::vector<std::int64_t> horizons = {1, 5, 10};
    std::vector<double> levels = {0.01, 0.05};
    std::vector<InnovationLaw> laws = {InnovationLaw::gaussian};
    std::int64_t presample = 500;   // observations withheld before any scoring
    std::int64_t eval_window = 250; // nonoverlapping scoring blocks
    std::int64_t garch_window = 1000;
    std::int64_t garch_refit = 10;  // stamps between benchmark refits
    std::int64_t min_pool = 100;    // residuals required by the empirical law
    double theta_floor = THETA_FLOOR_DEFAULT;
    int threads = 1;
    bool overlap = true;  // score every stamp; false: step by h per horizon
    bool with_garch = true;
};

struct VarianceTrack {
    std::vector<std::int64_t> stamps;
    std::vector<double> lcp_sigma2;
    std::vector<double> lcp_interval_len;
    std::vector<std::int64_t> lcp_tau;  // localized break, -1 when none
    std::vector<double> garch_sigma2;       // empty when the benchmark is off
    std::vector<GarchParams> garch_params;  // parameters behind each state
    std::int64_t executions = 0;
    std::int64_t stability_violations = 0;
};

/// One-step-ahead conditional variance at every scored stamp. The stamp's
/// estimate uses only observations strictly before it.
inline VarianceTrack variance_track(const ReturnSeries& series, const PipelineConfig& cfg) {
    const std::int64_t n = series.size();
    const std::int64_t warmup = cfg.scheme.length(0) + cfg.scheme.length(1);
    const std::int64_t t0 = std::max(cfg.presample, warmup);
    if (t0 >= n) {
        throw DataError("series of length " + std::to_string(n) +
                        " ends before the first scorable stamp " + std::to_string(t0));
    }
    GarchFitOptions gopts;
    if (cfg.with_garch && t0 < gopts.min_window) {
        throw ConfigError("presample " + std::to_string(t0) + " is below the " +
                          std::to_string(gopts.min_window) + "-observation benchmark fit floor");
    }

    VarianceTrack track;
    EstimatorOptions est;
    est.theta_floor = cfg.theta_floor;
    const RollingEstimate roll =
        rolling_estimate(series, t0, n, cfg.scheme, cfg.crits, est, cfg.threads);
    track.executions = roll.executions;
    track.stability_violations = roll.stability_violations;
    track.stamps.reserve(static_cast<std::size_t>(n - t0));
    for (std::int64_t t = t0; t < n; ++t) {
        const auto& res = roll.results[static_cast<std::size_t>(t - t0)];
        if (!res.has_value()) {
            throw Error("estimate failed at stamp " + std::to_string(t) + ": " +
                        roll.errors[static_cast<std::size_t>(t - t0)]);
        }
        track.stamps.push_back(t);
        track.lcp_sigma2.push_back(res->theta.value);
        track.lcp_interval_len.push_back(static_cast<double>(res->selected.length()));
        track.lcp_tau.push_back(res->change_found ? res->tau_hat : -1);
    }
    if (cfg.with_garch) {
        track.garch_sigma2.reserve(track.stamps.size());
        std::optional<GarchFit> fit;
        for (std::size_t i = 0; i < track.stamps.size(); ++i) {
            const std::int64_t t = track.stamps[i];
            if (!fit.has_value() || static_cast<std::int64_t>(i) % cfg.garch_refit == 0) {
                const Interval window{std::max<std::int64_t>(0, t - cfg.garch_window), t};
                try {
                    fit = garch_fit(series, window, gopts);
                } catch (const FitError&) {
                    if (!fit.has_value()) {
                        throw;  // no earlier parameters to fall back on
                    }
                }
            }
            track.garch_sigma2.push_back(garch_variance_state(series, {0, t}, fit->params));
            track.garch_params.push_back(fit->params);
        }
    }
    return track;
}

struct ForecastRow {
    std::int64_t stamp;
    std::int64_t h;
    double lcp;      // h-step aggregated variance forecast
    double garch;    // benchmark forecast, NaN when the benchmark is off
    double realized; // forward sum of squared returns
};

/// Variance forecast rows for every horizon at every stamp with h future
/// observations. Stamps are truncated to a common range across horizons so
/// per-period tables line up.
inline std::vector<ForecastRow> forecast_rows(const ReturnSeries& series,
                                              const VarianceTrack& track,
                                              const PipelineConfig& cfg) {
    if (cfg.horizons.empty()) {
        throw ConfigError("no horizons configured");
    }
    const std::int64_t h_max = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
    std::vector<ForecastRow> rows;
    for (std::size_t i = 0; i < track.stamps.size(); ++i) {
        const std::int64_t t = track.stamps[i];
        if (t + h_max > series.size()) {
            break;
        }
        for (const std::int64_t h : cfg.horizons) {
            ForecastRow row;
            row.stamp = t;
            row.h = h;
            row.lcp = lcp_variance_forecast(Theta(track.lcp_sigma2[i]), h);
            row.garch = cfg.with_garch
                            ? garch_aggregated_forecast(track.garch_params[i],
                                                        track.garch_sigma2[i], h)
                            : std::numeric_limits<double>::quiet_NaN();
            row.realized = realized_aggregate(series, t, h);
            rows.push_back(row);
        }
    }
    return rows;
}

struct MsqeTable {
    std::vector<std::int64_t> horizons;
    std::vector<std::vector<double>> ratios;  // [period][horizon]
    std::int64_t period_length = 0;
};

/// Table of adaptive-vs-benchmark forecast error ratios over consecutive
/// nonoverlapping evaluation periods; a cell < 1 favors the adaptive
/// forecast. Only full periods are scored.
inline MsqeTable msqe_table(const std::vector<ForecastRow>& rows,
                            const std::vector<std::int64_t>& horizons,
                            std::int64_t period_length) {
    if (period_length < 2) {
        throw ValueError("evaluation period must span at least 2 stamps");
    }
    MsqeTable table;
    table.horizons = horizons;
    table.period_length = period_length;
    for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
        std::vector<double> lcp, garch, realized;
        for (const auto& row : rows) {
            if (row.h != horizons[hi]) {
                continue;
            }
            lcp.push_back(row.lcp);
            garch.push_back(row.garch);
            realized.push_back(row.realized);
        }
        const std::int64_t periods = static_cast<std::int64_t>(lcp.size()) / period_length;
        if (hi == 0) {
            table.ratios.assign(static_cast<std::size_t>(periods),
                                std::vector<double>(horizons.size(), 0.0));
        }
        for (std::int64_t p = 0; p < periods && p < static_cast<std::int64_t>(table.ratios.size());
             ++p) {
            const auto b = static_cast<std::size_t>(p * period_length);
            const auto e = b + static_cast<std::size_t>(period_length);
            table.ratios[static_cast<std::size_t>(p)][hi] = msqe_ratio(
                std::vector<double>(lcp.begin() + b, lcp.begin() + e),
                std::vector<double>(garch.begin() + b, garch.begin() + e),
                std::vector<double>(realized.begin() + b, realized.begin() + e));
        }
    }
    return table;
}

/// VaR forecast rows from the adaptive variance track for every configured
/// (law, level, horizon) cell. The realized quantity is the h-step
/// aggregated return; an exception is a realized return strictly below the
/// forecast VaR. With the empirical law a stamp is scored only once enough
/// standardized residuals have accumulated.
inline std::vector<VarForecast> var_rows(const ReturnSeries& series, const VarianceTrack& track,
                                         const PipelineConfig& cfg) {
    if (cfg.horizons.empty() || cfg.levels.empty() || cfg.laws.empty()) {
        throw ConfigError("need at least one horizon, level and law");
    }
    const std::int64_t h_max = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
    // expanding pool of standardized residuals r_s / sigma_s for s < stamp
    std::vector<double> pool;
    pool.reserve(track.stamps.size());
    std::vector<VarForecast> rows;
    for (std::size_t i = 0; i < track.stamps.size(); ++i) {
        const std::int64_t t = track.stamps[i];
        if (t + h_max <= series.size()) {
            for (const InnovationLaw law : cfg.laws) {
                if (law == InnovationLaw::empirical &&
                    static_cast<std::int64_t>(pool.size()) < cfg.min_pool) {
                    continue;
                }
                for (const double level : cfg.levels) {
                    for (const std::int64_t h : cfg.horizons) {
                        if (!cfg.overlap && (t - track.stamps.front()) % h != 0) {
                            continue;
                        }
                        VarForecast row;
                        row.stamp = t;
                        row.h = h;
                        row.level = level;
                        row.law = law;
                        row.var_value = var_quantile(track.lcp_sigma2[i], h, level, law, &pool,
                                                     cfg.min_pool);
                        double agg = 0.0;
                        for (std::int64_t s = t; s < t + h; ++s) {
                            agg += series.ret(s);
                        }
                        row.realized = agg;
                        row.exception = row.realized < row.var_value;
                        rows.push_back(row);
                    }
                }
            }
        }
        pool.push_back(series.ret(t) / std::sqrt(track.lcp_sigma2[i]));
    }
    return rows;
}

struct VarGridCell {
    InnovationLaw law;
    double level;
    std::int64_t h;
    double frequency = 0.0;  // overall exception frequency
    std::int64_t scored = 0;
    std::vector<Zone> zones;  // one per full consecutive window
};

/// Backtest summary grid: one cell per (law, level, horizon), carrying the
/// overall exception frequency and the per-window traffic-light zones.
inline std::vector<VarGridCell> var_grid(const std::vector<VarForecast>& rows,
                                         const PipelineConfig& cfg) {
    std::vector<VarGridCell> grid;
    for (const InnovationLaw law : cfg.laws) {
        for (const double level : cfg.levels) {
            for (const std::int64_t h : cfg.horizons) {
                std::vector<VarForecast> cell_rows;
                for (const auto& row : rows) {
                    if (row.law == law && row.level == level && row.h == h) {
                        cell_rows.push_back(row);
                    }
                }
                VarGridCell cell;
                cell.law = law;
                cell.level = level;
                cell.h = h;
                if (!cell_rows.empty()) {
                    const BacktestReport report = backtest(cell_rows, cfg.eval_window);
                    cell.frequency = report.frequency;
                    cell.scored = report.scored;
                    for (const auto& w : report.windows) {
                        cell.zones.push_back(w.zone);
                    }
                }
                grid.push_back(cell);
            }
        }
    }
    return grid;
}

}  // namespace lcp
