// lcpvol: command line front end for the adaptive volatility library.
//
// Subcommands: calibrate, estimate, forecast, backtest, simulate. Each reads
// a key=value config file (--config) plus repeatable --set key=value
// overrides, writes its result to --out (default stdout), and stamps every
// output with a "# lcpvol <version> seed=... config=<fingerprint>" line so a
// result can be traced to the exact configuration that produced it.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 data or file
// error, 4 runtime failure. Errors are printed to stderr as a single
// machine-readable line: lcpvol: error kind=<Kind> msg="...".
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lcp/lcp.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_path;  // empty: stdout
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "key=value configuration file");
    cmd->add_option("--set", args.overrides, "override one configuration key (repeatable)")
        ->type_name("KEY=VALUE");
    cmd->add_option("--out,-o", args.out_path, "output file (default: stdout)");
}

lcp::RunConfig resolve_config(const CommonArgs& args) {
    lcp::RunConfig cfg;
    if (!args.config_path.empty()) {
        cfg = lcp::load_config(args.config_path);
    }
    for (const std::string& kv : args.overrides) {
        lcp::apply_override(cfg, kv);
    }
    cfg.validate();
    return cfg;
}

std::string stamp(const lcp::RunConfig& cfg) {
    return std::string("# lcpvol ") + kVersion + " seed=" + std::to_string(cfg.seed) +
           " config=" + lcp::config_fingerprint(cfg) + "\n";
}

/// Runs `body` against --out or stdout and flushes before returning.
template <typename F>
void with_output(const CommonArgs& args, F&& body) {
    if (args.out_path.empty()) {
        body(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(args.out_path);
    if (!out) {
        throw lcp::IoError("cannot open '" + args.out_path + "' for writing");
    }
    body(out);
    out.flush();
    if (!out) {
        throw lcp::IoError("write to '" + args.out_path + "' failed");
    }
}

lcp::CalibrationConfig calibration_config(const lcp::RunConfig& cfg) {
    lcp::CalibrationConfig c;
    c.r = cfg.r;
    c.alpha = cfg.alpha;
    c.replicates = cfg.replicates;
    c.seed = cfg.seed;
    c.z_grid_step = cfg.z_grid_step;
    c.cap_a0 = cfg.cap_a0;
    c.theta_floor = cfg.theta_floor;
    c.threads = cfg.threads;
    return c;
}

/// Critical values from --crits when given, otherwise a fresh calibration
/// under the active configuration.
lcp::CriticalValues resolve_crits(const lcp::RunConfig& cfg, const std::string& crits_path,
                                  const lcp::IntervalScheme& scheme) {
    if (!crits_path.empty()) {
        lcp::CriticalValues cv = lcp::load_critical_values(crits_path);
        if (cv.scheme_lengths != scheme.lengths()) {
            throw lcp::ConfigError("critical values in '" + crits_path +
                                   "' were calibrated for a different scheme");
        }
        return cv;
    }
    return lcp::calibrate(scheme, calibration_config(cfg));
}

lcp::SeriesKind parse_kind(const std::string& kind) {
    if (kind == "prices") {
        return lcp::SeriesKind::prices;
    }
    if (kind == "returns") {
        return lcp::SeriesKind::returns;
    }
    throw lcp::ConfigError("unknown series kind '" + kind + "' (prices or returns)");
}

lcp::PipelineConfig pipeline_config(const lcp::RunConfig& cfg, const lcp::IntervalScheme& scheme,
                                    lcp::CriticalValues crits, bool with_garch, bool overlap) {
    lcp::PipelineConfig p;
    p.scheme = scheme;
    p.crits = std::move(crits);
    p.horizons = cfg.horizon_list();
    p.levels = cfg.level_list();
    p.laws = cfg.law_list();
    p.presample = cfg.presample;
    p.eval_window = cfg.window;
    p.garch_window = cfg.garch_window;
    p.garch_refit = cfg.garch_refit;
    p.min_pool = cfg.min_pool;
    p.theta_floor = cfg.theta_floor;
    p.threads = cfg.threads;
    p.overlap = overlap;
    p.with_garch = with_garch;
    return p;
}

int cmd_calibrate(const CommonArgs& args) {
    const lcp::RunConfig cfg = resolve_config(args);
    const lcp::IntervalScheme scheme = cfg.make_scheme();
    const lcp::CriticalValues cv = lcp::calibrate(scheme, calibration_config(cfg));
    with_output(args, [&](std::ostream& out) {
        out << stamp(cfg);
        lcp::save_critical_values(out, cv);
    });
    return 0;
}

int cmd_estimate(const CommonArgs& args, const std::string& data_path, const std::string& kind,
                 const std::string& crits_path) {
    const lcp::RunConfig cfg = resolve_config(args);
    const lcp::IntervalScheme scheme = cfg.make_scheme();
    const lcp::CriticalValues cv = resolve_crits(cfg, crits_path, scheme);
    const lcp::IngestResult data = lcp::ingest_csv(data_path, parse_kind(kind));
    for (const auto& row : data.rejected) {
        std::cerr << "lcpvol: warning skipped line " << row.line << ": " << row.reason << "\n";
    }
    const std::int64_t n = data.series.size();
    const std::int64_t warmup = scheme.length(0) + scheme.length(1);
    if (warmup >= n) {
        throw lcp::DataError("series of length " + std::to_string(n) +
                             " is shorter than the estimator warmup " + std::to_string(warmup));
    }
    lcp::EstimatorOptions opts;
    opts.theta_floor = cfg.theta_floor;
    const lcp::RollingEstimate roll =
        lcp::rolling_estimate(data.series, warmup, n, scheme, cv, opts, cfg.threads);
    with_output(args, [&](std::ostream& out) {
        out << stamp(cfg);
        out << "date,theta_hat,interval_length,tau_hat\n";
        char buf[64];
        for (std::int64_t t = warmup; t < n; ++t) {
            const auto& res = roll.results[static_cast<std::size_t>(t - warmup)];
            if (!res.has_value()) {
                throw lcp::Error("estimate failed at stamp " + std::to_string(t) + ": " +
                                 roll.errors[static_cast<std::size_t>(t - warmup)]);
            }
            std::snprintf(buf, sizeof(buf), "%.17g", res->theta.value);
            out << data.dates[static_cast<std::size_t>(t)] << ',' << buf << ','
                << res->selected.length() << ',' << (res->change_found ? res->tau_hat : -1)
                << '\n';
        }
    });
    return 0;
}

int cmd_forecast(const CommonArgs& args, const std::string& data_path, const std::string& kind,
                 const std::string& crits_path, bool no_garch, bool nonoverlapping) {
    const lcp::RunConfig cfg = resolve_config(args);
    const lcp::IntervalScheme scheme = cfg.make_scheme();
    const lcp::CriticalValues cv = resolve_crits(cfg, crits_path, scheme);
    const lcp::IngestResult data = lcp::ingest_csv(data_path, parse_kind(kind));
    const lcp::PipelineConfig pipe =
        pipeline_config(cfg, scheme, cv, !no_garch, !nonoverlapping);
    const lcp::VarianceTrack track = lcp::variance_track(data.series, pipe);
    const auto rows = lcp::forecast_rows(data.series, track, pipe);
    with_output(args, [&](std::ostream& out) {
        out << stamp(cfg);
        if (no_garch) {
            out << "stamp,h,forecast,realized\n";
            char buf[64];
            for (const auto& row : rows) {
                std::snprintf(buf, sizeof(buf), "%.17g", row.lcp);
                out << row.stamp << ',' << row.h << ',' << buf;
                std::snprintf(buf, sizeof(buf), "%.17g", row.realized);
                out << ',' << buf << '\n';
            }
            return;
        }
        const lcp::MsqeTable table = lcp::msqe_table(rows, pipe.horizons, pipe.eval_window);
        out << lcp::format_msqe_table(table);
    });
    return 0;
}

int cmd_backtest(const CommonArgs& args, const std::string& data_path, const std::string& kind,
                 const std::string& crits_path, bool nonoverlapping) {
    const lcp::RunConfig cfg = resolve_config(args);
    const lcp::IntervalScheme scheme = cfg.make_scheme();
    const lcp::CriticalValues cv = resolve_crits(cfg, crits_path, scheme);
    const lcp::IngestResult data = lcp::ingest_csv(data_path, parse_kind(kind));
    lcp::PipelineConfig pipe =
        pipeline_config(cfg, scheme, cv, /*with_garch=*/false, !nonoverlapping);
    const lcp::VarianceTrack track = lcp::variance_track(data.series, pipe);
    const auto rows = lcp::var_rows(data.series, track, pipe);
    const auto grid = lcp::var_grid(rows, pipe);
    with_output(args, [&](std::ostream& out) {
        out << stamp(cfg);
        out << lcp::format_backtest_grid(grid, pipe);
        out << "\n# traffic-light zones per " << pipe.eval_window << "-stamp window\n";
        for (const auto& cell : grid) {
            out << lcp::to_string(cell.law) << " level=" << cell.level << " h=" << cell.h
                << " zones=";
            for (std::size_t i = 0; i < cell.zones.size(); ++i) {
                out << (i == 0 ? "" : ",") << lcp::to_string(cell.zones[i]);
            }
            out << '\n';
        }
    });
    return 0;
}

lcp::JumpSpec parse_segments(const std::string& spec, lcp::InnovationLaw law) {
    lcp::JumpSpec out;
    out.law = law;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) {
            throw lcp::ConfigError("segment '" + tok + "' is not of the form LENGTH:VARIANCE");
        }
        lcp::JumpSegment seg;
        seg.length = lcp::detail::parse_int_strict(tok.substr(0, colon), "segment length");
        seg.sigma2 = lcp::detail::parse_double_strict(tok.substr(colon + 1), "segment variance");
        out.segments.push_back(seg);
    }
    try {
        out.validate();
    } catch (const lcp::Error& e) {
        throw lcp::ConfigError(e.what());  // flag values are user configuration
    }
    return out;
}

std::string next_date(const std::string& date) {
    int y = std::stoi(date.substr(0, 4));
    int m = std::stoi(date.substr(5, 2));
    int d = std::stoi(date.substr(8, 2));
    static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dim = days[m - 1];
    if (m == 2 && lcp::csv_detail::is_leap(y)) {
        dim = 29;
    }
    if (++d > dim) {
        d = 1;
        if (++m > 12) {
            m = 1;
            ++y;
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return std::string(buf);
}

int cmd_simulate(const CommonArgs& args, const std::string& segments,
                 const std::string& start_date, std::int64_t replicate) {
    const lcp::RunConfig cfg = resolve_config(args);
    const auto laws = cfg.law_list();
    if (laws.size() != 1) {
        throw lcp::ConfigError("simulate needs exactly one innovation law, got '" + cfg.law + "'");
    }
    const lcp::JumpSpec spec = parse_segments(segments, laws.front());
    const lcp::ReturnSeries series = lcp::simulate_jump_process(spec, cfg.seed, replicate);
    std::vector<std::string> dates;
    dates.reserve(static_cast<std::size_t>(series.size()));
    std::string d = start_date;
    for (std::int64_t i = 0; i < series.size(); ++i) {
        int y = 0, mo = 0, da = 0;
        if (!lcp::csv_detail::valid_date(d, y, mo, da)) {
            throw lcp::ConfigError("start date '" + start_date + "' is not a calendar date");
        }
        dates.push_back(d);
        d = next_date(d);
    }
    with_output(args, [&](std::ostream& out) {
        out << stamp(cfg);
        lcp::export_returns_csv(out, series, dates);
    });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive local change point volatility toolkit"};
    app.require_subcommand(1);

    CommonArgs cal_args;
    CLI::App* cal = app.add_subcommand("calibrate", "Monte Carlo critical value calibration");
    add_common(cal, cal_args);

    CommonArgs est_args;
    std::string est_data, est_kind = "prices", est_crits;
    CLI::App* est = app.add_subcommand("estimate", "per-date adaptive variance estimates");
    add_common(est, est_args);
    est->add_option("--data", est_data, "input CSV (date,value)")->required();
    est->add_option("--kind", est_kind, "prices or returns");
    est->add_option("--crits", est_crits, "calibrated critical values file");

    CommonArgs for_args;
    std::string for_data, for_kind = "prices", for_crits;
    bool for_no_garch = false, for_nonoverlap = false;
    CLI::App* fore = app.add_subcommand("forecast", "variance forecasts and error ratios");
    add_common(fore, for_args);
    fore->add_option("--data", for_data, "input CSV (date,value)")->required();
    fore->add_option("--kind", for_kind, "prices or returns");
    fore->add_option("--crits", for_crits, "calibrated critical values file");
    fore->add_flag("--no-benchmark", for_no_garch, "emit raw forecast rows without the benchmark");
    fore->add_flag("--nonoverlapping", for_nonoverlap, "step evaluation stamps by the horizon");

    CommonArgs back_args;
    std::string back_data, back_kind = "prices", back_crits;
    bool back_nonoverlap = false;
    CLI::App* back = app.add_subcommand("backtest", "VaR exception grid and zones");
    add_common(back, back_args);
    back->add_option("--data", back_data, "input CSV (date,value)")->required();
    back->add_option("--kind", back_kind, "prices or returns");
    back->add_option("--crits", back_crits, "calibrated critical values file");
    back->add_flag("--nonoverlapping", back_nonoverlap, "step evaluation stamps by the horizon");

    CommonArgs sim_args;
    std::string sim_segments, sim_start = "2000-01-03";
    std::int64_t sim_replicate = 0;
    CLI::App* sim = app.add_subcommand("simulate", "piecewise constant variance return paths");
    add_common(sim, sim_args);
    sim->add_option("--segments", sim_segments, "comma list of LENGTH:VARIANCE segments")
        ->required();
    sim->add_option("--start-date", sim_start, "date of the first simulated return");
    sim->add_option("--replicate", sim_replicate, "replicate index within the seed's stream");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cal->parsed()) {
            return cmd_calibrate(cal_args);
        }
        if (est->parsed()) {
            return cmd_estimate(est_args, est_data, est_kind, est_crits);
        }
        if (fore->parsed()) {
            return cmd_forecast(for_args, for_data, for_kind, for_crits, for_no_garch,
                                for_nonoverlap);
        }
        if (back->parsed()) {
            return cmd_backtest(back_args, back_data, back_kind, back_crits, back_nonoverlap);
        }
        if (sim->parsed()) {
            return cmd_simulate(sim_args, sim_segments, sim_start, sim_replicate);
        }
    } catch (const lcp::ConfigError& e) {
        std::cerr << "lcpvol: error kind=config msg=\"" << e.what() << "\"\n";
        return 2;
    } catch (const lcp::DataError& e) {
        std::cerr << "lcpvol: error kind=data msg=\"" << e.what() << "\"\n";
        return 3;
    } catch (const lcp::IoError& e) {
        std::cerr << "lcpvol: error kind=io msg=\"" << e.what() << "\"\n";
        return 3;
    } catch (const lcp::Error& e) {
        std::cerr << "lcpvol: error kind=runtime msg=\"" << e.what() << "\"\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "lcpvol: error kind=internal msg=\"" << e.what() << "\"\n";
        return 4;
    }
    return 0;
}
