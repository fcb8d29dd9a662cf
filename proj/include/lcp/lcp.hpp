#pragma once

// Adaptive local-constant volatility estimation with multiscale change
// point detection, Monte Carlo calibration of the rejection thresholds,
// GARCH(1,1) benchmarking and Value-at-Risk backtesting.

#include "lcp/calibration.hpp"
#include "lcp/changepoint.hpp"
#include "lcp/config.hpp"
#include "lcp/core.hpp"
#include "lcp/critical_values.hpp"
#include "lcp/csv.hpp"
#include "lcp/distributions.hpp"
#include "lcp/errors.hpp"
#include "lcp/estimator.hpp"
#include "lcp/forecast.hpp"
#include "lcp/garch.hpp"
#include "lcp/parallel.hpp"
#include "lcp/pipeline.hpp"
#include "lcp/report.hpp"
#include "lcp/rng.hpp"
#include "lcp/scheme.hpp"
#include "lcp/series.hpp"
#include "lcp/simulation.hpp"
#include "lcp/var.hpp"

namespace lcp {
inline constexpr const char* VERSION = "0.1.0";
}
