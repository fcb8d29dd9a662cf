#pragma once

#include <stdexcept>
#include <string>

namespace lcp {

/// Base class of every exception thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter is outside its admissible domain (non-positive variance,
/// horizon < 1, level outside (0,1), and similar).
class ValueError : public Error {
public:
    using Error::Error;
};

/// Interval geometry violation: out-of-range bounds, empty interval where a
/// non-empty one is required, tested set not strictly inside the testing set.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Malformed input data. The message carries 1-based line numbers for every
/// offending row where the source is a text file.
class DataError : public Error {
public:
    using Error::Error;
};

/// Configuration problems: unknown keys, unparsable values, missing
/// mandatory entries.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Monte Carlo calibration exhausted its candidate grid without meeting the
/// risk budget at some scale.
class CalibrationError : public Error {
public:
    CalibrationError(const std::string& msg, int scale, double achieved_risk)
        : Error(msg), scale_(scale), achieved_risk_(achieved_risk) {}

    [[nodiscard]] int scale() const noexcept { return scale_; }
    [[nodiscard]] double achieved_risk() const noexcept { return achieved_risk_; }

private:
    int scale_;
    double achieved_risk_;
};

/// Numerical optimizer failed; the message carries the last iterate and the
/// gradient norm at the point of failure.
class FitError : public Error {
public:
    using Error::Error;
};

/// File system or stream failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace lcp
