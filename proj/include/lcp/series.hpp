#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lcp/errors.hpp"

namespace lcp {

/// Half-open index interval [start, end). Units are observation indices.
struct Interval {
    std::int64_t start = 0;
    std::int64_t end = 0;

    [[nodiscard]] std::int64_t length() const noexcept { return end - start; }
    [[nodiscard]] bool empty() const noexcept { return end <= start; }
    [[nodiscard]] bool contains(std::int64_t i) const noexcept { return i >= start && i < end; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Log-return series indexed 0..size()-1, optionally carrying the true
/// per-observation variance of a simulated path. Prefix sums of squared
/// returns are built once at construction so that any interval's sum of
/// squares is an O(1) difference; the object is immutable afterwards and
/// safe to share across threads.
class ReturnSeries {
public:
    explicit ReturnSeries(std::vector<double> returns, std::vector<double> true_vol = {})
        : returns_(std::move(returns)), true_vol_(std::move(true_vol)) {
        if (returns_.empty()) {
            throw ValueError("return series must not be empty");
        }
        for (std::size_t i = 0; i < returns_.size(); ++i) {
            if (!std::isfinite(returns_[i])) {
                throw ValueError("return at index " + std::to_string(i) + " is not finite");
            }
        }
        if (!true_vol_.empty()) {
            if (true_vol_.size() != returns_.size()) {
                throw ValueError("true volatility length " + std::to_string(true_vol_.size()) +
                                 " does not match series length " + std::to_string(returns_.size()));
            }
            for (std::size_t i = 0; i < true_vol_.size(); ++i) {
                if (!(true_vol_[i] > 0.0) || !std::isfinite(true_vol_[i])) {
                    throw ValueError("true volatility at index " + std::to_string(i) +
                                     " must be positive and finite");
                }
            }
        }
        prefix_sq_.resize(returns_.size() + 1);
        prefix_sq_[0] = 0.0;
        for (std::size_t i = 0; i < returns_.size(); ++i) {
            prefix_sq_[i + 1] = prefix_sq_[i] + returns_[i] * returns_[i];
        }
    }

    [[nodiscard]] std::int64_t size() const noexcept {
        return static_cast<std::int64_t>(returns_.size());
    }

    [[nodiscard]] const std::vector<double>& returns() const noexcept { return returns_; }

    [[nodiscard]] double ret(std::int64_t i) const {
        check_index(i);
        return returns_[static_cast<std::size_t>(i)];
    }

    [[nodiscard]] bool has_true_vol() const noexcept { return !true_vol_.empty(); }

    /// True variance sigma^2 at index i. Only available on simulated paths.
    [[nodiscard]] double true_vol(std::int64_t i) const {
        if (!has_true_vol()) {
            throw ValueError("series carries no true volatility");
        }
        check_index(i);
        return true_vol_[static_cast<std::size_t>(i)];
    }

    /// Sum of squared returns over [iv.start, iv.end).
    [[nodiscard]] double sum_sq(Interval iv) const {
        check_interval(iv);
        return prefix_sq_[static_cast<std::size_t>(iv.end)] -
               prefix_sq_[static_cast<std::size_t>(iv.start)];
    }

    [[nodiscard]] Interval full() const noexcept { return Interval{0, size()}; }

    /// Throws GeometryError unless 0 <= iv.start <= iv.end <= size().
    void check_interval(Interval iv) const {
        if (iv.start < 0 || iv.end < iv.start || iv.end > size()) {
            throw GeometryError("interval [" + std::to_string(iv.start) + ", " +
                                std::to_string(iv.end) + ") out of range for series of length " +
                                std::to_string(size()));
        }
    }

private:
    void check_index(std::int64_t i) const {
        if (i < 0 || i >= size()) {
            throw GeometryError("index " + std::to_string(i) + " out of range for series of length " +
                                std::to_string(size()));
        }
    }

    std::vector<double> returns_;
    std::vector<double> true_vol_;
    std::vector<double> prefix_sq_;
};

/// Log returns of a positive price path: r[i] = log(p[i+1] / p[i]).
/// The return is stamped at the later observation.
inline ReturnSeries log_returns(const std::vector<double>& prices) {
    if (prices.size() < 2) {
        throw ValueError("need at least two prices to form returns");
    }
    std::vector<double> r(prices.size() - 1);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
            throw ValueError("price at index " + std::to_string(i) + " must be positive and finite");
        }
    }
    for (std::size_t i = 0; i + 1 < prices.size(); ++i) {
        r[i] = std::log(prices[i + 1] / prices[i]);
    }
    return ReturnSeries(std::move(r));
}

}  // namespace lcp
