#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lcp/errors.hpp"

namespace lcp {

/// Nested family of interval lengths N_0 < N_1 < ... < N_{K+1} anchored at a
/// common right edge. Scales 0..K are selectable by the estimator; the final
/// length exists only to host the testing interval of the last scale, so a
/// scheme needs at least three entries. Consecutive ratios N_{k-1} / N_k are
/// recorded as [u0, u]; they always fall in (0, 1) for strictly increasing
/// lengths, and moderate (geometric-like) growth keeps the change-point
/// statistics comparable across scales.
class IntervalScheme {
public:
    /// Geometric design N_k = ceil(n0 * growth^k), k = 0..k_max, with exact
    /// duplicates (possible for growth close to one) collapsed.
    [[nodiscard]] static IntervalScheme geometric(std::int64_t n0, double growth, int k_max) {
        if (n0 < 1) {
            throw ValueError("base length must be at least 1");
        }
        if (!(growth > 1.0) || !std::isfinite(growth)) {
            throw ValueError("growth factor must exceed 1");
        }
        if (k_max < 2) {
            throw ValueError("need k_max >= 2 so that at least one scale is testable");
        }
        std::vector<std::int64_t> lengths;
        double value = static_cast<double>(n0);
        for (int k = 0; k <= k_max; ++k) {
            const auto n = static_cast<std::int64_t>(std::ceil(value - 1e-9));
            if (lengths.empty() || n > lengths.back()) {
                lengths.push_back(n);
            }
            value *= growth;
        }
        return IntervalScheme(std::move(lengths));
    }

    /// Explicit list of lengths, last entry testing-only.
    [[nodiscard]] static IntervalScheme from_lengths(std::vector<std::int64_t> lengths) {
        return IntervalScheme(std::move(lengths));
    }

    /// Default grid for daily data, roughly 25% growth from a one-week base.
    [[nodiscard]] static IntervalScheme reference() {
        return IntervalScheme({5, 7, 10, 13, 16, 20, 24, 30, 38, 47, 59, 73, 92});
    }

    /// Number of testable scales K.
    [[nodiscard]] int num_scales() const noexcept { return static_cast<int>(lengths_.size()) - 2; }

    /// Total number of lengths, K + 2.
    [[nodiscard]] int size() const noexcept { return static_cast<int>(lengths_.size()); }

    /// N_k for k = 0..K+1.
    [[nodiscard]] std::int64_t length(int k) const {
        if (k < 0 || k >= size()) {
            throw ValueError("scale index " + std::to_string(k) + " out of range");
        }
        return lengths_[static_cast<std::size_t>(k)];
    }

    /// Length of the testing interval of scale k, i.e. N_{k+1}.
    [[nodiscard]] std::int64_t testing_length(int k) const { return length(k + 1); }

    /// History required to run every scale, N_{K+1}.
    [[nodiscard]] std::int64_t max_history() const noexcept { return lengths_.back(); }

    [[nodiscard]] const std::vector<std::int64_t>& lengths() const noexcept { return lengths_; }

    /// Smallest consecutive ratio N_{k-1} / N_k.
    [[nodiscard]] double u0() const noexcept { return u0_; }

    /// Largest consecutive ratio N_{k-1} / N_k.
    [[nodiscard]] double u() const noexcept { return u_; }

    /// Chaining constant (u^{-1/2} - 1)^{-1} used by the coarse stability
    /// bound across non-adjacent scales.
    [[nodiscard]] double c_u() const noexcept { return 1.0 / (1.0 / std::sqrt(u_) - 1.0); }

    friend bool operator==(const IntervalScheme&, const IntervalScheme&) = default;

private:
    explicit IntervalScheme(std::vector<std::int64_t> lengths) : lengths_(std::move(lengths)) {
        if (lengths_.size() < 3) {
            throw ValueError("scheme needs at least three lengths (one testable scale)");
        }
        if (lengths_.front() < 1) {
            throw ValueError("interval lengths must be positive");
        }
        u0_ = 1.0;
        u_ = 0.0;
        for (std::size_t i = 1; i < lengths_.size(); ++i) {
            if (lengths_[i] <= lengths_[i - 1]) {
                throw ValueError("interval lengths must be strictly increasing");
            }
            const double ratio =
                static_cast<double>(lengths_[i - 1]) / static_cast<double>(lengths_[i]);
            u0_ = ratio < u0_ ? ratio : u0_;
            u_ = ratio > u_ ? ratio : u_;
        }
    }

    std::vector<std::int64_t> lengths_;
    double u0_ = 0.0;
    double u_ = 0.0;
};

}  // namespace lcp
