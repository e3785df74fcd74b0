#pragma once

// Concentration metrics over token holdings. Gini uses the O(n log n)
// sorted-rank identity; the quadratic pairwise form only exists in test
// code as the independent oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fairlaunch {

namespace detail {

inline std::vector<double> checked_sorted(std::span<const double> holdings) {
    if (holdings.empty()) {
        throw std::invalid_argument("metric undefined on empty holdings");
    }
    double total = 0.0;
    for (double h : holdings) {
        if (h < 0.0 || !std::isfinite(h)) {
            throw std::invalid_argument("holdings must be finite and nonnegative");
        }
        total += h;
    }
    if (total <= 0.0) {
        throw std::invalid_argument("metric undefined on all-zero holdings");
    }
    std::vector<double> sorted(holdings.begin(), holdings.end());
    std::sort(sorted.begin(), sorted.end());
    return sorted;
}

// The *_sorted forms take an ascending, validated vector; the public
// operations and the engine's per-day metric pass share them.

inline double gini_sorted(std::span<const double> sorted) {
    const std::size_t n = sorted.size();
    const double floor = sorted.front();
    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double rank_weight = 2.0 * static_cast<double>(i + 1) -
                                   static_cast<double>(n) - 1.0;
        weighted += rank_weight * (sorted[i] - floor);
        total += sorted[i];
    }
    return weighted / (static_cast<double>(n) * total);
}

inline double one_minus_nse_sorted(std::span<const double> sorted) {
    const std::size_t n = sorted.size();
    if (n < 2) {
        throw std::invalid_argument("one_minus_nse undefined for fewer than 2 agents");
    }
    double total = 0.0;
    for (double h : sorted) total += h;
    double entropy = 0.0;
    for (double h : sorted) {
        if (h > 0.0) {
            const double share = h / total;
            entropy -= share * std::log(share);
        }
    }
    return 1.0 - entropy / std::log(static_cast<double>(n));
}

inline std::size_t whale_count_sorted(std::span<const double> sorted, double threshold) {
    double total = 0.0;
    for (double h : sorted) total += h;
    const double target = threshold * total;
    double prefix = 0.0;
    std::size_t k = 0;
    for (std::size_t i = sorted.size(); i-- > 0;) {
        prefix += sorted[i];
        ++k;
        if (prefix >= target) {
            break;
        }
    }
    return k;
}

} // namespace detail

/// Gini over holdings: sum_i (2i - n - 1) x_(i) / (n sum x), 1-based rank i
/// over the ascending sort. Subtracting the minimum from each term keeps
/// the numerator exactly zero on constant vectors.
inline double gini(std::span<const double> holdings) {
    return detail::gini_sorted(detail::checked_sorted(holdings));
}

/// 1 - normalized Shannon entropy of the holding shares; 0*log(0) == 0.
inline double one_minus_nse(std::span<const double> holdings) {
    return detail::one_minus_nse_sorted(detail::checked_sorted(holdings));
}

/// Fraction of agents forming the smallest descending-sorted prefix that
/// holds at least `threshold` of the total supply.
inline double whale_share(std::span<const double> holdings, double threshold = 0.9) {
    if (threshold <= 0.0 || threshold > 1.0) {
        throw std::invalid_argument("whale_share: threshold must be in (0,1]");
    }
    const std::vector<double> sorted = detail::checked_sorted(holdings);
    return static_cast<double>(detail::whale_count_sorted(sorted, threshold)) /
           static_cast<double>(sorted.size());
}

/// Count form of whale_share, for the whale table (k agents out of n).
inline std::size_t whale_count(std::span<const double> holdings, double threshold = 0.9) {
    return detail::whale_count_sorted(detail::checked_sorted(holdings), threshold);
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares of value on t.
inline LinearFit linreg_slope(std::span<const std::pair<double, double>> series) {
    if (series.size() < 2) {
        throw std::invalid_argument("linreg_slope: need at least two points");
    }
    double mean_t = 0.0, mean_v = 0.0;
    for (const auto& [t, v] : series) {
        mean_t += t;
        mean_v += v;
    }
    const double n = static_cast<double>(series.size());
    mean_t /= n;
    mean_v /= n;
    double cov = 0.0, var = 0.0;
    for (const auto& [t, v] : series) {
        cov += (t - mean_t) * (v - mean_v);
        var += (t - mean_t) * (t - mean_t);
    }
    if (var == 0.0) {
        throw std::invalid_argument("linreg_slope: degenerate t values");
    }
    const double slope = cov / var;
    return {slope, mean_v - slope * mean_t};
}

/// Per-day concentration snapshot. `n_agents` counts every agent in the
/// population; the three metrics are computed over the metric population
/// the engine selected (positive holders unless configured otherwise).
struct MetricPoint {
    int t = 0;
    double gini = 0.0;
    double one_minus_nse = 0.0;
    double whale_share = 0.0;
    long n_agents = 0;
};

} // namespace fairlaunch
