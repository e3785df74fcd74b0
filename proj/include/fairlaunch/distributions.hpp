#pragma once

// Samplers for every distribution the market model draws from, plus the
// matching quantile/CDF closed forms used by the statistical tests.
// All samplers consume uniforms from a RandomSource only, so a fixed seed
// pins the full sample sequence.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fairlaunch/rng.hpp"

namespace fairlaunch {

namespace detail {

inline void require(bool ok, const char* what) {
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

} // namespace detail

// ---- standard normal helpers ------------------------------------------------

inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// Inverse standard-normal CDF. Acklam's rational approximation refined by
/// one Halley step against erfc; |error| < 1e-15 over (0, 1).
inline double normal_quantile(double p) {
    detail::require(p > 0.0 && p < 1.0, "normal_quantile: p must be in (0,1)");

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};

    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Halley refinement.
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

// ---- quantile / CDF closed forms --------------------------------------------

inline double lomax_quantile(double u, double scale, double shape) {
    detail::require(scale > 0.0 && shape > 0.0, "lomax: scale and shape must be > 0");
    return scale * (std::pow(1.0 - u, -1.0 / shape) - 1.0);
}

inline double lomax_cdf(double x, double scale, double shape) {
    if (x <= 0.0) return 0.0;
    return 1.0 - std::pow(1.0 + x / scale, -shape);
}

inline double pareto_quantile(double u, double x_min, double shape) {
    detail::require(x_min > 0.0 && shape > 0.0, "pareto: x_min and shape must be > 0");
    return x_min * std::pow(1.0 - u, -1.0 / shape);
}

inline double pareto_cdf(double x, double x_min, double shape) {
    if (x <= x_min) return 0.0;
    return 1.0 - std::pow(x_min / x, shape);
}

inline double exponential_quantile(double u, double rate) {
    detail::require(rate > 0.0, "exponential: rate must be > 0");
    return -std::log1p(-u) / rate;
}

inline double exponential_cdf(double x, double rate) {
    if (x <= 0.0) return 0.0;
    return 1.0 - std::exp(-rate * x);
}

/// Asymmetric Laplace in the (kappa, location, scale) parameterization:
/// P(X < location) = kappa^2 / (1 + kappa^2); the left tail decays at rate
/// kappa/scale... inverse: left branch location - scale*kappa*E, right branch
/// location + scale/kappa*E with E ~ Exp(1).
inline double asym_laplace_cdf(double x, double kappa, double location, double scale) {
    const double k2 = kappa * kappa;
    if (x < location) {
        return k2 / (1.0 + k2) * std::exp((x - location) / (scale * kappa));
    }
    return 1.0 - 1.0 / (1.0 + k2) * std::exp(-kappa * (x - location) / scale);
}

inline double trunc_normal_cdf(double x, double mu, double sigma, double lower, double upper) {
    if (x <= lower) return 0.0;
    if (x >= upper) return 1.0;
    const double lo = normal_cdf((lower - mu) / sigma);
    const double hi = std::isinf(upper) ? 1.0 : normal_cdf((upper - mu) / sigma);
    return (normal_cdf((x - mu) / sigma) - lo) / (hi - lo);
}

// ---- samplers ----------------------------------------------------------------

inline double sample_lomax(RandomSource& rng, double scale, double shape) {
    detail::require(scale > 0.0 && shape > 0.0, "sample_lomax: scale and shape must be > 0");
    return lomax_quantile(rng.uniform01(), scale, shape);
}

inline double sample_pareto(RandomSource& rng, double x_min, double shape) {
    detail::require(x_min > 0.0 && shape > 0.0, "sample_pareto: x_min and shape must be > 0");
    return pareto_quantile(rng.uniform01(), x_min, shape);
}

inline double sample_exponential(RandomSource& rng, double rate) {
    detail::require(rate > 0.0, "sample_exponential: rate must be > 0");
    return exponential_quantile(rng.uniform01(), rate);
}

/// Marsaglia polar draw. The second variate of each accepted pair is
/// discarded to keep the sampler stateless.
inline double sample_normal(RandomSource& rng, double mu, double sigma) {
    detail::require(sigma > 0.0, "sample_normal: sigma must be > 0");
    for (;;) {
        const double u = 2.0 * rng.uniform01() - 1.0;
        const double v = 2.0 * rng.uniform01() - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return mu + sigma * u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

/// Rejection from the parent normal while the acceptance probability is
/// workable; inverse-CDF otherwise (tight or far-tail truncation windows).
inline double sample_trunc_normal(RandomSource& rng, double mu, double sigma,
                                  double lower, double upper) {
    detail::require(sigma > 0.0, "sample_trunc_normal: sigma must be > 0");
    detail::require(lower < upper, "sample_trunc_normal: empty truncation interval");

    const double lo = normal_cdf((lower - mu) / sigma);
    const double hi = std::isinf(upper) ? 1.0 : normal_cdf((upper - mu) / sigma);
    const double acceptance = hi - lo;
    detail::require(acceptance > 0.0, "sample_trunc_normal: truncation interval has no mass");

    if (acceptance >= 0.10) {
        for (;;) {
            const double x = sample_normal(rng, mu, sigma);
            if (x >= lower && x <= upper) {
                return x;
            }
        }
    }
    double p = lo + rng.uniform01() * acceptance;
    p = std::max(p, std::numeric_limits<double>::min());
    double x = mu + sigma * normal_quantile(p);
    if (x < lower) x = lower;
    if (x > upper) x = upper;
    return x;
}

inline double sample_asym_laplace(RandomSource& rng, double kappa, double location,
                                  double scale) {
    detail::require(kappa > 0.0 && scale > 0.0,
                    "sample_asym_laplace: kappa and scale must be > 0");
    const double k2 = kappa * kappa;
    const double side = rng.uniform01();
    const double e = -std::log1p(-rng.uniform01());
    if (side < k2 / (1.0 + k2)) {
        return location - scale * kappa * e;
    }
    return location + scale / kappa * e;
}

inline bool sample_bernoulli(RandomSource& rng, double p) {
    detail::require(p >= 0.0 && p <= 1.0, "sample_bernoulli: p must be in [0,1]");
    return rng.uniform01() < p;
}

// ---- DistributionSpec ---------------------------------------------------------

enum class DistKind {
    Lomax,
    ParetoType1,
    Exponential,
    TruncNormal,
    AsymLaplace,
    Normal,
    Bernoulli,
    Uniform01,
};

inline const char* to_string(DistKind k) {
    switch (k) {
        case DistKind::Lomax: return "lomax";
        case DistKind::ParetoType1: return "pareto";
        case DistKind::Exponential: return "exponential";
        case DistKind::TruncNormal: return "trunc_normal";
        case DistKind::AsymLaplace: return "asym_laplace";
        case DistKind::Normal: return "normal";
        case DistKind::Bernoulli: return "bernoulli";
        case DistKind::Uniform01: return "uniform01";
    }
    return "?";
}

/// Declarative description of one distribution; only the fields its kind
/// uses are read. Used wherever a distribution is part of a run config.
struct DistributionSpec {
    DistKind kind = DistKind::Uniform01;
    double scale = 1.0;   // Lomax / ALap scale
    double shape = 1.0;   // Lomax / Pareto alpha
    double rate = 1.0;    // Exponential
    double mu = 0.0;      // Normal / TruncNormal
    double sigma = 1.0;   // Normal / TruncNormal
    double kappa = 1.0;   // ALap asymmetry
    double min = 1.0;     // Pareto support minimum
    double p = 0.5;       // Bernoulli
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    double location = 0.0; // ALap

    void validate() const {
        switch (kind) {
            case DistKind::Lomax:
                detail::require(scale > 0.0 && shape > 0.0, "lomax spec: scale, shape > 0");
                break;
            case DistKind::ParetoType1:
                detail::require(min > 0.0 && shape > 0.0, "pareto spec: min, shape > 0");
                break;
            case DistKind::Exponential:
                detail::require(rate > 0.0, "exponential spec: rate > 0");
                break;
            case DistKind::TruncNormal:
                detail::require(sigma > 0.0, "trunc_normal spec: sigma > 0");
                detail::require(lower < upper, "trunc_normal spec: lower < upper");
                break;
            case DistKind::AsymLaplace:
                detail::require(kappa > 0.0 && scale > 0.0, "asym_laplace spec: kappa, scale > 0");
                break;
            case DistKind::Normal:
                detail::require(sigma > 0.0, "normal spec: sigma > 0");
                break;
            case DistKind::Bernoulli:
                detail::require(p >= 0.0 && p <= 1.0, "bernoulli spec: p in [0,1]");
                break;
            case DistKind::Uniform01:
                break;
        }
    }

    double sample(RandomSource& rng) const {
        switch (kind) {
            case DistKind::Lomax: return sample_lomax(rng, scale, shape);
            case DistKind::ParetoType1: return sample_pareto(rng, min, shape);
            case DistKind::Exponential: return sample_exponential(rng, rate);
            case DistKind::TruncNormal: return sample_trunc_normal(rng, mu, sigma, lower, upper);
            case DistKind::AsymLaplace: return sample_asym_laplace(rng, kappa, location, scale);
            case DistKind::Normal: return sample_normal(rng, mu, sigma);
            case DistKind::Bernoulli: return sample_bernoulli(rng, p) ? 1.0 : 0.0;
            case DistKind::Uniform01: return rng.uniform01();
        }
        throw std::logic_error("DistributionSpec::sample: unknown kind");
    }
};

} // namespace fairlaunch
