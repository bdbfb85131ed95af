#ifndef KFWER_STAT_KERNELS_HPP
#define KFWER_STAT_KERNELS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace kfwer {

enum class sidedness { one, two };

/// Studentized: tau_n * mean / S. Raw mean: tau_n * mean.
enum class statistic_family { studentized, raw_mean };

/// Normalizing sequence tau_m, positive and nondecreasing in m.
struct scaling_sequence {
    enum class rule { sqrt_n, identity, constant };

    rule kind = rule::sqrt_n;
    double value = 1.0; // used by rule::constant

    double operator()(std::size_t m) const {
        switch (kind) {
        case rule::sqrt_n: return std::sqrt(static_cast<double>(m));
        case rule::identity: return 1.0;
        case rule::constant: return value;
        }
        return 1.0;
    }

    static scaling_sequence constant_of(double c) {
        detail::require(c > 0.0 && std::isfinite(c), "scaling constant must be positive");
        return {rule::constant, c};
    }
};

/// Observed test statistics, larger meaning more evidence against H_i.
/// In two-sided mode `signs` carries the sign of each column estimate.
class statistic_vector {
public:
    statistic_vector() = default;
    explicit statistic_vector(std::vector<double> values, std::vector<int> signs = {})
        : values_(std::move(values)), signs_(std::move(signs)) {
        detail::require(!values_.empty(), "statistic vector must be nonempty");
        for (double v : values_) detail::require(std::isfinite(v), "statistics must be finite");
        detail::require(signs_.empty() || signs_.size() == values_.size(),
                        "sign vector length must match statistics");
    }

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    const std::vector<int>& signs() const noexcept { return signs_; }

    /// Indices from most to least significant; ties go to the lower index first.
    std::vector<std::size_t> significance_order() const {
        std::vector<std::size_t> order(values_.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [this](std::size_t a, std::size_t b) { return values_[a] > values_[b]; });
        return order;
    }

    /// rank[i] = position of hypothesis i in significance_order().
    std::vector<std::size_t> significance_rank() const {
        const auto order = significance_order();
        std::vector<std::size_t> rank(order.size());
        for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos;
        return rank;
    }

private:
    std::vector<double> values_;
    std::vector<int> signs_;
};

class pvalue_vector {
public:
    pvalue_vector() = default;
    explicit pvalue_vector(std::vector<double> values) : values_(std::move(values)) {
        for (double p : values_) detail::require(p >= 0.0 && p <= 1.0, "p-values must lie in [0,1]");
    }

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }

private:
    std::vector<double> values_;
};

/// k-th largest entry of `values`, i.e. the (m-k+1)-th order statistic.
inline double kmax(std::span<const double> values, std::size_t k) {
    detail::require(!values.empty(), "kmax: empty input");
    detail::require(k >= 1 && k <= values.size(), "kmax: k must satisfy 1 <= k <= m");
    std::vector<double> scratch(values.begin(), values.end());
    auto nth = scratch.begin() + static_cast<std::ptrdiff_t>(k - 1);
    std::nth_element(scratch.begin(), nth, scratch.end(), std::greater<>{});
    return *nth;
}

namespace detail {

/// 1-based order-statistic index ceil(level * B), clamped to [1, B].
inline std::size_t quantile_rank(std::size_t count, double level) {
    // Guard against 0.95 * 100 evaluating to 95.00000000000001.
    const double scaled = level * static_cast<double>(count);
    const double rounded = std::round(scaled);
    double rank = std::abs(scaled - rounded) <= 1e-9 * std::max(1.0, scaled) ? rounded : std::ceil(scaled);
    rank = std::clamp(rank, 1.0, static_cast<double>(count));
    return static_cast<std::size_t>(rank);
}

/// floor(x) for x >= 0 that snaps to the nearest integer within 1e-9 relative,
/// so 0.29 * 100 floors to 29.
inline std::size_t guarded_floor(double x) {
    const double rounded = std::round(x);
    const double out = std::abs(x - rounded) <= 1e-9 * std::max(1.0, std::abs(x)) ? rounded : std::floor(x);
    return static_cast<std::size_t>(std::max(0.0, out));
}

/// Quantile that reorders `values` in place.
inline double empirical_quantile_inplace(std::span<double> values, double level) {
    const std::size_t rank = quantile_rank(values.size(), level);
    auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(values.begin(), nth, values.end());
    return *nth;
}

} // namespace detail

/// The ceil(level*B)-th order statistic: inf{x : F_B(x) >= level}.
inline double empirical_quantile(std::span<const double> values, double level) {
    detail::require(!values.empty(), "empirical_quantile: empty input");
    detail::require(level > 0.0 && level <= 1.0, "empirical_quantile: level must lie in (0,1]");
    std::vector<double> scratch(values.begin(), values.end());
    return detail::empirical_quantile_inplace(scratch, level);
}

// ---------------------------------------------------------------------------
// Distribution functions

inline double normal_pdf(double x) {
    constexpr double inv_sqrt_2pi = 0.39894228040143267794;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

/// Standard normal quantile. Rational starting point refined by Halley steps
/// on the tail nearest p, giving close to full double precision.
inline double normal_quantile(double p) {
    detail::require(p > 0.0 && p < 1.0, "normal_quantile: p must lie in (0,1)");

    const bool upper = p > 0.5;
    const double q = upper ? 1.0 - p : p; // lower-tail mass, q <= 0.5

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};

    double x;
    if (q < 0.02425) {
        const double t = std::sqrt(-2.0 * std::log(q));
        x = (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
            ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
    } else {
        const double t = q - 0.5;
        const double r = t * t;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * t /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }

    // x solves Phi(x) = q with x <= 0.
    for (int iter = 0; iter < 3; ++iter) {
        const double e = normal_cdf(x) - q;
        const double u = e / normal_pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return upper ? -x : x;
}

namespace detail {

/// Continued fraction for the incomplete beta (modified Lentz).
inline double incomplete_beta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    constexpr int max_iter = 10000;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    return h;
}

/// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
/// separately keeps precision when x is close to 1.
inline double regularized_beta(double a, double b, double x, double y) {
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return 1.0;
    // log1p(-x) loses precision when x ~ 1; log(y) is exact there.
    const double log_y = x > 0.5 ? std::log(y) : std::log1p(-x);
    const double front =
        std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * log_y);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * incomplete_beta_cf(a, b, x) / a;
    return 1.0 - front * incomplete_beta_cf(b, a, y) / b;
}

} // namespace detail

/// P{T > t} for T ~ Student-t with df degrees of freedom.
inline double t_upper_tail(double t, std::int64_t df) {
    detail::require(df >= 1, "t_upper_tail: df must be >= 1");
    if (t == 0.0) return 0.5;
    const double nu = static_cast<double>(df);
    const double t2 = t * t;
    const double x = nu / (nu + t2);
    const double y = t2 / (nu + t2);
    // P{|T| > |t|} = I_x(nu/2, 1/2)
    const double two_tail = detail::regularized_beta(0.5 * nu, 0.5, x, y);
    return t > 0.0 ? 0.5 * two_tail : 1.0 - 0.5 * two_tail;
}

// ---------------------------------------------------------------------------
// Test statistics

struct column_moments {
    double mean;
    double sd; // n-1 denominator
};

inline column_moments moments_of(std::span<const double> column) {
    const double n = static_cast<double>(column.size());
    const double mean = std::accumulate(column.begin(), column.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : column) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

/// Per-column statistics tau_n * mean (/ S when studentized); absolute value in two-sided mode.
inline statistic_vector test_statistics(const matrix& data, sidedness sided,
                                        statistic_family family = statistic_family::studentized,
                                        scaling_sequence scaling = {}) {
    detail::require(data.rows() >= 2, "test statistics need n >= 2 observations");
    detail::require(data.cols() >= 1, "test statistics need at least one column");
    const double tau = scaling(data.rows());
    std::vector<double> values(data.cols());
    std::vector<int> signs;
    if (sided == sidedness::two) signs.resize(data.cols());
    for (std::size_t c = 0; c < data.cols(); ++c) {
        const auto column = data.column(c);
        const auto m = moments_of(column);
        if (family == statistic_family::studentized && !(m.sd > 0.0)) throw degenerate_column(c);
        double value = tau * m.mean;
        if (family == statistic_family::studentized) value /= m.sd;
        if (sided == sidedness::two) {
            signs[c] = m.mean > 0.0 ? 1 : (m.mean < 0.0 ? -1 : 0);
            value = std::abs(value);
        }
        values[c] = value;
    }
    return statistic_vector(std::move(values), std::move(signs));
}

/// sqrt(n) * mean_i / S_i per column (absolute value when two-sided).
inline statistic_vector t_statistics(const matrix& data, sidedness sided) {
    return test_statistics(data, sided, statistic_family::studentized);
}

/// Marginal p-values from T ~ t_{n-1}; two-sided statistics are already |T|.
inline pvalue_vector t_pvalues(const statistic_vector& stats, std::size_t n, sidedness sided) {
    detail::require(n >= 2, "t_pvalues: n must be >= 2");
    std::vector<double> p(stats.size());
    const auto df = static_cast<std::int64_t>(n - 1);
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const double tail = t_upper_tail(stats[i], df);
        p[i] = sided == sidedness::one ? tail : std::min(1.0, 2.0 * tail);
    }
    return pvalue_vector(std::move(p));
}

// ---------------------------------------------------------------------------
// Data generation

/// n rows i.i.d. N(theta, Sigma) with unit variances and common correlation rho:
/// X[j][i] = theta_i + sqrt(rho) Z_j0 + sqrt(1 - rho) Z_ji.
inline matrix gen_common_correlation(std::size_t n, std::size_t s, std::span<const double> theta, double rho,
                                     std::uint64_t seed) {
    detail::require(rho >= 0.0 && rho <= 1.0, "gen_common_correlation: rho must lie in [0,1]");
    detail::require(theta.size() == s, "gen_common_correlation: theta length must equal s");
    matrix out(n, s);
    random_stream rng(seed);
    const double shared = std::sqrt(rho);
    const double own = std::sqrt(1.0 - rho);
    for (std::size_t j = 0; j < n; ++j) {
        const double z0 = rng.normal();
        auto row = out.row(j);
        for (std::size_t i = 0; i < s; ++i) row[i] = theta[i] + shared * z0 + own * rng.normal();
    }
    return out;
}

} // namespace kfwer

#endif // KFWER_STAT_KERNELS_HPP
