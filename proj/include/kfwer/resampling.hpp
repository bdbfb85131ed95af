#ifndef KFWER_RESAMPLING_HPP
#define KFWER_RESAMPLING_HPP

// Estimated joint sampling laws of the test statistics (centered bootstrap,
// subsampling, known-covariance Monte Carlo oracle) and the k-max critical
// values they induce. One resample matrix serves every index subset K.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "rng.hpp"
#include "stat_kernels.hpp"

namespace kfwer {

class resample_matrix {
public:
    enum class kind_t { bootstrap_centered, subsample_raw, oracle };

    resample_matrix() = default;
    resample_matrix(matrix values, kind_t kind, std::size_t subsample_size = 0, double subsample_tau = 0.0)
        : values_(std::move(values)), kind_(kind), subsample_size_(subsample_size), subsample_tau_(subsample_tau) {
        detail::require(values_.rows() >= 1 && values_.cols() >= 1, "resample matrix must be at least 1 x 1");
        for (double v : values_.values()) detail::require(std::isfinite(v), "resample entries must be finite");
    }

    std::size_t resamples() const noexcept { return values_.rows(); }
    std::size_t hypotheses() const noexcept { return values_.cols(); }
    std::span<const double> row(std::size_t a) const noexcept { return values_.row(a); }
    const matrix& values() const noexcept { return values_; }
    kind_t kind() const noexcept { return kind_; }
    std::size_t subsample_size() const noexcept { return subsample_size_; }
    double subsample_tau() const noexcept { return subsample_tau_; }

    friend bool operator==(const resample_matrix&, const resample_matrix&) = default;

private:
    matrix values_;
    kind_t kind_ = kind_t::bootstrap_centered;
    std::size_t subsample_size_ = 0;
    double subsample_tau_ = 0.0;
};

/// Redraws allowed for a resample or subsample whose column has zero variance.
inline constexpr int max_degenerate_redraws = 100;

namespace detail {

/// Column sums over a multiset of rows of `centered`; returns false when a
/// studentized column would have zero variance.
struct resample_accumulator {
    std::vector<double> sum, sumsq, lo, hi;

    explicit resample_accumulator(std::size_t s) : sum(s), sumsq(s), lo(s), hi(s) {}

    void reset() {
        std::fill(sum.begin(), sum.end(), 0.0);
        std::fill(sumsq.begin(), sumsq.end(), 0.0);
        std::fill(lo.begin(), lo.end(), std::numeric_limits<double>::infinity());
        std::fill(hi.begin(), hi.end(), -std::numeric_limits<double>::infinity());
    }

    void add(std::span<const double> row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            const double v = row[i];
            sum[i] += v;
            sumsq[i] += v * v;
            lo[i] = std::min(lo[i], v);
            hi[i] = std::max(hi[i], v);
        }
    }

    bool degenerate() const {
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (lo[i] == hi[i]) return true;
        return false;
    }

    /// tau * mean (/ sd) for each column, |.| when two-sided.
    void emit(std::span<double> out, std::size_t m, double tau, statistic_family family, sidedness sided) const {
        const double count = static_cast<double>(m);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double mean = sum[i] / count;
            double value = tau * mean;
            if (family == statistic_family::studentized) {
                const double var = std::max(0.0, (sumsq[i] - count * mean * mean) / (count - 1.0));
                value /= std::sqrt(var);
            }
            out[i] = sided == sidedness::two ? std::abs(value) : value;
        }
    }
};

inline matrix center_columns(const matrix& data) {
    matrix centered = data;
    for (std::size_t c = 0; c < data.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < data.rows(); ++r) mean += data(r, c);
        mean /= static_cast<double>(data.rows());
        for (std::size_t r = 0; r < data.rows(); ++r) centered(r, c) -= mean;
    }
    return centered;
}

} // namespace detail

/// B nonparametric bootstrap resamples of the rows. Entry (a, i) is
/// tau_n (mean*_ai - mean_i) / S*_ai (no division for the raw-mean family),
/// absolute value in two-sided mode. Resample a draws from its own
/// counter-derived stream, so row order never depends on execution order.
inline resample_matrix bootstrap_centered_statistics(const matrix& data, std::size_t B, sidedness sided,
                                                     std::uint64_t seed,
                                                     statistic_family family = statistic_family::studentized,
                                                     scaling_sequence scaling = {}) {
    detail::require(data.rows() >= 2, "bootstrap: n must be >= 2");
    detail::require(data.cols() >= 1, "bootstrap: data has no columns");
    detail::require(B >= 1, "bootstrap: B must be >= 1");
    const std::size_t n = data.rows();
    const std::size_t s = data.cols();
    const double tau = scaling(n);

    // Centering first makes location shifts cancel exactly in the sums.
    const matrix centered = detail::center_columns(data);
    matrix out(B, s);
    detail::resample_accumulator acc(s);
    for (std::size_t a = 0; a < B; ++a) {
        random_stream rng(derive_seed(seed, a));
        int attempt = 0;
        for (;;) {
            acc.reset();
            for (std::size_t j = 0; j < n; ++j) acc.add(centered.row(rng.below(n)));
            if (family == statistic_family::raw_mean || !acc.degenerate()) break;
            if (++attempt > max_degenerate_redraws)
                throw domain_error("bootstrap: resample " + std::to_string(a) +
                                   " kept producing a zero-variance column");
        }
        acc.emit(out.row(a), n, tau, family, sided);
    }
    return {std::move(out), resample_matrix::kind_t::bootstrap_centered};
}

namespace detail {

/// b distinct indices from [0, n) (Floyd's algorithm), returned sorted.
inline std::vector<std::size_t> sample_without_replacement(random_stream& rng, std::size_t n, std::size_t b) {
    std::vector<std::size_t> chosen;
    chosen.reserve(b);
    for (std::size_t j = n - b; j < n; ++j) {
        const auto t = static_cast<std::size_t>(rng.below(j + 1));
        if (std::find(chosen.begin(), chosen.end(), t) == chosen.end())
            chosen.push_back(t);
        else
            chosen.push_back(j);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

} // namespace detail

/// S random size-b subsets (distinct rows within a subset, subsets drawn
/// independently). Entry (a, i) is the uncentered statistic tau_b mean / S on
/// subset a.
inline resample_matrix subsample_statistics(const matrix& data, std::size_t b, std::size_t num_subsamples,
                                            sidedness sided, std::uint64_t seed,
                                            statistic_family family = statistic_family::studentized,
                                            scaling_sequence scaling = {}) {
    const std::size_t n = data.rows();
    detail::require(b >= 2 && b < n, "subsample: size b must satisfy 2 <= b < n");
    detail::require(num_subsamples >= 1, "subsample: number of subsamples must be >= 1");
    const std::size_t s = data.cols();
    const double tau = scaling(b);

    matrix out(num_subsamples, s);
    detail::resample_accumulator acc(s);
    for (std::size_t a = 0; a < num_subsamples; ++a) {
        random_stream rng(derive_seed(seed, a));
        int attempt = 0;
        for (;;) {
            acc.reset();
            for (std::size_t r : detail::sample_without_replacement(rng, n, b)) acc.add(data.row(r));
            if (family == statistic_family::raw_mean || !acc.degenerate()) break;
            if (++attempt > max_degenerate_redraws)
                throw domain_error("subsample: subset " + std::to_string(a) +
                                   " kept producing a zero-variance column");
        }
        acc.emit(out.row(a), b, tau, family, sided);
    }
    return {std::move(out), resample_matrix::kind_t::subsample_raw, b, tau};
}

namespace detail {

inline void require_subset(const index_set& K, std::size_t s, std::size_t k) {
    require(!K.empty(), "critical value: index set K is empty");
    require(k >= 1 && k <= K.size(), "critical value: k must satisfy 1 <= k <= |K|");
    for (std::size_t i : K) require(i < s, "critical value: index out of range");
    index_set sorted = K;
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), "critical value: K has duplicates");
}

} // namespace detail

/// Empirical 1-alpha quantile over rows of k-max(row restricted to K).
inline double critical_value(const resample_matrix& resamples, const index_set& K, std::size_t k, double alpha) {
    detail::require(alpha > 0.0 && alpha < 1.0, "critical value: alpha must lie in (0,1)");
    detail::require_subset(K, resamples.hypotheses(), k);
    std::vector<double> kmaxes(resamples.resamples());
    std::vector<double> scratch(K.size());
    for (std::size_t a = 0; a < resamples.resamples(); ++a) {
        const auto row = resamples.row(a);
        for (std::size_t j = 0; j < K.size(); ++j) scratch[j] = row[K[j]];
        auto nth = scratch.begin() + static_cast<std::ptrdiff_t>(k - 1);
        std::nth_element(scratch.begin(), nth, scratch.end(), std::greater<>{});
        kmaxes[a] = *nth;
    }
    return detail::empirical_quantile_inplace(kmaxes, 1.0 - alpha);
}

/// Critical values for K = A ∪ I with A fixed and I a small extra set, as
/// needed by the step-down subset maximization. The top-k values of every row
/// over A are cached once, so each query costs O(B k) instead of O(B |K|).
class union_critical_values {
public:
    union_critical_values(const resample_matrix& resamples, const index_set& active, std::size_t k)
        : resamples_(&resamples), k_(k), top_count_(std::min(k, active.size())),
          top_(resamples.resamples() * top_count_) {
        detail::require(k >= 1, "k must be >= 1");
        std::vector<double> scratch(active.size());
        for (std::size_t a = 0; a < resamples.resamples(); ++a) {
            const auto row = resamples.row(a);
            for (std::size_t j = 0; j < active.size(); ++j) scratch[j] = row[active[j]];
            auto mid = scratch.begin() + static_cast<std::ptrdiff_t>(top_count_);
            std::partial_sort(scratch.begin(), mid, scratch.end(), std::greater<>{});
            std::copy(scratch.begin(), mid, top_.begin() + static_cast<std::ptrdiff_t>(a * top_count_));
        }
    }

    /// Critical value for K = active ∪ extra; `extra` must be disjoint from active.
    double operator()(std::span<const std::size_t> extra, double alpha) const {
        detail::require(top_count_ + extra.size() >= k_, "critical value: k must satisfy k <= |K|");
        const std::size_t B = resamples_->resamples();
        kmaxes_.resize(B);
        buffer_.resize(top_count_ + extra.size());
        for (std::size_t a = 0; a < B; ++a) {
            const auto row = resamples_->row(a);
            std::copy_n(top_.begin() + static_cast<std::ptrdiff_t>(a * top_count_), top_count_, buffer_.begin());
            for (std::size_t j = 0; j < extra.size(); ++j) buffer_[top_count_ + j] = row[extra[j]];
            auto nth = buffer_.begin() + static_cast<std::ptrdiff_t>(k_ - 1);
            std::nth_element(buffer_.begin(), nth, buffer_.end(), std::greater<>{});
            kmaxes_[a] = *nth;
        }
        return detail::empirical_quantile_inplace(kmaxes_, 1.0 - alpha);
    }

private:
    const resample_matrix* resamples_;
    std::size_t k_;
    std::size_t top_count_;
    std::vector<double> top_;
    mutable std::vector<double> kmaxes_;
    mutable std::vector<double> buffer_;
};

/// Known-covariance model: standard normals with common correlation rho.
struct oracle_model {
    std::size_t s = 1;
    double rho = 0.0;
    std::size_t draws = 100000;
    std::uint64_t seed = 0;
};

/// Monte Carlo 1-alpha quantile of k-max(Z_i : i in K), Z ~ N(0, Sigma_rho).
inline double oracle_critical_value(const oracle_model& model, const index_set& K, std::size_t k, double alpha) {
    detail::require(model.rho >= 0.0 && model.rho <= 1.0, "oracle: rho must lie in [0,1]");
    detail::require(model.draws >= 1, "oracle: draws must be >= 1");
    detail::require(alpha > 0.0 && alpha < 1.0, "oracle: alpha must lie in (0,1)");
    detail::require_subset(K, model.s, k);
    random_stream rng(model.seed);
    const double shared = std::sqrt(model.rho);
    const double own = std::sqrt(1.0 - model.rho);
    std::vector<double> z(model.s), restricted(K.size()), kmaxes(model.draws);
    for (std::size_t d = 0; d < model.draws; ++d) {
        const double z0 = rng.normal();
        for (auto& v : z) v = shared * z0 + own * rng.normal();
        for (std::size_t j = 0; j < K.size(); ++j) restricted[j] = z[K[j]];
        auto nth = restricted.begin() + static_cast<std::ptrdiff_t>(k - 1);
        std::nth_element(restricted.begin(), nth, restricted.end(), std::greater<>{});
        kmaxes[d] = *nth;
    }
    return detail::empirical_quantile_inplace(kmaxes, 1.0 - alpha);
}

} // namespace kfwer

#endif // KFWER_RESAMPLING_HPP
