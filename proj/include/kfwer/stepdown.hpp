#ifndef KFWER_STEPDOWN_HPP
#define KFWER_STEPDOWN_HPP

// Resampling-based step-down control of the k-FWER. One resample matrix is
// shared by every step; step j tests the active set A_j together with (k-1)
// previously rejected hypotheses, maximized over a variant-specific pool.
//
//   generic      every (k-1)-subset of R_j
//   operative    (k-1)-subsets of the M least significant members of R_j,
//                M the largest integer with C(M, k-1) <= N_max
//   streamlined  only the k-1 least significant members of R_j

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "resampling.hpp"
#include "stat_kernels.hpp"

namespace kfwer {

enum class variant { generic, streamlined, operative };

inline constexpr std::size_t default_n_max = 50;

/// Subset evaluations per step above which the generic variant refuses to run.
inline constexpr double max_subsets_per_step = 1e7;

inline std::string_view to_string(variant v) {
    switch (v) {
    case variant::generic: return "generic";
    case variant::streamlined: return "streamlined";
    case variant::operative: return "operative";
    }
    return "?";
}

inline std::optional<variant> parse_variant(std::string_view name) {
    if (name == "generic") return variant::generic;
    if (name == "streamlined") return variant::streamlined;
    if (name == "operative") return variant::operative;
    return std::nullopt;
}

enum class stop_reason {
    nothing_rejected,     // step 1 rejected nothing
    fewer_than_k,         // |R_2| < k (generic and operative)
    no_new_rejections,
    all_rejected,
};

inline std::string_view to_string(stop_reason r) {
    switch (r) {
    case stop_reason::nothing_rejected: return "nothing_rejected";
    case stop_reason::fewer_than_k: return "fewer_than_k";
    case stop_reason::no_new_rejections: return "no_new_rejections";
    case stop_reason::all_rejected: return "all_rejected";
    }
    return "?";
}

struct step_record {
    index_set active;          // A_j
    index_set rejected_before; // R_j
    double critical_value = 0.0;
    index_set newly_rejected;
    std::size_t subsets_evaluated = 0;

    friend bool operator==(const step_record&, const step_record&) = default;
};

struct step_trace {
    variant kind = variant::operative;
    std::vector<step_record> steps;
    stop_reason stop = stop_reason::nothing_rejected;

    friend bool operator==(const step_trace&, const step_trace&) = default;
};

struct rejection_result {
    index_set rejected;             // sorted
    step_trace trace;
    std::vector<int> declared_signs; // aligned with `rejected`; two-sided only
    bool top_k_mod_applied = false;
};

/// Largest M with C(M, k-1) <= n_max, capped at `limit`.
inline std::size_t operative_pool_size(std::size_t k, std::size_t n_max, std::size_t limit) {
    detail::require(k >= 1, "k must be >= 1");
    detail::require(n_max >= 1, "N_max must be >= 1");
    const std::size_t r = k - 1;
    if (r == 0) return limit;
    std::size_t m = r; // C(r, r) = 1 <= n_max
    for (;;) {
        if (m >= limit) return std::max(r, limit);
        // C(m+1, r) = C(m, r) * (m+1) / (m+1-r), evaluated in floating point
        double c = 1.0;
        for (std::size_t i = 0; i < r; ++i) c = c * static_cast<double>(m + 1 - i) / static_cast<double>(i + 1);
        if (c > static_cast<double>(n_max) + 0.5) return m;
        ++m;
    }
}

namespace detail {

inline double binomial(std::size_t n, std::size_t r) {
    if (r > n) return 0.0;
    double c = 1.0;
    for (std::size_t i = 0; i < r; ++i) c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return std::round(c);
}

/// Visits every r-subset of `pool` in lexicographic order of pool positions.
template <typename Visit>
void for_each_subset(const std::vector<std::size_t>& pool, std::size_t r, Visit&& visit) {
    std::vector<std::size_t> pos(r), subset(r);
    for (std::size_t i = 0; i < r; ++i) pos[i] = i;
    const std::size_t m = pool.size();
    if (r > m) return;
    for (;;) {
        for (std::size_t i = 0; i < r; ++i) subset[i] = pool[pos[i]];
        visit(std::span<const std::size_t>(subset));
        std::size_t i = r;
        while (i > 0 && pos[i - 1] == m - r + i - 1) --i;
        if (i == 0) return;
        ++pos[i - 1];
        for (std::size_t j = i; j < r; ++j) pos[j] = pos[j - 1] + 1;
    }
}

inline std::vector<int> signs_for(const statistic_vector& stats, const index_set& rejected) {
    if (stats.signs().empty()) return {};
    std::vector<int> out;
    out.reserve(rejected.size());
    for (std::size_t i : rejected) out.push_back(stats.signs()[i]);
    return out;
}

inline rejection_result run_stepdown(const statistic_vector& stats, const resample_matrix& resamples, std::size_t k,
                                     double alpha, variant kind, std::size_t n_max) {
    const std::size_t s = stats.size();
    require(k >= 1 && k <= s, "step-down: k must satisfy 1 <= k <= s");
    require(resamples.hypotheses() == s, "step-down: resample matrix does not cover all hypotheses");
    require(alpha > 0.0 && alpha < 1.0, "step-down: alpha must lie in (0,1)");

    const auto rank = stats.significance_rank();
    std::size_t pool_limit = s;
    switch (kind) {
    case variant::generic: pool_limit = s; break;
    case variant::streamlined: pool_limit = k - 1; break;
    case variant::operative: pool_limit = operative_pool_size(k, n_max, s); break;
    }

    rejection_result out;
    out.trace.kind = kind;
    std::vector<bool> is_rejected(s, false);
    index_set rejected_by_significance; // R_j, most significant first

    for (std::size_t step = 1;; ++step) {
        step_record rec;
        for (std::size_t i = 0; i < s; ++i) (is_rejected[i] ? rec.rejected_before : rec.active).push_back(i);

        if (step == 2 && kind != variant::streamlined && rejected_by_significance.size() < k) {
            out.trace.stop = stop_reason::fewer_than_k;
            break;
        }

        if (step == 1) {
            rec.critical_value = critical_value(resamples, rec.active, k, alpha);
            rec.subsets_evaluated = 1;
        } else {
            const std::size_t r_count = rejected_by_significance.size();
            const std::size_t pool_size = std::min(pool_limit, r_count);
            std::vector<std::size_t> pool(rejected_by_significance.end() - static_cast<std::ptrdiff_t>(pool_size),
                                          rejected_by_significance.end());
            std::sort(pool.begin(), pool.end());
            const std::size_t subset_size = std::min(k - 1, pool.size());
            if (binomial(pool.size(), subset_size) > max_subsets_per_step)
                throw domain_error("step-down: generic subset maximization is too large; use the operative variant");
            union_critical_values cv(resamples, rec.active, k);
            double best = -std::numeric_limits<double>::infinity();
            for_each_subset(pool, subset_size, [&](std::span<const std::size_t> extra) {
                best = std::max(best, cv(extra, alpha));
                ++rec.subsets_evaluated;
            });
            rec.critical_value = best;
        }

        for (std::size_t i : rec.active)
            if (stats[i] > rec.critical_value) rec.newly_rejected.push_back(i);
        const bool any = !rec.newly_rejected.empty();
        std::vector<std::size_t> fresh = rec.newly_rejected;
        std::sort(fresh.begin(), fresh.end(), [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
        for (std::size_t i : fresh) {
            is_rejected[i] = true;
            rejected_by_significance.push_back(i);
        }
        const bool exhausted = rec.active.size() == rec.newly_rejected.size();
        out.trace.steps.push_back(std::move(rec));

        if (!any) {
            out.trace.stop = step == 1 ? stop_reason::nothing_rejected : stop_reason::no_new_rejections;
            break;
        }
        if (exhausted) {
            out.trace.stop = stop_reason::all_rejected;
            break;
        }
    }

    for (std::size_t i = 0; i < s; ++i)
        if (is_rejected[i]) out.rejected.push_back(i);
    out.declared_signs = signs_for(stats, out.rejected);
    return out;
}

} // namespace detail

/// Generic step-down: step j maximizes the critical value over K = A_j ∪ I for
/// every (k-1)-subset I of the rejected set R_j. Stops at step 2 if |R_2| < k.
inline rejection_result stepdown_generic(const statistic_vector& stats, const resample_matrix& resamples,
                                         std::size_t k, double alpha) {
    return detail::run_stepdown(stats, resamples, k, alpha, variant::generic, 0);
}

/// Streamlined step-down: K = A_j plus the k-1 least significant members of R_j
/// (all of R_j when fewer exist).
inline rejection_result stepdown_streamlined(const statistic_vector& stats, const resample_matrix& resamples,
                                             std::size_t k, double alpha) {
    return detail::run_stepdown(stats, resamples, k, alpha, variant::streamlined, 0);
}

/// Generic step-down with the maximization restricted to the M least
/// significant rejections, M the largest integer with C(M, k-1) <= n_max.
inline rejection_result stepdown_operative(const statistic_vector& stats, const resample_matrix& resamples,
                                           std::size_t k, double alpha, std::size_t n_max = default_n_max) {
    detail::require(n_max >= 1, "operative: N_max must be >= 1");
    return detail::run_stepdown(stats, resamples, k, alpha, variant::operative, n_max);
}

inline rejection_result run_kfwer(const statistic_vector& stats, const resample_matrix& resamples, std::size_t k,
                                  double alpha, variant kind, std::size_t n_max = default_n_max) {
    switch (kind) {
    case variant::generic: return stepdown_generic(stats, resamples, k, alpha);
    case variant::streamlined: return stepdown_streamlined(stats, resamples, k, alpha);
    case variant::operative: return stepdown_operative(stats, resamples, k, alpha, n_max);
    }
    throw domain_error("unknown step-down variant");
}

/// If fewer than k-1 hypotheses were rejected, reject the k-1 most significant instead.
inline rejection_result apply_top_k_mod(rejection_result result, const statistic_vector& stats, std::size_t k) {
    detail::require(k >= 1, "k must be >= 1");
    if (result.rejected.size() >= k - 1) return result;
    detail::require(k - 1 <= stats.size(), "k - 1 exceeds the number of hypotheses");
    const auto order = stats.significance_order();
    result.rejected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1));
    std::sort(result.rejected.begin(), result.rejected.end());
    result.declared_signs = detail::signs_for(stats, result.rejected);
    result.top_k_mod_applied = true;
    return result;
}

} // namespace kfwer

#endif // KFWER_STEPDOWN_HPP
