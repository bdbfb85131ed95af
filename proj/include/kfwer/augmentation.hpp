#ifndef KFWER_AUGMENTATION_HPP
#define KFWER_AUGMENTATION_HPP

// Augmentation competitors: enlarge a 1-FWER rejection set by the next most
// significant hypotheses, either a fixed k-1 of them or D = floor(gamma R / (1 - gamma)).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "stat_kernels.hpp"

namespace kfwer {

namespace detail {

inline index_set augment_by(const index_set& base, const statistic_vector& stats, std::size_t extra) {
    const std::size_t s = stats.size();
    std::vector<bool> in_base(s, false);
    for (std::size_t i : base) {
        require(i < s, "augment: base index out of range");
        in_base[i] = true;
    }
    index_set out = base;
    for (std::size_t i : stats.significance_order()) {
        if (extra == 0) break;
        if (in_base[i]) continue;
        out.push_back(i);
        --extra;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace detail

/// Largest D with D / (D + R) <= gamma.
inline std::size_t augmentation_count(std::size_t base_size, double gamma) {
    detail::require(gamma >= 0.0 && gamma < 1.0, "augment: gamma must lie in [0,1)");
    return detail::guarded_floor(gamma * static_cast<double>(base_size) / (1.0 - gamma));
}

/// base ∪ the k-1 most significant hypotheses not in base.
inline index_set augment_kfwer(const index_set& base, const statistic_vector& stats, std::size_t k) {
    detail::require(k >= 1, "augment: k must be >= 1");
    return detail::augment_by(base, stats, k - 1);
}

/// base ∪ the D next most significant hypotheses, D = floor(gamma |base| / (1 - gamma)).
inline index_set augment_fdp(const index_set& base, const statistic_vector& stats, double gamma) {
    return detail::augment_by(base, stats, augmentation_count(base.size(), gamma));
}

} // namespace kfwer

#endif // KFWER_AUGMENTATION_HPP
