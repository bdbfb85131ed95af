#ifndef KFWER_MARGINAL_HPP
#define KFWER_MARGINAL_HPP

// Step-down procedures driven only by marginal p-values: Holm, the generalized
// Holm k-FWER procedure and the LR FDP constants.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "stat_kernels.hpp"

namespace kfwer {

struct stepdown_constants {
    enum class provenance { holm, generalized_holm, lr };

    std::vector<double> alphas; // alpha_1 <= ... <= alpha_s
    provenance source = provenance::holm;
    std::size_t k = 1;    // generalized_holm
    double gamma = 0.0;   // lr

    std::size_t size() const noexcept { return alphas.size(); }
};

namespace detail {

inline void require_alpha(double alpha) {
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
}

} // namespace detail

/// alpha_j = alpha / (s - j + 1).
inline stepdown_constants holm_constants(std::size_t s, double alpha) {
    detail::require(s >= 1, "holm_constants: s must be >= 1");
    detail::require_alpha(alpha);
    stepdown_constants out;
    out.alphas.resize(s);
    for (std::size_t j = 1; j <= s; ++j) out.alphas[j - 1] = alpha * (1.0 / static_cast<double>(s - j + 1));
    return out;
}

/// alpha_j = k alpha / s for j <= k, k alpha / (s + k - j) otherwise.
inline stepdown_constants gh_constants(std::size_t s, std::size_t k, double alpha) {
    detail::require(k >= 1 && k <= s, "gh_constants: k must satisfy 1 <= k <= s");
    detail::require_alpha(alpha);
    stepdown_constants out;
    out.source = stepdown_constants::provenance::generalized_holm;
    out.k = k;
    out.alphas.resize(s);
    // The integer ratio is rounded once before scaling so entries stay monotone in k.
    const auto kd = static_cast<double>(k);
    for (std::size_t j = 1; j <= s; ++j) {
        out.alphas[j - 1] = alpha * (kd / static_cast<double>(j <= k ? s : s + k - j));
    }
    return out;
}

/// alpha_j = (floor(gamma j) + 1) alpha / (s + floor(gamma j) + 1 - j).
inline stepdown_constants lr_constants(std::size_t s, double gamma, double alpha) {
    detail::require(s >= 1, "lr_constants: s must be >= 1");
    detail::require(gamma >= 0.0 && gamma < 1.0, "lr_constants: gamma must lie in [0,1)");
    detail::require_alpha(alpha);
    stepdown_constants out;
    out.source = stepdown_constants::provenance::lr;
    out.gamma = gamma;
    out.alphas.resize(s);
    for (std::size_t j = 1; j <= s; ++j) {
        const std::size_t g = detail::guarded_floor(gamma * static_cast<double>(j));
        out.alphas[j - 1] = alpha * (static_cast<double>(g + 1) / static_cast<double>(s + g + 1 - j));
    }
    return out;
}

struct pvalue_stepdown_result {
    index_set rejected;             // sorted hypothesis indices
    std::vector<std::size_t> order; // p-values ascending, ties by index
    std::size_t rejected_count = 0; // r: length of the accepted prefix of `order`
};

/// Rejects H_(1..r) for the largest r with p_(j) <= alpha_j for all j <= r.
inline pvalue_stepdown_result stepdown_pvalue(const pvalue_vector& pvalues, const stepdown_constants& constants) {
    detail::require(pvalues.size() == constants.size(), "stepdown_pvalue: lengths differ");
    pvalue_stepdown_result out;
    out.order.resize(pvalues.size());
    std::iota(out.order.begin(), out.order.end(), std::size_t{0});
    std::stable_sort(out.order.begin(), out.order.end(),
                     [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
    std::size_t r = 0;
    while (r < out.order.size() && pvalues[out.order[r]] <= constants.alphas[r]) ++r;
    out.rejected_count = r;
    out.rejected.assign(out.order.begin(), out.order.begin() + static_cast<std::ptrdiff_t>(r));
    std::sort(out.rejected.begin(), out.rejected.end());
    return out;
}

} // namespace kfwer

#endif // KFWER_MARGINAL_HPP
