#ifndef KFWER_FDP_HPP
#define KFWER_FDP_HPP

#include <algorithm>
#include <cstddef>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "resampling.hpp"
#include "stat_kernels.hpp"
#include "stepdown.hpp"

namespace kfwer {

enum class fdp_stop {
    certificate, // N_j < k_j / gamma - 1
    gamma_zero,  // gamma = 0: plain 1-FWER run
    k_cap,       // k reached s
};

inline std::string_view to_string(fdp_stop r) {
    switch (r) {
    case fdp_stop::certificate: return "certificate";
    case fdp_stop::gamma_zero: return "gamma_zero";
    case fdp_stop::k_cap: return "k_cap";
    }
    return "?";
}

struct fdp_round {
    std::size_t k = 1;
    std::size_t rejected_count = 0; // N_j
    bool stop = false;

    friend bool operator==(const fdp_round&, const fdp_round&) = default;
};

struct fdp_trace {
    std::vector<fdp_round> rounds;
    fdp_stop stop = fdp_stop::certificate;
    index_set final_rejected;

    friend bool operator==(const fdp_trace&, const fdp_trace&) = default;
};

struct fdp_result {
    rejection_result result; // last round's k-FWER run
    fdp_trace trace;
};

/// Sequential FDP control: for k = 1, 2, ... run the k-FWER procedure
/// `inner(k)` and stop at the first round with N_k < k / gamma - 1, returning
/// that round's rejections. Rounds are capped at k = s.
template <typename Inner>
fdp_result fdp_sequential(std::size_t s, double gamma, Inner&& inner) {
    detail::require(s >= 1, "fdp: s must be >= 1");
    detail::require(gamma >= 0.0 && gamma < 1.0, "fdp: gamma must lie in [0,1)");
    fdp_result out;
    for (std::size_t k = 1;; ++k) {
        rejection_result round = inner(k);
        const std::size_t count = round.rejected.size();
        fdp_round rec{k, count, true};
        if (gamma == 0.0) {
            out.trace.stop = fdp_stop::gamma_zero;
        } else if (static_cast<double>(count) < static_cast<double>(k) / gamma - 1.0) {
            out.trace.stop = fdp_stop::certificate;
        } else if (k >= s) {
            out.trace.stop = fdp_stop::k_cap;
        } else {
            rec.stop = false;
        }
        out.trace.rounds.push_back(rec);
        if (rec.stop) {
            out.result = std::move(round);
            out.trace.final_rejected = out.result.rejected;
            return out;
        }
    }
}

/// Bootstrap FDP control with a step-down k-FWER procedure on a shared resample matrix.
inline fdp_result fdp_sequential(const statistic_vector& stats, const resample_matrix& resamples, double gamma,
                                 double alpha, variant kind = variant::operative, std::size_t n_max = default_n_max,
                                 bool top_k_mod = false) {
    return fdp_sequential(stats.size(), gamma, [&](std::size_t k) {
        auto r = run_kfwer(stats, resamples, k, alpha, kind, n_max);
        return top_k_mod ? apply_top_k_mod(std::move(r), stats, k) : r;
    });
}

/// False discovery proportion |rejected ∩ true_nulls| / |rejected|, 0 when nothing is rejected.
inline double fdp_of(const index_set& rejected, const index_set& true_nulls) {
    if (rejected.empty()) return 0.0;
    std::size_t false_rejections = 0;
    for (std::size_t i : rejected)
        if (std::find(true_nulls.begin(), true_nulls.end(), i) != true_nulls.end()) ++false_rejections;
    return static_cast<double>(false_rejections) / static_cast<double>(rejected.size());
}

} // namespace kfwer

#endif // KFWER_FDP_HPP
