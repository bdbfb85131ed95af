#ifndef KFWER_PROCEDURE_HPP
#define KFWER_PROCEDURE_HPP

// Full configuration of one multiple-testing procedure and a runner that
// applies it to an n x s data matrix.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "augmentation.hpp"
#include "errors.hpp"
#include "fdp.hpp"
#include "marginal.hpp"
#include "matrix.hpp"
#include "resampling.hpp"
#include "stat_kernels.hpp"
#include "stepdown.hpp"

namespace kfwer {

enum class method {
    holm,
    gh,              // generalized Holm, k-FWER
    lr,              // LR FDP step-down constants
    boot_kfwer,
    subsample_kfwer,
    boot_fdp,
    aug_kfwer,
    aug_fdp,
};

inline constexpr std::string_view method_names[] = {
    "holm", "gh", "lr", "boot-kfwer", "subsample-kfwer", "boot-fdp", "aug-kfwer", "aug-fdp",
};

inline std::string_view to_string(method m) { return method_names[static_cast<std::size_t>(m)]; }

inline std::optional<method> parse_method(std::string_view name) {
    for (std::size_t i = 0; i < std::size(method_names); ++i)
        if (method_names[i] == name) return static_cast<method>(i);
    return std::nullopt;
}

inline std::string_view to_string(sidedness s) { return s == sidedness::one ? "one" : "two"; }
inline std::string_view to_string(statistic_family f) {
    return f == statistic_family::studentized ? "studentized" : "raw";
}

struct procedure_spec {
    method tag = method::boot_kfwer;
    double alpha = 0.05;
    std::size_t k = 1;
    double gamma = 0.1;
    sidedness sided = sidedness::one;
    variant kind = variant::operative;
    std::size_t n_max = default_n_max;
    bool top_k_mod = false;
    std::size_t bootstrap_resamples = 500;     // B
    std::size_t subsample_count = 1000;        // S
    std::optional<std::size_t> subsample_size; // b, no default
    std::uint64_t seed = 0;
    statistic_family family = statistic_family::studentized;
    scaling_sequence scaling{};
};

inline bool uses_resampling(method m) {
    return m == method::boot_kfwer || m == method::subsample_kfwer || m == method::boot_fdp ||
           m == method::aug_kfwer || m == method::aug_fdp;
}

struct procedure_outcome {
    statistic_vector statistics;
    pvalue_vector pvalues; // from T ~ t_{n-1}, studentized statistics
    index_set rejected;
    std::optional<rejection_result> stepdown;   // resampling step-down run (last FDP round)
    std::optional<fdp_trace> fdp;
    std::optional<stepdown_constants> constants; // marginal methods
    std::optional<index_set> augmentation_base;  // aug methods: the 1-FWER set
};

/// Validates `spec` against an s-hypothesis problem; throws domain_error.
inline void validate(const procedure_spec& spec, std::size_t n, std::size_t s) {
    detail::require(n >= 2, "need at least n = 2 observations, got n = " + std::to_string(n));
    detail::require(s >= 1, "need at least one hypothesis");
    detail::require(spec.alpha > 0.0 && spec.alpha < 1.0, "alpha must lie in (0,1)");
    detail::require(spec.k >= 1, "k must be >= 1");
    detail::require(spec.k <= s, "k = " + std::to_string(spec.k) + " exceeds the number of hypotheses s = " +
                                     std::to_string(s));
    detail::require(spec.gamma >= 0.0 && spec.gamma < 1.0, "gamma must lie in [0,1)");
    detail::require(spec.n_max >= 1, "N_max must be >= 1");
    if (spec.tag == method::subsample_kfwer) {
        detail::require(spec.subsample_size.has_value(), "subsample methods require an explicit subsample size b");
        detail::require(*spec.subsample_size >= 2 && *spec.subsample_size < n,
                        "subsample size b must satisfy 2 <= b < n");
        detail::require(spec.subsample_count >= 1, "number of subsamples must be >= 1");
    }
    if (uses_resampling(spec.tag) && spec.tag != method::subsample_kfwer)
        detail::require(spec.bootstrap_resamples >= 1, "B must be >= 1");
}

inline procedure_outcome run_procedure(const matrix& data, const procedure_spec& spec) {
    validate(spec, data.rows(), data.cols());
    procedure_outcome out;
    const statistic_vector studentized = t_statistics(data, spec.sided);
    out.pvalues = t_pvalues(studentized, data.rows(), spec.sided);
    out.statistics = spec.family == statistic_family::studentized
                         ? studentized
                         : test_statistics(data, spec.sided, spec.family, spec.scaling);
    const std::size_t s = data.cols();

    auto marginal = [&](stepdown_constants constants) {
        out.rejected = stepdown_pvalue(out.pvalues, constants).rejected;
        out.constants = std::move(constants);
    };
    auto bootstrap = [&] {
        return bootstrap_centered_statistics(data, spec.bootstrap_resamples, spec.sided, spec.seed, spec.family,
                                             spec.scaling);
    };
    auto kfwer_run = [&](const resample_matrix& resamples, std::size_t k) {
        auto r = run_kfwer(out.statistics, resamples, k, spec.alpha, spec.kind, spec.n_max);
        return spec.top_k_mod ? apply_top_k_mod(std::move(r), out.statistics, k) : r;
    };

    switch (spec.tag) {
    case method::holm: marginal(holm_constants(s, spec.alpha)); break;
    case method::gh: marginal(gh_constants(s, spec.k, spec.alpha)); break;
    case method::lr: marginal(lr_constants(s, spec.gamma, spec.alpha)); break;
    case method::boot_kfwer: {
        const auto resamples = bootstrap();
        out.stepdown = kfwer_run(resamples, spec.k);
        out.rejected = out.stepdown->rejected;
        break;
    }
    case method::subsample_kfwer: {
        const auto resamples = subsample_statistics(data, *spec.subsample_size, spec.subsample_count, spec.sided,
                                                    spec.seed, spec.family, spec.scaling);
        out.stepdown = kfwer_run(resamples, spec.k);
        out.rejected = out.stepdown->rejected;
        break;
    }
    case method::boot_fdp: {
        const auto resamples = bootstrap();
        auto r = fdp_sequential(out.statistics, resamples, spec.gamma, spec.alpha, spec.kind, spec.n_max,
                                spec.top_k_mod);
        out.rejected = r.result.rejected;
        out.stepdown = std::move(r.result);
        out.fdp = std::move(r.trace);
        break;
    }
    case method::aug_kfwer:
    case method::aug_fdp: {
        const auto resamples = bootstrap();
        out.stepdown = run_kfwer(out.statistics, resamples, 1, spec.alpha, spec.kind, spec.n_max);
        out.augmentation_base = out.stepdown->rejected;
        out.rejected = spec.tag == method::aug_kfwer ? augment_kfwer(*out.augmentation_base, out.statistics, spec.k)
                                                     : augment_fdp(*out.augmentation_base, out.statistics, spec.gamma);
        break;
    }
    }
    return out;
}

} // namespace kfwer

#endif // KFWER_PROCEDURE_HPP
