#ifndef KFWER_SIMULATION_HPP
#define KFWER_SIMULATION_HPP

// Monte Carlo harness: common-correlation Gaussian scenarios, a battery of
// procedures sharing one bootstrap resample matrix per simulated data set,
// and aggregation of empirical error-control rates and power.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "augmentation.hpp"
#include "errors.hpp"
#include "fdp.hpp"
#include "marginal.hpp"
#include "matrix.hpp"
#include "resampling.hpp"
#include "rng.hpp"
#include "stat_kernels.hpp"
#include "stepdown.hpp"

namespace kfwer {

/// Simulation columns, in table order.
enum class sim_procedure {
    one_boot,
    k_aug,
    k_gh,
    k_boot,
    aug_fdp,
    eb_fdp,
    lr_fdp,
    boot_fdp,
    boot_fdp_median,
};

inline constexpr std::string_view sim_procedure_names[] = {
    "one_boot", "k_aug", "k_gh", "k_boot", "aug_fdp", "eb_fdp", "lr_fdp", "boot_fdp", "boot_fdp_median",
};

inline constexpr sim_procedure all_sim_procedures[] = {
    sim_procedure::one_boot, sim_procedure::k_aug,  sim_procedure::k_gh,     sim_procedure::k_boot,
    sim_procedure::aug_fdp,  sim_procedure::eb_fdp, sim_procedure::lr_fdp,   sim_procedure::boot_fdp,
    sim_procedure::boot_fdp_median,
};

inline std::string_view to_string(sim_procedure p) { return sim_procedure_names[static_cast<std::size_t>(p)]; }

inline std::optional<sim_procedure> parse_sim_procedure(std::string_view name) {
    for (std::size_t i = 0; i < std::size(sim_procedure_names); ++i)
        if (sim_procedure_names[i] == name) return static_cast<sim_procedure>(i);
    return std::nullopt;
}

inline bool is_fdp_procedure(sim_procedure p) {
    return p == sim_procedure::aug_fdp || p == sim_procedure::eb_fdp || p == sim_procedure::lr_fdp ||
           p == sim_procedure::boot_fdp || p == sim_procedure::boot_fdp_median;
}

struct scenario {
    std::size_t n = 100;
    std::size_t s = 50;
    double rho = 0.0;
    std::size_t signal_count = 0; // the first signal_count means equal signal_value
    double signal_value = 0.25;
    std::size_t reps = 1000;
    std::size_t B = 500;
    std::uint64_t seed = 1;
    std::size_t k = 3;
    double alpha = 0.05;
    double gamma = 0.1;
    double median_alpha = 0.5;
    std::size_t n_max = default_n_max;
    std::vector<sim_procedure> procedures{std::begin(all_sim_procedures), std::end(all_sim_procedures)};

    std::vector<double> theta() const {
        std::vector<double> t(s, 0.0);
        for (std::size_t i = 0; i < signal_count && i < s; ++i) t[i] = signal_value;
        return t;
    }

    /// I(P): hypotheses with theta_i <= 0.
    index_set true_nulls() const {
        index_set out;
        const auto t = theta();
        for (std::size_t i = 0; i < s; ++i)
            if (t[i] <= 0.0) out.push_back(i);
        return out;
    }
};

inline void validate(const scenario& sc) {
    detail::require(sc.n >= 2, "scenario: n must be >= 2");
    detail::require(sc.s >= 1, "scenario: s must be >= 1");
    detail::require(sc.rho >= 0.0 && sc.rho <= 1.0, "scenario: rho must lie in [0,1]");
    detail::require(sc.signal_count <= sc.s, "scenario: signal_count must not exceed s");
    detail::require(sc.reps >= 1, "scenario: reps must be >= 1");
    detail::require(sc.B >= 1, "scenario: B must be >= 1");
    detail::require(sc.k >= 1 && sc.k <= sc.s, "scenario: k must satisfy 1 <= k <= s");
    detail::require(sc.alpha > 0.0 && sc.alpha < 1.0, "scenario: alpha must lie in (0,1)");
    detail::require(sc.median_alpha > 0.0 && sc.median_alpha < 1.0, "scenario: median_alpha must lie in (0,1)");
    detail::require(sc.gamma >= 0.0 && sc.gamma < 1.0, "scenario: gamma must lie in [0,1)");
    detail::require(sc.n_max >= 1, "scenario: n_max must be >= 1");
}

struct procedure_summary {
    sim_procedure procedure = sim_procedure::one_boot;
    std::string label;       // column heading, e.g. "3-Boot"
    bool implemented = true; // false for the EB column when s > 1
    bool fdp_criterion = false;
    std::size_t k = 1;       // k-FWER criterion
    double alpha = 0.05;
    std::size_t reps = 0;
    double control_rate = 0.0; // fraction of reps with the error event
    double control_se = 0.0;
    double avg_false_rejected = 0.0; // false hypotheses rejected (power)
    double false_rejected_se = 0.0;
};

struct simulation_report {
    scenario config;
    std::vector<procedure_summary> procedures; // table order
};

inline double mc_standard_error(double rate, std::size_t reps) {
    return std::sqrt(std::max(0.0, rate * (1.0 - rate)) / static_cast<double>(reps));
}

// ---------------------------------------------------------------------------
// Single-hypothesis empirical-Bayes reduction

/// One application of the empirical-Bayes rule to a statistic t:
/// pi = 1 if t <= 0 else phi(t)/phi(0); c = Phi^{-1}(1 - alpha/pi) (-inf when
/// the argument is <= 0); reject when t > c.
inline bool eb_rejects(double t, double alpha) {
    const double pi = t <= 0.0 ? 1.0 : std::exp(-0.5 * t * t);
    const double level = 1.0 - alpha / pi;
    const double c = level <= 0.0 ? -std::numeric_limits<double>::infinity() : normal_quantile(level);
    return t > c;
}

struct eb_estimate {
    double frequency = 0.0;
    double standard_error = 0.0;
    std::size_t reps = 0;
};

/// Rejection frequency of the empirical-Bayes rule with T ~ N(0, 1) under the null.
inline eb_estimate eb_counterexample(std::size_t reps, double alpha, std::uint64_t seed) {
    detail::require(reps >= 1, "eb: reps must be >= 1");
    detail::require(alpha > 0.0 && alpha < 1.0, "eb: alpha must lie in (0,1)");
    random_stream rng(seed);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < reps; ++r)
        if (eb_rejects(rng.normal(), alpha)) ++hits;
    eb_estimate out;
    out.reps = reps;
    out.frequency = static_cast<double>(hits) / static_cast<double>(reps);
    out.standard_error = mc_standard_error(out.frequency, reps);
    return out;
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_gamma(double g) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", g);
    return buf;
}

inline std::string column_label(sim_procedure p, const scenario& sc) {
    const std::string k = std::to_string(sc.k);
    const std::string g = format_gamma(sc.gamma);
    switch (p) {
    case sim_procedure::one_boot: return "1-Boot";
    case sim_procedure::k_aug: return k + "-Aug";
    case sim_procedure::k_gh: return k + "-gH";
    case sim_procedure::k_boot: return k + "-Boot";
    case sim_procedure::aug_fdp: return "Aug_" + g;
    case sim_procedure::eb_fdp: return "EB_" + g;
    case sim_procedure::lr_fdp: return "LR_" + g;
    case sim_procedure::boot_fdp: return "Boot_" + g;
    case sim_procedure::boot_fdp_median: return "Boot_" + g + "^Med";
    }
    return "?";
}

struct rep_outcome {
    bool error_event = false;
    std::size_t false_rejected = 0;
};

/// Runs every configured procedure on one simulated data set.
inline std::vector<rep_outcome> run_replication(const scenario& sc, const std::vector<sim_procedure>& procs,
                                                const std::vector<double>& theta, const index_set& true_nulls,
                                                std::size_t rep) {
    const matrix data = gen_common_correlation(sc.n, sc.s, theta, sc.rho, derive_seed(sc.seed, 2 * rep));
    const statistic_vector stats = t_statistics(data, sidedness::one);
    const resample_matrix resamples =
        bootstrap_centered_statistics(data, sc.B, sidedness::one, derive_seed(sc.seed, 2 * rep + 1));

    std::vector<bool> is_null(sc.s, false);
    for (std::size_t i : true_nulls) is_null[i] = true;
    auto count_false = [&](const index_set& rejected) {
        std::size_t f = 0;
        for (std::size_t i : rejected) f += is_null[i] ? 1 : 0;
        return f;
    };

    std::optional<index_set> one_boot;
    auto base = [&]() -> const index_set& {
        if (!one_boot) one_boot = stepdown_operative(stats, resamples, 1, sc.alpha, sc.n_max).rejected;
        return *one_boot;
    };
    std::optional<pvalue_vector> pvalues;
    auto pv = [&]() -> const pvalue_vector& {
        if (!pvalues) pvalues = t_pvalues(stats, sc.n, sidedness::one);
        return *pvalues;
    };

    std::vector<rep_outcome> out(procs.size());
    for (std::size_t c = 0; c < procs.size(); ++c) {
        const sim_procedure p = procs[c];
        index_set rejected;
        switch (p) {
        case sim_procedure::one_boot: rejected = base(); break;
        case sim_procedure::k_aug: rejected = augment_kfwer(base(), stats, sc.k); break;
        case sim_procedure::k_gh: {
            rejection_result r;
            r.rejected = stepdown_pvalue(pv(), gh_constants(sc.s, sc.k, sc.alpha)).rejected;
            rejected = apply_top_k_mod(std::move(r), stats, sc.k).rejected;
            break;
        }
        case sim_procedure::k_boot:
            rejected = apply_top_k_mod(stepdown_operative(stats, resamples, sc.k, sc.alpha, sc.n_max), stats, sc.k)
                           .rejected;
            break;
        case sim_procedure::aug_fdp: rejected = augment_fdp(base(), stats, sc.gamma); break;
        case sim_procedure::eb_fdp:
            if (sc.s == 1 && eb_rejects(stats[0], sc.alpha)) rejected = {0};
            break;
        case sim_procedure::lr_fdp: rejected = stepdown_pvalue(pv(), lr_constants(sc.s, sc.gamma, sc.alpha)).rejected; break;
        case sim_procedure::boot_fdp:
            rejected = fdp_sequential(stats, resamples, sc.gamma, sc.alpha, variant::operative, sc.n_max).result.rejected;
            break;
        case sim_procedure::boot_fdp_median:
            rejected = fdp_sequential(stats, resamples, sc.gamma, sc.median_alpha, variant::operative, sc.n_max)
                           .result.rejected;
            break;
        }
        const std::size_t f = count_false(rejected);
        out[c].false_rejected = rejected.size() - f;
        if (is_fdp_procedure(p)) {
            out[c].error_event =
                !rejected.empty() && static_cast<double>(f) / static_cast<double>(rejected.size()) > sc.gamma;
        } else {
            out[c].error_event = f >= (p == sim_procedure::one_boot ? 1 : sc.k);
        }
    }
    return out;
}

} // namespace detail

/// Runs `sc.reps` independent replications (in parallel across `threads`,
/// 0 = hardware concurrency) and aggregates per-procedure control and power.
/// Replication r uses seeds derived from (sc.seed, r) only, so the report does
/// not depend on the thread count.
inline simulation_report run_scenario(const scenario& sc, unsigned threads = 0) {
    validate(sc);
    simulation_report report;
    report.config = sc;

    std::vector<sim_procedure> procs;
    for (sim_procedure p : all_sim_procedures)
        if (std::find(sc.procedures.begin(), sc.procedures.end(), p) != sc.procedures.end()) procs.push_back(p);
    // The EB column only exists as the single-hypothesis reduction.
    std::vector<sim_procedure> runnable;
    for (sim_procedure p : procs)
        if (p != sim_procedure::eb_fdp || sc.s == 1) runnable.push_back(p);

    const auto theta = sc.theta();
    const auto nulls = sc.true_nulls();
    std::vector<std::vector<detail::rep_outcome>> per_rep(sc.reps);

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, sc.reps));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= sc.reps || failed.load()) return;
            try {
                per_rep[r] = detail::run_replication(sc, runnable, theta, nulls, r);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                return;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    for (sim_procedure p : procs) {
        procedure_summary sum;
        sum.procedure = p;
        sum.label = detail::column_label(p, sc);
        sum.fdp_criterion = is_fdp_procedure(p);
        sum.k = p == sim_procedure::one_boot ? 1 : sc.k;
        sum.alpha = p == sim_procedure::boot_fdp_median ? sc.median_alpha : sc.alpha;
        const auto it = std::find(runnable.begin(), runnable.end(), p);
        if (it == runnable.end()) {
            sum.implemented = false;
            report.procedures.push_back(sum);
            continue;
        }
        const std::size_t c = static_cast<std::size_t>(it - runnable.begin());
        std::size_t events = 0;
        double total = 0.0, total_sq = 0.0;
        for (const auto& rep : per_rep) {
            events += rep[c].error_event ? 1 : 0;
            const double f = static_cast<double>(rep[c].false_rejected);
            total += f;
            total_sq += f * f;
        }
        const double R = static_cast<double>(sc.reps);
        sum.reps = sc.reps;
        sum.control_rate = static_cast<double>(events) / R;
        sum.control_se = mc_standard_error(sum.control_rate, sc.reps);
        sum.avg_false_rejected = total / R;
        const double var = sc.reps > 1 ? std::max(0.0, (total_sq - R * sum.avg_false_rejected * sum.avg_false_rejected) / (R - 1.0)) : 0.0;
        sum.false_rejected_se = std::sqrt(var / R);
        report.procedures.push_back(sum);
    }
    return report;
}

/// Rounds half up to one decimal ("4.85" -> "4.9").
inline std::string format_one_decimal(double x) {
    const double tenths = std::floor(x * 10.0 + 0.5 + 1e-9);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", tenths / 10.0);
    return buf;
}

/// Tab-separated table: header of column labels, then Control (percent) and
/// Rejected (average false hypotheses rejected) rows.
inline std::string emit_tables(const simulation_report& report) {
    std::string header = "";
    std::string control = "Control";
    std::string rejected = "Rejected";
    for (const auto& p : report.procedures) {
        header += "\t" + p.label;
        control += "\t" + (p.implemented ? format_one_decimal(100.0 * p.control_rate) : std::string("n/a"));
        rejected += "\t" + (p.implemented ? format_one_decimal(p.avg_false_rejected) : std::string("n/a"));
    }
    if (report.procedures.empty()) return header + "\n";
    return header + "\n" + control + "\n" + rejected + "\n";
}

} // namespace kfwer

#endif // KFWER_SIMULATION_HPP
