// Simulates one data set with 25 true signals among 50 hypotheses and compares
// the bootstrap k-FWER and FDP procedures against their marginal counterparts.

#include <cstdio>
#include <vector>

#include "kfwer/kfwer.hpp"

int main() {
    const std::size_t n = 100, s = 50, k = 3;
    const double alpha = 0.05, gamma = 0.1;

    std::vector<double> theta(s, 0.0);
    for (std::size_t i = 0; i < 25; ++i) theta[i] = 0.3;
    const auto data = kfwer::gen_common_correlation(n, s, theta, 0.5, 2024);

    const auto stats = kfwer::t_statistics(data, kfwer::sidedness::one);
    const auto pvalues = kfwer::t_pvalues(stats, n, kfwer::sidedness::one);
    const auto resamples = kfwer::bootstrap_centered_statistics(data, 500, kfwer::sidedness::one, 7);

    const auto holm = kfwer::stepdown_pvalue(pvalues, kfwer::holm_constants(s, alpha));
    const auto gh = kfwer::stepdown_pvalue(pvalues, kfwer::gh_constants(s, k, alpha));
    const auto one_boot = kfwer::stepdown_operative(stats, resamples, 1, alpha);
    const auto k_boot = kfwer::stepdown_operative(stats, resamples, k, alpha);
    const auto fdp = kfwer::fdp_sequential(stats, resamples, gamma, alpha);

    std::printf("Holm            rejects %zu\n", holm.rejected.size());
    std::printf("%zu-gH            rejects %zu\n", k, gh.rejected.size());
    std::printf("1-Boot          rejects %zu\n", one_boot.rejected.size());
    std::printf("%zu-Boot          rejects %zu (%zu steps)\n", k, k_boot.rejected.size(), k_boot.trace.steps.size());
    std::printf("Boot_%.1f        rejects %zu (stopped at k = %zu)\n", gamma, fdp.result.rejected.size(),
                fdp.trace.rounds.back().k);
    for (const auto& step : k_boot.trace.steps)
        std::printf("  step: |A| = %zu, critical value %.4f, %zu new\n", step.active.size(), step.critical_value,
                    step.newly_rejected.size());
}
