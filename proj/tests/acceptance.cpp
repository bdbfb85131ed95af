// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.
//
//   acceptance                 run A1-A8
//   acceptance --only A3       run the listed criteria (repeatable)
//   acceptance --skip A3       run everything except the listed criteria

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures/handcrafted_s4_k2.hpp"
#include "kfwer/kfwer.hpp"
#include "support.hpp"

using namespace kfwer;

namespace {

struct verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [miss]");
    }
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

const procedure_summary& column(const simulation_report& r, sim_procedure p) {
    for (const auto& s : r.procedures)
        if (s.procedure == p) return s;
    throw std::runtime_error("missing column");
}

bool subset_of(const index_set& a, const index_set& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

// ---------------------------------------------------------------------------

void a1(verdict& v) {
    const auto est = eb_counterexample(100000, 0.05, 20240601);
    v.require(std::abs(est.frequency - 0.107) <= 0.005,
              "EB rejection frequency " + fmt("%.4f", est.frequency) + " (SE " + fmt("%.4f", est.standard_error) +
                  ", target 0.107 +/- 0.005)");
}

scenario s50(double rho, std::size_t signals, std::uint64_t seed) {
    scenario sc;
    sc.n = 100;
    sc.s = 50;
    sc.k = 3;
    sc.alpha = 0.05;
    sc.gamma = 0.1;
    sc.B = 200;
    sc.reps = 1000;
    sc.rho = rho;
    sc.signal_count = signals;
    sc.signal_value = 0.25;
    sc.seed = seed;
    sc.procedures = {sim_procedure::one_boot, sim_procedure::k_boot, sim_procedure::boot_fdp,
                     sim_procedure::boot_fdp_median};
    return sc;
}

struct a2_reports {
    simulation_report null0, ten0, rho8;
};

const a2_reports& a2_data() {
    static const a2_reports reports{run_scenario(s50(0.0, 0, 101)), run_scenario(s50(0.0, 10, 102)),
                                    run_scenario(s50(0.8, 25, 103))};
    return reports;
}

void control_near(verdict& v, const std::string& name, const procedure_summary& p, double target_pct, double tol_pp) {
    const double got = 100.0 * p.control_rate;
    v.require(std::abs(got - target_pct) <= tol_pp,
              name + " " + p.label + " Control " + fmt("%.1f", got) + " (target " + fmt("%.1f", target_pct) + ")");
}

void rejected_near(verdict& v, const std::string& name, const procedure_summary& p, double target) {
    const double got = p.avg_false_rejected;
    v.require(std::abs(got - target) <= 0.15 * target,
              name + " " + p.label + " Rejected " + fmt("%.2f", got) + " (target " + fmt("%.1f", target) + ")");
}

void a2(verdict& v) {
    const auto& r = a2_data();
    control_near(v, "rho=0 null", column(r.null0, sim_procedure::one_boot), 5.0, 2.0);
    control_near(v, "rho=0 null", column(r.null0, sim_procedure::k_boot), 4.6, 2.0);
    rejected_near(v, "rho=0 ten", column(r.ten0, sim_procedure::one_boot), 2.6);
    rejected_near(v, "rho=0 ten", column(r.ten0, sim_procedure::k_boot), 6.3);
    rejected_near(v, "rho=0 ten", column(r.ten0, sim_procedure::boot_fdp), 2.6);
    control_near(v, "rho=0.8 25", column(r.rho8, sim_procedure::k_boot), 4.5, 2.0);
    rejected_near(v, "rho=0.8 25", column(r.rho8, sim_procedure::k_boot), 15.5);
}

void a3(verdict& v) {
    scenario sc;
    sc.n = 100;
    sc.s = 400;
    sc.k = 10;
    sc.rho = 0.5;
    sc.signal_count = 200;
    sc.signal_value = 0.25;
    sc.reps = 500;
    sc.B = 200;
    sc.seed = 104;
    sc.procedures = {sim_procedure::k_boot, sim_procedure::boot_fdp};
    const auto r = run_scenario(sc);
    control_near(v, "s=400 rho=0.5 200", column(r, sim_procedure::k_boot), 5.1, 2.5);
    rejected_near(v, "s=400 rho=0.5 200", column(r, sim_procedure::k_boot), 99.3);
    control_near(v, "s=400 rho=0.5 200", column(r, sim_procedure::boot_fdp), 5.0, 2.5);
}

void a4(verdict& v) {
    const int instances = 1000;
    random_stream rng(4004);
    std::size_t fails[8] = {};

    // (a) critical value monotone in K.
    for (int t = 0; t < instances; ++t) {
        const auto inst = support::random_instance(rng, 10, 40, t % 2 == 0);
        const auto R = support::to_resamples(inst.rows);
        const std::size_t s = inst.statistics.size();
        index_set K, I;
        for (std::size_t i = 0; i < s; ++i)
            if (rng.uniform() < 0.7) K.push_back(i);
        if (K.empty()) K.push_back(0);
        for (std::size_t i : K)
            if (rng.uniform() < 0.6) I.push_back(i);
        if (I.empty()) I.push_back(K.back());
        const std::size_t k = 1 + rng.below(I.size());
        const double alpha = 0.01 + 0.9 * rng.uniform();
        if (critical_value(R, I, k, alpha) > critical_value(R, K, k, alpha)) ++fails[0];
    }

    // (b) nesting, (c) N_max = 1 and k = 1 coincidences, (d) k-monotonicity.
    for (int t = 0; t < instances; ++t) {
        const auto inst = support::random_instance(rng, 9, 40, t % 3 == 0);
        const statistic_vector T(inst.statistics);
        const auto R = support::to_resamples(inst.rows);
        const std::size_t s = inst.statistics.size();
        const double alpha = 0.05 + 0.4 * rng.uniform();
        const std::size_t n_max = 1 + rng.below(20);
        std::vector<index_set> previous(3);
        bool b_ok = true, c_ok = true, d_ok = true;
        const auto g1 = stepdown_generic(T, R, 1, alpha);
        const auto st1 = stepdown_streamlined(T, R, 1, alpha).trace;
        c_ok = c_ok && st1.steps == g1.trace.steps && st1.stop == g1.trace.stop;
        c_ok = c_ok && stepdown_operative(T, R, 1, alpha, n_max).trace.steps == g1.trace.steps;
        for (std::size_t k = 1; k <= s; ++k) {
            const auto g = stepdown_generic(T, R, k, alpha).rejected;
            const auto o = stepdown_operative(T, R, k, alpha, n_max).rejected;
            const auto st = stepdown_streamlined(T, R, k, alpha).rejected;
            b_ok = b_ok && subset_of(g, o) && subset_of(o, st);
            c_ok = c_ok && stepdown_operative(T, R, k, alpha, 1).rejected == st;
            const index_set* now[3] = {&g, &o, &st};
            for (std::size_t i = 0; i < 3; ++i) {
                d_ok = d_ok && subset_of(previous[i], *now[i]);
                previous[i] = *now[i];
            }
        }
        fails[1] += b_ok ? 0 : 1;
        fails[2] += c_ok ? 0 : 1;
        fails[3] += d_ok ? 0 : 1;
    }

    // (e) constant identities, (f) gH constants nondecreasing in k.
    for (int t = 0; t < instances; ++t) {
        const std::size_t s = 1 + rng.below(200);
        const double alpha = 0.001 + 0.5 * rng.uniform();
        const auto holm = holm_constants(s, alpha).alphas;
        if (gh_constants(s, 1, alpha).alphas != holm || lr_constants(s, 0.0, alpha).alphas != holm) ++fails[4];
        const std::size_t k = 1 + rng.below(s);
        if (k < s) {
            const auto lo = gh_constants(s, k, alpha).alphas;
            const auto hi = gh_constants(s, k + 1, alpha).alphas;
            for (std::size_t j = 0; j < s; ++j)
                if (lo[j] > hi[j]) {
                    ++fails[5];
                    break;
                }
        }
    }

    // (g) augmentation count vs an exact-integer scan, gamma = p/100.
    for (std::uint64_t p = 0; p < 100; ++p) {
        std::uint64_t D = 0;
        for (std::uint64_t Rsize = 0; Rsize <= 10000; ++Rsize) {
            while (Rsize > 0 && (D + 1) * 100 <= p * (D + 1 + Rsize)) ++D;
            if (augmentation_count(Rsize, static_cast<double>(p) / 100.0) != D) ++fails[6];
        }
    }

    // (h) size of the k-augmented set.
    for (int t = 0; t < instances; ++t) {
        const std::size_t s = 1 + rng.below(40);
        std::vector<double> x(s);
        for (auto& e : x) e = rng.normal();
        index_set base;
        for (std::size_t i = 0; i < s; ++i)
            if (rng.uniform() < 0.4) base.push_back(i);
        const std::size_t k = 1 + rng.below(s + 2);
        if (augment_kfwer(base, statistic_vector(x), k).size() != std::min(base.size() + k - 1, s)) ++fails[7];
    }

    const char* names = "abcdefgh";
    for (int i = 0; i < 8; ++i)
        v.require(fails[i] == 0, std::string("(") + names[i] + ") " + std::to_string(fails[i]) + " failures");
}

void a5(verdict& v) {
    const double anchor = oracle_critical_value({2, 0.0, 1000000, 5005}, {0, 1}, 1, 0.05);
    const double target = normal_quantile(std::sqrt(0.95));
    v.require(std::abs(anchor - target) <= 0.01, "anchor " + fmt("%.4f", anchor) + " vs " + fmt("%.4f", target));
    const index_set all{0, 1, 2, 3, 4};
    const std::vector<double> theta(5, 0.0);
    std::uint64_t seed = 5100;
    for (double rho : {0.0, 0.5}) {
        const auto data = gen_common_correlation(10000, 5, theta, rho, ++seed);
        const auto R = bootstrap_centered_statistics(data, 4000, sidedness::one, ++seed);
        for (std::size_t k : {1u, 2u}) {
            const double boot = critical_value(R, all, k, 0.05);
            const double oracle = oracle_critical_value({5, rho, 1000000, ++seed}, all, k, 0.05);
            v.require(std::abs(boot - oracle) <= 0.05, "rho=" + fmt("%.1f", rho) + " k=" + std::to_string(k) + " boot " +
                                                           fmt("%.4f", boot) + " oracle " + fmt("%.4f", oracle));
        }
    }
}

void a6(verdict& v) {
    const std::vector<double> x{0.3, -1.2, 2.0, 0.7};
    std::vector<double> exact;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) {
            const auto m = moments_of(std::vector<double>{x[i], x[j]});
            exact.push_back(std::sqrt(2.0) * m.mean / m.sd);
        }
    const std::size_t S = 100000;
    const auto r = subsample_statistics(matrix(4, 1, x), 2, S, sidedness::one, 6006);
    std::vector<double> freq(exact.size(), 0.0);
    std::size_t unmatched = 0;
    for (std::size_t a = 0; a < S; ++a) {
        const double value = r.values()(a, 0);
        const auto it = std::find_if(exact.begin(), exact.end(), [&](double e) { return std::abs(e - value) < 1e-12; });
        if (it == exact.end()) ++unmatched;
        else freq[static_cast<std::size_t>(it - exact.begin())] += 1.0 / static_cast<double>(S);
    }
    double tv = static_cast<double>(unmatched) / static_cast<double>(S);
    for (double f : freq) tv += 0.5 * std::abs(f - 1.0 / 6.0);
    v.require(tv <= 0.02, "total variation " + fmt("%.4f", tv));
}

void a7(verdict& v) {
    const statistic_vector T(fixture::statistics);
    const auto R = support::to_resamples(fixture::resample_rows);
    auto same = [](const rejection_result& got, const fixture::frozen_transcript& want) {
        if (got.trace.steps.size() != want.steps.size()) return false;
        for (std::size_t j = 0; j < want.steps.size(); ++j) {
            const auto& g = got.trace.steps[j];
            const auto& w = want.steps[j];
            if (g.active != w.active || g.rejected_before != w.rejected_before ||
                g.critical_value != w.critical_value || g.newly_rejected != w.newly_rejected)
                return false;
        }
        return std::string(to_string(got.trace.stop)) == want.stop && got.rejected == want.rejected;
    };
    v.require(same(stepdown_generic(T, R, fixture::k, fixture::alpha), fixture::generic), "generic");
    v.require(same(stepdown_operative(T, R, fixture::k, fixture::alpha, fixture::n_max), fixture::operative),
              "operative");
    v.require(same(stepdown_streamlined(T, R, fixture::k, fixture::alpha), fixture::streamlined), "streamlined");
}

void a8(verdict& v) {
    const auto& r = a2_data();
    const std::pair<const char*, const simulation_report*> all[] = {
        {"rho=0 null", &r.null0}, {"rho=0 ten", &r.ten0}, {"rho=0.8 25", &r.rho8}};
    for (const auto& [name, report] : all) {
        const auto& boot = column(*report, sim_procedure::boot_fdp);
        const auto& med = column(*report, sim_procedure::boot_fdp_median);
        v.require(boot.control_rate <= 0.05 + 3.0 * boot.control_se,
                  std::string(name) + " " + boot.label + " " + fmt("%.3f", boot.control_rate));
        v.require(med.control_rate <= 0.5 + 3.0 * med.control_se,
                  std::string(name) + " " + med.label + " " + fmt("%.3f", med.control_rate));
    }
}

} // namespace

int main(int argc, char** argv) {
    std::set<std::string> only, skip;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--only") only.insert(argv[i + 1]);
        else if (flag == "--skip") skip.insert(argv[i + 1]);
        else {
            std::fprintf(stderr, "usage: acceptance [--only ID | --skip ID]...\n");
            return 2;
        }
    }
    if (argc % 2 == 0) {
        std::fprintf(stderr, "usage: acceptance [--only ID | --skip ID]...\n");
        return 2;
    }

    const std::pair<const char*, std::function<void(verdict&)>> criteria[] = {
        {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5}, {"A6", a6}, {"A7", a7}, {"A8", a8},
    };
    bool all_pass = true;
    for (const auto& [id, body] : criteria) {
        if ((!only.empty() && !only.contains(id)) || skip.contains(id)) continue;
        verdict v;
        const auto start = std::chrono::steady_clock::now();
        try {
            body(v);
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %s (%.1fs) %s\n", id, v.pass ? "PASS" : "FAIL", secs, v.detail.str().c_str());
        std::fflush(stdout);
        all_pass = all_pass && v.pass;
    }
    return all_pass ? 0 : 1;
}
