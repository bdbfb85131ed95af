// kfwer: command-line front end.
//
//   kfwer test --method boot-kfwer --k 3 data.csv --out report.json
//   kfwer simulate scenarios/s50_rho0_ten.scn --out sim.json
//   kfwer eb-check --reps 100000 --alpha 0.05 --seed 7

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "kfwer/io.hpp"
#include "kfwer/kfwer.hpp"

namespace {

enum exit_code : int {
    ok = 0,
    parse_failure = 2,
    domain_failure = 3,
    io_failure = 4,
};

std::uint64_t entropy_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

bool write_output(const std::optional<std::string>& path, const std::string& text) {
    if (!path) {
        std::cout << text;
        return true;
    }
    std::ofstream out(*path, std::ios::binary);
    if (!out) {
        std::cerr << "kfwer: cannot open output file '" << *path << "'\n";
        return false;
    }
    out << text;
    return static_cast<bool>(out);
}

struct test_options {
    std::string data_file;
    std::string method_name;
    double alpha = 0.05;
    std::size_t k = 1;
    double gamma = 0.1;
    std::string variant_name = "operative";
    std::size_t n_max = kfwer::default_n_max;
    std::string sided = "one";
    std::size_t b_boot = 500;
    std::size_t b_sub = 1000;
    std::optional<std::size_t> subsample_size;
    std::optional<std::uint64_t> seed;
    bool top_k_mod = false;
    std::string statistic = "studentized";
    std::optional<std::string> out;
};

int cmd_test(const test_options& opt) {
    kfwer::procedure_spec spec;
    const auto m = kfwer::parse_method(opt.method_name);
    if (!m) {
        std::string valid;
        for (auto n : kfwer::method_names) valid += (valid.empty() ? "" : ", ") + std::string(n);
        std::cerr << "kfwer: unknown method '" << opt.method_name << "' (valid: " << valid << ")\n";
        return parse_failure;
    }
    spec.tag = *m;
    spec.alpha = opt.alpha;
    spec.k = opt.k;
    spec.gamma = opt.gamma;
    spec.kind = *kfwer::parse_variant(opt.variant_name);
    spec.n_max = opt.n_max;
    spec.sided = opt.sided == "two" ? kfwer::sidedness::two : kfwer::sidedness::one;
    spec.bootstrap_resamples = opt.b_boot;
    spec.subsample_count = opt.b_sub;
    spec.subsample_size = opt.subsample_size;
    spec.seed = opt.seed ? *opt.seed : entropy_seed();
    spec.top_k_mod = opt.top_k_mod;
    spec.family = opt.statistic == "raw" ? kfwer::statistic_family::raw_mean : kfwer::statistic_family::studentized;

    std::ifstream in(opt.data_file, std::ios::binary);
    if (!in) {
        std::cerr << "kfwer: cannot open data file '" << opt.data_file << "'\n";
        return io_failure;
    }
    kfwer::dataset data;
    try {
        data = kfwer::read_csv(in, opt.data_file);
    } catch (const kfwer::parse_error& e) {
        std::cerr << "kfwer: " << e.what() << "\n";
        return parse_failure;
    }

    try {
        const auto outcome = kfwer::run_procedure(data.values, spec);
        kfwer::json report;
        report["command"] = "test";
        report["data"] = {{"file", opt.data_file}, {"n", data.values.rows()}, {"s", data.values.cols()}};
        report["records"] = kfwer::json::array({kfwer::report_record(data, spec, outcome)});
        return write_output(opt.out, report.dump(2) + "\n") ? ok : io_failure;
    } catch (const kfwer::degenerate_column& e) {
        std::cerr << "kfwer: " << opt.data_file << ": column '" << data.names[e.column()]
                  << "' has zero sample variance\n";
        return domain_failure;
    } catch (const kfwer::domain_error& e) {
        std::cerr << "kfwer: " << e.what() << "\n";
        return domain_failure;
    }
}

int cmd_simulate(const std::string& scenario_file, const std::optional<std::string>& out, unsigned threads) {
    std::ifstream in(scenario_file, std::ios::binary);
    if (!in) {
        std::cerr << "kfwer: cannot open scenario file '" << scenario_file << "'\n";
        return io_failure;
    }
    kfwer::scenario sc;
    try {
        sc = kfwer::read_scenario(in, scenario_file);
    } catch (const kfwer::parse_error& e) {
        std::cerr << "kfwer: " << e.what() << "\n";
        return parse_failure;
    }
    try {
        const auto report = kfwer::run_scenario(sc, threads);
        std::cout << kfwer::emit_tables(report);
        kfwer::json j = kfwer::to_json(report);
        j["table"] = kfwer::emit_tables(report);
        if (out) return write_output(out, j.dump(2) + "\n") ? ok : io_failure;
        return ok;
    } catch (const kfwer::domain_error& e) {
        std::cerr << "kfwer: " << e.what() << "\n";
        return domain_failure;
    }
}

int cmd_eb_check(std::size_t reps, double alpha, std::optional<std::uint64_t> seed) {
    const std::uint64_t used = seed ? *seed : entropy_seed();
    try {
        const auto est = kfwer::eb_counterexample(reps, alpha, used);
        std::printf("rejection_frequency %.6f\nmc_standard_error %.6f\nreps %zu\nalpha %g\nseed %llu\n",
                    est.frequency, est.standard_error, est.reps, alpha, static_cast<unsigned long long>(used));
        return ok;
    } catch (const kfwer::domain_error& e) {
        std::cerr << "kfwer: " << e.what() << "\n";
        return domain_failure;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Resampling-based step-down k-FWER and FDP control"};
    app.require_subcommand(1);

    test_options topt;
    auto* test = app.add_subcommand("test", "Apply a multiple-testing procedure to a CSV data file");
    test->add_option("data", topt.data_file, "CSV: header of hypothesis names, then n rows of s values")->required();
    test->add_option("--method", topt.method_name,
                     "holm | gh | lr | boot-kfwer | subsample-kfwer | boot-fdp | aug-kfwer | aug-fdp")
        ->required();
    test->add_option("--alpha", topt.alpha, "Nominal level")->capture_default_str();
    test->add_option("--k", topt.k, "k of the k-FWER")->capture_default_str();
    test->add_option("--gamma", topt.gamma, "FDP bound")->capture_default_str();
    test->add_option("--variant", topt.variant_name, "Step-down variant")
        ->check(CLI::IsMember({"generic", "streamlined", "operative"}))
        ->capture_default_str();
    test->add_option("--nmax", topt.n_max, "Operative subset budget N_max")->capture_default_str();
    test->add_option("--sided", topt.sided, "one | two")->check(CLI::IsMember({"one", "two"}))->capture_default_str();
    test->add_option("--b-boot", topt.b_boot, "Bootstrap resamples B")->capture_default_str();
    test->add_option("--b-sub", topt.b_sub, "Number of subsamples")->capture_default_str();
    test->add_option("--subsample-size", topt.subsample_size, "Subsample size b (required for subsampling)");
    test->add_option("--seed", topt.seed, "Random seed (drawn from system entropy when omitted)");
    test->add_flag("--top-k-mod", topt.top_k_mod, "Reject the k-1 most significant if fewer were rejected");
    test->add_option("--statistic", topt.statistic, "studentized | raw")
        ->check(CLI::IsMember({"studentized", "raw"}))
        ->capture_default_str();
    test->add_option("--out", topt.out, "Report file (stdout when omitted)");

    std::string scenario_file;
    std::optional<std::string> sim_out;
    unsigned threads = 0;
    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo scenario file");
    simulate->add_option("scenario", scenario_file, "Scenario file (key = value lines)")->required();
    simulate->add_option("--out", sim_out, "JSON report file");
    simulate->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

    std::size_t eb_reps = 100000;
    double eb_alpha = 0.05;
    std::optional<std::uint64_t> eb_seed;
    auto* eb = app.add_subcommand("eb-check", "Empirical-Bayes single-hypothesis counterexample");
    eb->add_option("--reps", eb_reps, "Monte Carlo repetitions")->capture_default_str();
    eb->add_option("--alpha", eb_alpha, "Nominal level")->capture_default_str();
    eb->add_option("--seed", eb_seed, "Random seed (drawn from system entropy when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return parse_failure;
    }

    if (*test) return cmd_test(topt);
    if (*simulate) return cmd_simulate(scenario_file, sim_out, threads);
    return cmd_eb_check(eb_reps, eb_alpha, eb_seed);
}
