#include <catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "kfwer/simulation.hpp"

using Catch::Approx;
using namespace kfwer;

namespace {

scenario small_scenario() {
    scenario sc;
    sc.n = 30;
    sc.s = 8;
    sc.k = 2;
    sc.reps = 20;
    sc.B = 50;
    sc.seed = 3;
    sc.signal_count = 3;
    sc.signal_value = 0.8;
    return sc;
}

} // namespace

TEST_CASE("simulation is deterministic and independent of thread count", "[simulation]") {
    const auto sc = small_scenario();
    const auto one = run_scenario(sc, 1);
    const auto four = run_scenario(sc, 4);
    REQUIRE(one.procedures.size() == four.procedures.size());
    for (std::size_t i = 0; i < one.procedures.size(); ++i) {
        CHECK(one.procedures[i].control_rate == four.procedures[i].control_rate);
        CHECK(one.procedures[i].avg_false_rejected == four.procedures[i].avg_false_rejected);
    }
    CHECK(emit_tables(one) == emit_tables(four));
}

TEST_CASE("column labels and table layout", "[simulation]") {
    const auto report = run_scenario(small_scenario(), 2);
    const std::string table = emit_tables(report);
    CHECK(table.starts_with("\t1-Boot\t2-Aug\t2-gH\t2-Boot\tAug_0.1\tEB_0.1\tLR_0.1\tBoot_0.1\tBoot_0.1^Med\n"));
    CHECK(table.find("\nControl\t") != std::string::npos);
    CHECK(table.find("\nRejected\t") != std::string::npos);
    // EB is only defined for a single hypothesis.
    CHECK_FALSE(report.procedures[5].implemented);
    CHECK(table.find("n/a") != std::string::npos);

    simulation_report empty;
    CHECK(emit_tables(empty) == "\n");
}

TEST_CASE("all-signal scenario has no false rejections", "[simulation]") {
    auto sc = small_scenario();
    sc.signal_count = sc.s;
    sc.procedures = {sim_procedure::one_boot, sim_procedure::k_boot, sim_procedure::boot_fdp};
    const auto report = run_scenario(sc, 2);
    for (const auto& p : report.procedures) CHECK(p.control_rate == 0.0);
}

TEST_CASE("single replication and the s = 1 reduction", "[simulation]") {
    scenario sc;
    sc.n = 20;
    sc.s = 1;
    sc.k = 1;
    sc.reps = 1;
    sc.B = 20;
    sc.procedures = {sim_procedure::eb_fdp, sim_procedure::one_boot};
    const auto report = run_scenario(sc, 1);
    REQUIRE(report.procedures.size() == 2);
    CHECK(report.procedures[0].procedure == sim_procedure::one_boot);
    CHECK(report.procedures[1].implemented);
    CHECK(report.procedures[1].control_se == 0.0);
}

TEST_CASE("scenario validation", "[simulation]") {
    auto sc = small_scenario();
    sc.k = 9;
    CHECK_THROWS_AS(run_scenario(sc), domain_error);
    sc = small_scenario();
    sc.rho = 1.5;
    CHECK_THROWS_AS(run_scenario(sc), domain_error);
    sc = small_scenario();
    sc.signal_count = 9;
    CHECK_THROWS_AS(run_scenario(sc), domain_error);
}

TEST_CASE("one-decimal formatting rounds half up", "[simulation]") {
    CHECK(format_one_decimal(4.85) == "4.9");
    CHECK(format_one_decimal(2.55) == "2.6");
    CHECK(format_one_decimal(2.6) == "2.6");
    CHECK(format_one_decimal(0.0) == "0.0");
    CHECK(format_one_decimal(99.34) == "99.3");
}

TEST_CASE("Monte Carlo standard error", "[simulation]") {
    CHECK(mc_standard_error(0.05, 1000) == Approx(std::sqrt(0.05 * 0.95 / 1000.0)));
    CHECK(mc_standard_error(0.0, 10) == 0.0);
}

TEST_CASE("empirical-Bayes rule branches", "[eb]") {
    // t <= 0: pi = 1, c = z_{0.95}.
    CHECK_FALSE(eb_rejects(-0.5, 0.05));
    CHECK_FALSE(eb_rejects(0.0, 0.05));
    // Large t: alpha / pi exceeds 1, c = -inf.
    CHECK(eb_rejects(3.0, 0.05));
    // 1 - alpha/pi <= 0 exactly when t >= sqrt(2 log(1/alpha)).
    const double edge = std::sqrt(2.0 * std::log(1.0 / 0.05));
    CHECK(eb_rejects(edge + 1e-9, 0.05));
    // Intermediate t compared against the normal quantile from an independent implementation.
    const boost::math::normal dist;
    for (double t = 0.05; t < edge; t += 0.05) {
        const double pi = std::exp(-0.5 * t * t);
        const double c = boost::math::quantile(dist, 1.0 - 0.05 / pi);
        if (std::abs(t - c) > 1e-9) REQUIRE(eb_rejects(t, 0.05) == (t > c));
    }
}

TEST_CASE("empirical-Bayes estimate is reproducible", "[eb]") {
    const auto a = eb_counterexample(20000, 0.05, 9);
    const auto b = eb_counterexample(20000, 0.05, 9);
    CHECK(a.frequency == b.frequency);
    CHECK(a.standard_error == Approx(mc_standard_error(a.frequency, 20000)));
    CHECK_THROWS_AS(eb_counterexample(0, 0.05, 1), domain_error);
}
