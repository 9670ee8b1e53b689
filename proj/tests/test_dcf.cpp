#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dcfcalc/dcf.hpp"
#include "support/oracles.hpp"

using namespace dcfcalc;

namespace {
Scenario scenario1() {
    Scenario s;
    s.nodes = 10;
    s.payload_bytes = 256;
    return s;
}
}  // namespace

TEST_CASE("frame durations for the 256-byte payload") {
    SlotTiming t = slot_length(scenario1());
    CHECK(t.ack_slots == doctest::Approx(15.2));
    CHECK(t.data_slots == doctest::Approx(19.925));
    CHECK(t.difs_slots == doctest::Approx(2.5));
    CHECK(t.sifs_slots == doctest::Approx(0.5));
    CHECK(t.slot_length == doctest::Approx(38.125));
    CHECK(t.slot_length_int == 38);
    CHECK(t.slot_seconds == doctest::Approx(762.5e-6));
    CHECK(t.calculus_slot_ticks == 1525);
}

TEST_CASE("backoff means double and cap at the maximum window") {
    DcfSolution sol = solve_fixed_point(scenario1());
    std::vector<double> expected{16, 32, 64, 128, 256, 512, 512};
    REQUIRE(sol.mean_backoff.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
        CHECK(sol.mean_backoff[i] == doctest::Approx(expected[i]));
}

TEST_CASE("ten saturated stations solve to the known operating point") {
    DcfSolution sol = solve_fixed_point(scenario1());
    CHECK(sol.tau == doctest::Approx(0.0378).epsilon(2e-3));
    CHECK(sol.gamma == doctest::Approx(0.2931).epsilon(2e-3));
    CHECK(sol.p_nt == doctest::Approx(0.680).epsilon(2e-3));
    CHECK(sol.p_t == doctest::Approx(0.320).epsilon(2e-3));
    CHECK(sol.p_s == doctest::Approx(0.0267).epsilon(3e-3));
    CHECK(sol.p_o == doctest::Approx(sol.gamma));
}

TEST_CASE("the probability identity holds to machine precision") {
    for (int n : {2, 5, 10, 20, 100}) {
        Scenario s = scenario1();
        s.nodes = n;
        DcfSolution sol = solve_fixed_point(s);
        CHECK(std::abs(sol.p_t - sol.p_s - sol.gamma) < 1e-14);
    }
}

TEST_CASE("fixed-point residuals are tiny") {
    for (int n : {2, 5, 10, 20, 100}) {
        Scenario s = scenario1();
        s.nodes = n;
        DcfSolution sol = solve_fixed_point(s);
        double numerator = 0.0, denominator = 0.0, weight = 1.0;
        for (double b : sol.mean_backoff) {
            numerator += weight;
            denominator += weight * b;
            weight *= sol.gamma;
        }
        CHECK(std::abs(sol.tau - numerator / denominator) < 1e-10);
        CHECK(std::abs(sol.gamma - (1.0 - std::pow(1.0 - sol.tau, n - 1))) < 1e-10);
    }
}

TEST_CASE("a lone station never collides") {
    Scenario s = scenario1();
    s.nodes = 1;
    DcfSolution sol = solve_fixed_point(s);
    CHECK(sol.gamma == 0.0);
    CHECK(sol.tau == doctest::Approx(1.0 / 16.0));
}

TEST_CASE("collision probability grows and attempt rate falls with the crowd") {
    double prev_gamma = -1.0, prev_tau = 2.0;
    for (int n : {2, 5, 10, 20, 40, 70, 100}) {
        Scenario s = scenario1();
        s.nodes = n;
        DcfSolution sol = solve_fixed_point(s);
        CHECK(sol.gamma > prev_gamma);
        CHECK(sol.tau < prev_tau);
        prev_gamma = sol.gamma;
        prev_tau = sol.tau;
    }
}

TEST_CASE("impairment MGF bound at a single slot is exactly e^theta") {
    DcfSolution sol = solve_fixed_point(scenario1());
    for (double theta : {0.25, 0.5, 1.0, 2.0})
        CHECK(impairment_mgf(1, theta, sol) == doctest::Approx(std::exp(theta)).epsilon(1e-12));
    CHECK(impairment_mgf(0, 1.0, sol) == doctest::Approx(1.0));
}

TEST_CASE("impairment MGF bound stays within its trivial envelope") {
    DcfSolution sol = solve_fixed_point(scenario1());
    for (int t : {1, 2, 3, 5, 8, 13, 21}) {
        for (double theta : {0.25, 1.0}) {
            double value = impairment_mgf(t, theta, sol);
            CHECK(value >= 1.0);
            CHECK(value <= std::exp(theta * t) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("impairment MGF bound is nondecreasing in theta") {
    DcfSolution sol = solve_fixed_point(scenario1());
    for (int t : {2, 5, 10}) {
        double previous = 0.0;
        for (double theta : {0.1, 0.25, 0.5, 1.0, 1.5, 2.0}) {
            double value = impairment_mgf(t, theta, sol);
            CHECK(value >= previous);
            previous = value;
        }
    }
}

TEST_CASE("log-domain evaluation matches the literal triple sum") {
    DcfSolution sol = solve_fixed_point(scenario1());
    for (int t : {1, 2, 3, 5, 8}) {
        for (double theta : {0.5, 1.0}) {
            double fast = impairment_mgf(t, theta, sol);
            double literal = oracles::impairment_mgf_literal(t, theta, sol);
            CHECK(fast == doctest::Approx(literal).epsilon(1e-10));
        }
    }
}

TEST_CASE("the MGF bound dominates Monte-Carlo estimates of the slot process") {
    DcfSolution sol = solve_fixed_point(scenario1());
    std::uint64_t seed = 2024;
    for (int t : {2, 5, 10}) {
        for (double theta : {0.5, 1.0}) {
            auto estimate = oracles::impairment_mgf_monte_carlo(t, theta, sol, 40000, seed++);
            double bound = impairment_mgf(t, theta, sol);
            CHECK(bound >= estimate.mean - 3.0 * estimate.std_error);
        }
    }
}

TEST_CASE("stability threshold of the ten-station scenario") {
    DcfSolution sol = solve_fixed_point(scenario1());
    CHECK(stability_threshold(sol) == doctest::Approx(0.0791511).epsilon(1e-4));
}

TEST_CASE("threshold vanishes without successful transmissions") {
    DcfSolution sol;
    sol.p_s = 0.0;
    sol.p_nt = 0.5;
    sol.p_t = 0.5;
    sol.slot_len = 38.125;
    CHECK(stability_threshold(sol) == 0.0);
}

TEST_CASE("more stations leave less capacity per station") {
    Scenario s10 = scenario1();
    Scenario s20 = scenario1();
    s20.nodes = 20;
    CHECK(stability_threshold(solve_fixed_point(s20)) <
          stability_threshold(solve_fixed_point(s10)));
}

TEST_CASE("scenario validation rejects degenerate parameters") {
    Scenario s = scenario1();
    s.nodes = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = scenario1();
    s.payload_bytes = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = scenario1();
    s.phy.cw_max = 16;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("timing scales with the payload") {
    Scenario s = scenario1();
    s.payload_bytes = 512;
    SlotTiming t = slot_length(s);
    // DATA: 24 bytes at 1 Mbps plus 540 bytes at 11 Mbps, on the 0.5 us clock
    CHECK(t.data_ticks == 1169);
    CHECK(t.data_slots == doctest::Approx(29.225));
    CHECK(t.slot_length == doctest::Approx(47.425));
    CHECK(t.slot_length_int == 47);
    CHECK(t.ack_slots == doctest::Approx(15.2));
}
