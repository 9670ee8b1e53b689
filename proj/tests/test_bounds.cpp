#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "dcfcalc/bounds.hpp"
#include "support/oracles.hpp"

using namespace dcfcalc;

namespace {
Scenario scenario1() {
    Scenario s;
    s.nodes = 10;
    s.payload_bytes = 256;
    return s;
}

std::vector<double> unit_grid(double max) {
    std::vector<double> grid;
    for (double x = 0.0; x <= max; x += 1.0) grid.push_back(x);
    return grid;
}
}  // namespace

TEST_CASE("fitting an exact line recovers slope and zero offset") {
    FitResult fit = fit_upper_constraint([](int t) { return 2.0 * t; }, 1.0);
    CHECK(fit.converged);
    CHECK(fit.constraint.rho == doctest::Approx(2.0));
    CHECK(fit.constraint.sigma == doctest::Approx(0.0));
}

TEST_CASE("fitting a kinked envelope recovers the final slope and offset") {
    FitResult fit =
        fit_upper_constraint([](int t) { return std::min(2.0 * t, double(t) + 5.0); }, 1.0);
    CHECK(fit.converged);
    CHECK(fit.constraint.rho == doctest::Approx(1.0));
    CHECK(fit.constraint.sigma == doctest::Approx(5.0));
}

TEST_CASE("a quadratic never converges within the horizon") {
    FitResult fit = fit_upper_constraint([](int t) { return double(t) * double(t); }, 1.0, 1e-5, 400);
    CHECK(!fit.converged);
    CHECK(fit.t_star == 400);
}

TEST_CASE("the impairment fit reproduces the known envelope at unit theta") {
    DcfSolution sol = solve_fixed_point(scenario1());
    FitResult fit = fit_impairment(sol, 1.0);
    CHECK(fit.converged);
    CHECK(fit.t_star <= 500);
    CHECK(fit.constraint.rho == doctest::Approx(0.948).epsilon(0.01 / 0.948));
    CHECK(std::abs(fit.constraint.sigma - 0.096) <= 0.02);

    // the fitted line dominates the tabulated curve it was fit to
    for (int t = 0; t <= fit.t_star; ++t) {
        double m = impairment_log_mgf(t, 1.0, sol);
        CHECK(fit.constraint.rho * t + fit.constraint.sigma >= m - 1e-9);
    }
}

TEST_CASE("fit input validation") {
    CHECK_THROWS_AS(fit_upper_constraint([](int t) { return double(t) + 1.0; }, 1.0),
                    std::invalid_argument);  // M(0) != 0
    CHECK_THROWS_AS(fit_upper_constraint([](int t) { return -double(t); }, 1.0),
                    std::invalid_argument);  // decreasing
}

TEST_CASE("the service curve pairs the residual rate with the fitted tail") {
    DcfSolution sol = solve_fixed_point(scenario1());
    WeakServiceCurve service = service_curve(sol, 1.0, 0.968);
    CHECK(service.beta.rate == doctest::Approx(0.032));
    CHECK(service.capacity == doctest::Approx(1.0));

    FitResult fit = fit_impairment(sol, 1.0);
    BoundingFunction expected = vbc_from_constraint(fit.constraint, 0.968).f;
    CHECK(service.g.raw(0.0) == doctest::Approx(expected.raw(0.0)));
    CHECK(service.g.raw(3.0) == doctest::Approx(expected.raw(3.0)));

    WeakServiceCurve nearly_starved = service_curve(sol, 1.0, 0.9999);
    CHECK(nearly_starved.beta.rate == doctest::Approx(0.0001));

    CHECK_THROWS_AS(service_curve(sol, 1.0, 0.94), std::domain_error);  // below rho_I
    CHECK_THROWS_AS(service_curve(sol, 1.0, 1.0), std::domain_error);
}

TEST_CASE("saturated impairment paths respect the service tail") {
    DcfSolution sol = solve_fixed_point(scenario1());
    WeakServiceCurve service = service_curve(sol, 1.0, 0.968);
    const double r_impairment = 0.968;

    const int paths = 1000, horizon = 100;
    std::mt19937_64 rng(4242);
    std::vector<double> sup_values;
    sup_values.reserve(paths);
    for (int p = 0; p < paths; ++p) {
        std::vector<double> path = oracles::impairment_path(horizon, sol, rng);
        double sup = -1e18, min_offset = 0.0;
        for (int t = 1; t <= horizon; ++t) {
            double offset = path[std::size_t(t)] - r_impairment * t;
            sup = std::max(sup, offset - min_offset);
            min_offset = std::min(min_offset, offset);
        }
        sup_values.push_back(sup);
    }
    for (double x : {2.0, 4.0, 5.0, 6.0}) {
        double violations = 0.0;
        for (double sup : sup_values)
            if (sup > x) violations += 1.0;
        double p_hat = violations / paths;
        double std_error = std::sqrt(p_hat * (1.0 - p_hat) / paths) + 1e-9;
        CHECK(p_hat <= service.g.probability(x) + 3.0 * std_error);
    }
}

TEST_CASE("stability is a strict inequality") {
    DcfSolution sol = solve_fixed_point(scenario1());
    double threshold = stability_threshold(sol);
    CHECK(check_stability(StabilityInput{0.04, 1.0 - threshold, 1.0}));
    CHECK(!check_stability(StabilityInput{0.081, 1.0 - threshold, 1.0}));
    CHECK(!check_stability(StabilityInput{threshold, 1.0 - threshold, 1.0}));
}

TEST_CASE("the backlog tail composes arrival and service tails") {
    DcfSolution sol = solve_fixed_point(scenario1());
    WeakServiceCurve service = service_curve(sol, 1.0, 0.968);
    VbcArrivalCurve cbr = cbr_arrival_curve(0.032);  // matches the service rate

    for (double x : {1.0, 5.0, 8.0, 12.0}) {
        BacklogTailValue value = backlog_tail(cbr, service, x);
        CHECK(value.feasible);
        double expected =
            std::clamp(oracles::grid_convolution(cbr.f, service.g, x), 0.0, 1.0);
        CHECK(value.probability == doctest::Approx(expected).epsilon(1e-9));
    }

    VbcArrivalCurve too_fast = cbr_arrival_curve(0.05);
    BacklogTailValue trivial = backlog_tail(too_fast, service, 4.0);
    CHECK(!trivial.feasible);
    CHECK(trivial.probability == 1.0);
}

TEST_CASE("optimized cbr tails undercut poisson tails at matched rate") {
    DcfSolution sol = solve_fixed_point(scenario1());
    std::vector<double> grid = unit_grid(40.0);
    BoundReport cbr = optimize_backlog_tail(TrafficModel::cbr(0.04), sol, grid);
    BoundReport poisson = optimize_backlog_tail(TrafficModel::poisson(0.04), sol, grid);
    REQUIRE(cbr.feasible);
    REQUIRE(poisson.feasible);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(cbr.tail.table[i].second < poisson.tail.table[i].second);
}

TEST_CASE("heavier load forces smaller optimal exponents") {
    DcfSolution sol = solve_fixed_point(scenario1());
    std::vector<double> grid = unit_grid(40.0);
    BoundReport low = optimize_backlog_tail(TrafficModel::poisson(0.04), sol, grid);
    BoundReport high = optimize_backlog_tail(TrafficModel::poisson(0.07), sol, grid);
    REQUIRE(low.feasible);
    REQUIRE(high.feasible);
    CHECK(high.theta1 < low.theta1);
    CHECK(high.theta2 < low.theta2);
}

TEST_CASE("optimized tails are decreasing and beaten by no single parameter set") {
    DcfSolution sol = solve_fixed_point(scenario1());
    std::vector<double> grid = unit_grid(30.0);
    BoundReport report = optimize_backlog_tail(TrafficModel::cbr(0.04), sol, grid);
    REQUIRE(report.feasible);
    CHECK(report.r_arrival + report.r_impairment == doctest::Approx(1.0));
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < report.tail.table.size(); ++i) {
        double value = report.tail.table[i].second;
        CHECK(value <= previous + 1e-12);
        double single =
            convolve_bounding(report.arrival_tail, report.service_tail, grid[i]);
        CHECK(value <= single * (1.0 + 1e-9));
        previous = value;
    }
}

TEST_CASE("an unstable rate yields an infeasible report") {
    DcfSolution sol = solve_fixed_point(scenario1());
    BoundReport report = optimize_backlog_tail(TrafficModel::poisson(0.081), sol, unit_grid(10.0));
    CHECK(!report.feasible);
    CHECK(report.tail.probability(0.0) == 1.0);
}

TEST_CASE("expected backlog of a vanishing tail is zero") {
    BoundReport report;
    report.feasible = true;
    report.arrival_tail = BoundingFunction::zero();
    report.service_tail = BoundingFunction::zero();
    CHECK(expected_backlog_bound(report) == 0.0);
}

TEST_CASE("expected backlog of a unit exponential matches the geometric series") {
    BoundReport report;
    report.feasible = true;
    report.arrival_tail = BoundingFunction::exponential(1.0, 1.0);
    report.service_tail = BoundingFunction::zero();
    // sum over i >= 0 of e^{-i} (i + 1) = (1 - e^{-1})^{-2}
    CHECK(expected_backlog_bound(report) == doctest::Approx(2.5026503).epsilon(1e-5));
}

TEST_CASE("the pipeline produces a finite expected backlog when stable") {
    DcfSolution sol = solve_fixed_point(scenario1());
    BoundReport report = optimize_backlog_tail(TrafficModel::cbr(0.04), sol, unit_grid(40.0));
    REQUIRE(report.feasible);
    double expected = expected_backlog_bound(report);
    CHECK(expected > 0.0);
    CHECK(std::isfinite(expected));
}

TEST_CASE("expected backlog rejects non-exponential tails") {
    BoundReport report;
    report.feasible = true;
    report.arrival_tail = BoundingFunction::tabulated({{0.0, 1.0}, {1.0, 0.5}});
    report.service_tail = BoundingFunction::zero();
    CHECK_THROWS_AS(expected_backlog_bound(report), std::invalid_argument);
}

TEST_CASE("delay bounds follow the mean backlog") {
    CHECK(delay_mean_bound(0.0, 0.04) == 0.0);
    CHECK(delay_mean_bound(1.0, 0.04) == doctest::Approx(25.0));
    CHECK_THROWS_AS(delay_mean_bound(1.0, 0.0), std::invalid_argument);

    CHECK(delay_tail_bound(1.0, 0.04, 25.0) == doctest::Approx(1.0));
    CHECK(delay_tail_bound(1.0, 0.04, 100.0) == doctest::Approx(0.25));
    CHECK_THROWS_AS(delay_tail_bound(1.0, 0.04, 0.0), std::invalid_argument);
}

TEST_CASE("the markov delay tail is decreasing in x and linear in backlog") {
    std::mt19937_64 rng(17);
    auto uniform = [&] { return double(rng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 20; ++trial) {
        double backlog = 10.0 * uniform();
        double lambda = 0.01 + 0.1 * uniform();
        double previous = 2.0;
        for (double x : {40.0, 80.0, 160.0, 320.0, 640.0}) {
            double value = delay_tail_bound(backlog, lambda, x);
            CHECK(value <= previous);
            previous = value;
            double doubled = delay_tail_bound(2.0 * backlog, lambda, x);
            if (doubled < 1.0) CHECK(doubled == doctest::Approx(2.0 * value));
        }
    }
}

TEST_CASE("optimizer options are validated") {
    DcfSolution sol = solve_fixed_point(scenario1());
    OptimizerOptions bad;
    bad.theta_points = 1;
    CHECK_THROWS_AS(optimize_backlog_tail(TrafficModel::cbr(0.04), sol, unit_grid(5.0), bad),
                    std::invalid_argument);
    bad = OptimizerOptions{};
    bad.theta_min = 0.0;
    CHECK_THROWS_AS(optimize_backlog_tail(TrafficModel::cbr(0.04), sol, unit_grid(5.0), bad),
                    std::invalid_argument);
    CHECK_THROWS_AS(optimize_backlog_tail(TrafficModel::cbr(0.04), sol, {}, OptimizerOptions{}),
                    std::invalid_argument);
}

TEST_CASE("the optimizer is at least as tight as an independent coarse search") {
    DcfSolution sol = solve_fixed_point(scenario1());
    const double lambda = 0.04;
    std::vector<double> grid = unit_grid(40.0);
    BoundReport report = optimize_backlog_tail(TrafficModel::poisson(lambda), sol, grid);
    REQUIRE(report.feasible);

    // reference: dense rectangular search over exponents and rate splits,
    // assembled from the primitives only
    std::vector<double> thetas;
    for (int i = 0; i < 12; ++i)
        thetas.push_back(1e-3 * std::pow(4.0 / 1e-3, double(i) / 11.0));
    for (double x : {10.0, 25.0, 40.0}) {
        double reference = std::numeric_limits<double>::infinity();
        for (double theta1 : thetas) {
            UpperConstraint ca = poisson_constraint(lambda, theta1);
            for (double theta2 : thetas) {
                FitResult fit = fit_impairment(sol, theta2);
                if (!fit.converged || ca.rho + fit.constraint.rho >= 1.0) continue;
                for (int split = 1; split < 64; ++split) {
                    double r = ca.rho + (1.0 - fit.constraint.rho - ca.rho) * split / 64.0;
                    BoundingFunction f = vbc_from_constraint(ca, r).f;
                    BoundingFunction g = vbc_from_constraint(fit.constraint, 1.0 - r).f;
                    reference = std::min(reference, convolve_bounding(f, g, x));
                }
            }
        }
        double optimized = report.tail.raw(x);
        CHECK(optimized <= reference * (1.0 + 1e-6));
    }
}
