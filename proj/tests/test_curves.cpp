#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "dcfcalc/curves.hpp"
#include "support/oracles.hpp"

using namespace dcfcalc;

namespace {

BoundingFunction random_analytic(std::mt19937_64& rng) {
    auto uniform = [&] { return double(rng() >> 11) * 0x1.0p-53; };
    if (rng() % 3 == 0) return BoundingFunction::step(0.2 + 3.0 * uniform());
    return BoundingFunction::exponential(0.05 + 5.0 * uniform(), 0.2 + 2.0 * uniform());
}

Trace random_trace(std::mt19937_64& rng, int horizon, double rate) {
    std::vector<double> cumulative{0.0};
    auto uniform = [&] { return double(rng() >> 11) * 0x1.0p-53; };
    for (int t = 1; t <= horizon; ++t)
        cumulative.push_back(cumulative.back() + (uniform() < rate ? double(rng() % 3) : 0.0));
    return Trace(std::move(cumulative));
}

}  // namespace

TEST_CASE("convolution with a vanishing side is the identity") {
    BoundingFunction f = BoundingFunction::exponential(1.0, 1.0);
    BoundingFunction zero = BoundingFunction::zero();
    for (double x : {0.0, 0.3, 1.0, 4.0, 20.0}) {
        CHECK(convolve_bounding(f, zero, x) == doctest::Approx(std::exp(-x)).epsilon(1e-12));
        CHECK(convolve_bounding(zero, f, x) == doctest::Approx(std::exp(-x)).epsilon(1e-12));
    }
}

TEST_CASE("equal-decay exponentials meet the interior optimum") {
    double a = 2.0, b = 8.0, theta = 1.3;
    BoundingFunction f = BoundingFunction::exponential(a, theta);
    BoundingFunction g = BoundingFunction::exponential(b, theta);
    for (double x : {2.0, 4.0, 9.0}) {
        double interior = 2.0 * std::sqrt(a * b) * std::exp(-theta * x / 2.0);
        double split = std::log(a / b) / (2.0 * theta) + x / 2.0;
        double expected = (split >= 0.0 && split <= x)
                              ? interior
                              : std::min(a + b * std::exp(-theta * x), a * std::exp(-theta * x) + b);
        CHECK(convolve_bounding(f, g, x) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(convolve_bounding(f, g, x) ==
              doctest::Approx(oracles::grid_convolution(f, g, x)).epsilon(1e-9));
    }
}

TEST_CASE("step against a sub-unit exponential shifts the argument") {
    BoundingFunction f = BoundingFunction::step(1.0);
    BoundingFunction g = BoundingFunction::exponential(0.5, 1.0);
    for (double x : {1.0, 2.0, 5.5, 10.0}) {
        CHECK(convolve_bounding(f, g, x) ==
              doctest::Approx(g.raw(x - 1.0)).epsilon(1e-12));
        CHECK(convolve_bounding(f, g, x) ==
              doctest::Approx(oracles::grid_convolution(f, g, x)).epsilon(1e-9));
    }
    // below the step threshold only the unit branch remains
    CHECK(convolve_bounding(f, g, 0.5) ==
          doctest::Approx(1.0 + g.raw(0.5)).epsilon(1e-12));
}

TEST_CASE("negative slack falls back to the zero-argument sum") {
    BoundingFunction f = BoundingFunction::exponential(3.0, 1.0);
    BoundingFunction g = BoundingFunction::exponential(5.0, 2.0);
    CHECK(convolve_bounding(f, g, -1.0) == doctest::Approx(8.0));
}

TEST_CASE("analytic convolutions match the grid oracle") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        BoundingFunction f = random_analytic(rng);
        BoundingFunction g = random_analytic(rng);
        for (double x : {0.0, 0.7, 1.9, 5.0, 13.0}) {
            double got = convolve_bounding(f, g, x);
            double expected = oracles::grid_convolution(f, g, x);
            CHECK(got == doctest::Approx(expected).epsilon(1e-9));
        }
    }
}

TEST_CASE("convolution is symmetric and wide-sense decreasing") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        BoundingFunction f = random_analytic(rng);
        BoundingFunction g = random_analytic(rng);
        double previous = convolve_bounding(f, g, 0.0);
        for (double x : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
            double fg = convolve_bounding(f, g, x);
            double gf = convolve_bounding(g, f, x);
            CHECK(fg == doctest::Approx(gf).epsilon(1e-12));
            CHECK(fg <= previous + 1e-12);
            previous = fg;
        }
    }
}

TEST_CASE("tabulated convolution stays within grid-search tolerance") {
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i <= 60; ++i) {
        double x = 0.25 * i;
        samples.emplace_back(x, 2.0 * std::exp(-0.8 * x));
    }
    BoundingFunction f = BoundingFunction::tabulated(samples);
    BoundingFunction g = BoundingFunction::exponential(1.5, 1.1);
    for (double x : {1.0, 3.0, 7.0, 12.0}) {
        double got = convolve_bounding(f, g, x);
        double expected = oracles::grid_convolution(f, g, x, 1 << 15, 2);
        CHECK(got == doctest::Approx(expected).epsilon(1e-3));
    }
}

TEST_CASE("probability reads clamp to the unit interval") {
    BoundingFunction f = BoundingFunction::exponential(55.0, 1.0);
    CHECK(f.raw(0.0) == doctest::Approx(55.0));
    CHECK(f.probability(0.0) == doctest::Approx(1.0));
    CHECK(f.probability(10.0) == doctest::Approx(55.0 * std::exp(-10.0)));
}

TEST_CASE("curve convolution with a null service curve collapses to the origin") {
    Trace arrival(std::vector<double>{0, 1, 3, 6, 6, 9});
    RateCurve zero = RateCurve::affine(0.0);
    for (std::int64_t t = 0; t <= 5; ++t) CHECK(convolve_curve(arrival, zero, t) == 0.0);
}

TEST_CASE("the slower branch wins the curve convolution") {
    std::vector<double> linear;
    for (int t = 0; t <= 20; ++t) linear.push_back(double(t));
    Trace arrival(linear);
    RateCurve fast = RateCurve::affine(2.0);
    for (std::int64_t t : {0, 3, 10, 20})
        CHECK(convolve_curve(arrival, fast, t) == doctest::Approx(double(t)));
}

TEST_CASE("curve convolution equals exhaustive split enumeration") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        Trace arrival = random_trace(rng, 200, 0.35);
        RateCurve beta = RateCurve::affine(0.1 + 0.2 * double(trial), double(trial % 3));
        for (std::int64_t t : {0, 1, 17, 60, 200}) {
            CHECK(convolve_curve(arrival, beta, t) ==
                  doctest::Approx(oracles::exhaustive_curve_convolution(arrival, beta, t)));
        }
    }
}

TEST_CASE("backlog of identical traces vanishes") {
    Trace a(std::vector<double>{0, 2, 4, 7});
    for (std::int64_t t = 0; t <= 3; ++t) CHECK(backlog_of(a, a, t) == 0.0);
}

TEST_CASE("backlog is the direct difference") {
    std::vector<double> twice, once;
    for (int t = 0; t <= 12; ++t) {
        twice.push_back(2.0 * t);
        once.push_back(1.0 * t);
    }
    CHECK(backlog_of(Trace(twice), Trace(once), 10) == doctest::Approx(10.0));
}

TEST_CASE("non-causal trace pairs are rejected") {
    Trace arrival(std::vector<double>{0, 1, 2});
    Trace departure(std::vector<double>{0, 2, 2});
    CHECK_THROWS_AS(backlog_of(arrival, departure, 2), std::invalid_argument);
    CHECK_THROWS_AS(delay_of(arrival, departure, 2), std::invalid_argument);
}

TEST_CASE("delay of identical traces is zero and shifts are recovered") {
    std::vector<double> line, shifted;
    for (int t = 0; t <= 30; ++t) {
        line.push_back(double(t));
        shifted.push_back(double(std::max(0, t - 3)));
    }
    Trace arrival(line), departure(shifted);
    CHECK(delay_of(arrival, arrival, 10) == 0);
    CHECK(delay_of(arrival, departure, 10) == 3);
}

TEST_CASE("delay is censored when the horizon runs out") {
    Trace arrival(std::vector<double>{0, 5, 5, 5});
    Trace departure(std::vector<double>{0, 0, 1, 2});
    CHECK(!delay_of(arrival, departure, 1).has_value());
}

TEST_CASE("backlog and delay are nonnegative on causal pairs") {
    std::mt19937_64 rng(31);
    auto uniform = [&] { return double(rng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a{0.0}, d{0.0};
        for (int t = 1; t <= 100; ++t) {
            a.push_back(a.back() + double(rng() % 3));
            double next = d.back() + (uniform() < 0.7 ? double(rng() % 3) : 0.0);
            d.push_back(std::min(next, a.back()));
        }
        Trace arrival(a), departure(d);
        for (std::int64_t t : {0, 10, 50, 100}) {
            CHECK(backlog_of(arrival, departure, t) >= 0.0);
            auto delay = delay_of(arrival, departure, t);
            if (delay.has_value()) CHECK(*delay >= 0);
        }
    }
}
