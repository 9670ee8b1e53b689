// Discrete-slot min-plus primitives: rate curves, bounding functions,
// cumulative traces, and the backlog/delay definitions built on them.
#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace dcfcalc {

// Nonnegative wide-sense increasing function of slot count.
// Affine curves evaluate to burst + rate*t (0 at t=0 when burst is 0).
struct RateCurve {
    enum class Kind { Affine, Tabulated };

    Kind kind = Kind::Affine;
    double rate = 0.0;   // traffic units per slot
    double burst = 0.0;  // traffic units
    std::vector<double> values;

    static RateCurve affine(double rate, double burst = 0.0);
    static RateCurve tabulated(std::vector<double> values);

    double value_at(std::int64_t t) const;
};

// Nonnegative wide-sense decreasing tail function of real slack x.
// raw() reports the unclamped value (intermediate algebra can exceed 1);
// probability() clamps to [0, 1] for reporting.
struct BoundingFunction {
    enum class Kind { ScaledExponential, Step, Tabulated };

    Kind kind = Kind::ScaledExponential;
    double coefficient = 0.0;  // scaled-exponential: coefficient * e^{-decay x}
    double decay = 1.0;        // 1 / traffic-unit, > 0
    double threshold = 0.0;    // step: 0 for x >= threshold, 1 below
    std::vector<std::pair<double, double>> table;  // (x, value), x ascending

    static BoundingFunction exponential(double coefficient, double decay);
    static BoundingFunction step(double threshold);
    static BoundingFunction tabulated(std::vector<std::pair<double, double>> points);
    static BoundingFunction zero() { return exponential(0.0, 1.0); }

    double raw(double x) const;
    double probability(double x) const;
    bool is_zero() const;
};

// Min-plus convolution of two bounding functions at slack x:
//   inf over y in [0, x] of f(y) + g(x - y).
// Exponential/step pairs are evaluated in closed form; anything involving a
// tabulated function falls back to a grid search (step x/1024, one refinement
// pass around the argmin). Negative x returns f(0) + g(0).
double convolve_bounding(const BoundingFunction& f, const BoundingFunction& g, double x);

// Cumulative traffic indexed by slot, cumulative[0] == 0.
struct Trace {
    std::vector<double> cumulative;

    Trace() = default;
    explicit Trace(std::vector<double> values);

    std::int64_t horizon() const { return std::int64_t(cumulative.size()) - 1; }
    double at(std::int64_t t) const;
    double over(std::int64_t s, std::int64_t t) const { return at(t) - at(s); }
};

// inf over 0 <= s <= t of A(s) + beta(t - s)
double convolve_curve(const Trace& arrival, const RateCurve& beta, std::int64_t t);

// B(t) = A(t) - A*(t); rejects non-causal trace pairs.
double backlog_of(const Trace& arrival, const Trace& departure, std::int64_t t);

// Smallest tau >= 0 with A(t) <= A*(t + tau); nullopt when the departure
// horizon is exhausted first (right-censored).
std::optional<std::int64_t> delay_of(const Trace& arrival, const Trace& departure,
                                     std::int64_t t);

}  // namespace dcfcalc
