#include "dcfcalc/curves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcfcalc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

RateCurve RateCurve::affine(double rate, double burst) {
    if (rate < 0.0 || burst < 0.0)
        throw std::invalid_argument("RateCurve: rate and burst must be nonnegative");
    RateCurve c;
    c.kind = Kind::Affine;
    c.rate = rate;
    c.burst = burst;
    return c;
}

RateCurve RateCurve::tabulated(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("RateCurve: empty table");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < 0.0) throw std::invalid_argument("RateCurve: negative value");
        if (i > 0 && values[i] < values[i - 1])
            throw std::invalid_argument("RateCurve: table must be wide-sense increasing");
    }
    RateCurve c;
    c.kind = Kind::Tabulated;
    c.values = std::move(values);
    return c;
}

double RateCurve::value_at(std::int64_t t) const {
    if (t < 0) return 0.0;
    if (kind == Kind::Affine) {
        if (t == 0) return burst;
        return burst + rate * double(t);
    }
    if (std::size_t(t) >= values.size())
        throw std::out_of_range("RateCurve: t beyond tabulated horizon");
    return values[std::size_t(t)];
}

BoundingFunction BoundingFunction::exponential(double coefficient, double decay) {
    if (coefficient < 0.0) throw std::invalid_argument("BoundingFunction: negative coefficient");
    if (decay <= 0.0) throw std::invalid_argument("BoundingFunction: decay must be positive");
    BoundingFunction f;
    f.kind = Kind::ScaledExponential;
    f.coefficient = coefficient;
    f.decay = decay;
    return f;
}

BoundingFunction BoundingFunction::step(double threshold) {
    BoundingFunction f;
    f.kind = Kind::Step;
    f.threshold = threshold;
    return f;
}

BoundingFunction BoundingFunction::tabulated(std::vector<std::pair<double, double>> points) {
    if (points.empty()) throw std::invalid_argument("BoundingFunction: empty table");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].second < 0.0)
            throw std::invalid_argument("BoundingFunction: negative value");
        if (i > 0) {
            if (points[i].first <= points[i - 1].first)
                throw std::invalid_argument("BoundingFunction: x must be strictly increasing");
            if (points[i].second > points[i - 1].second + 1e-12)
                throw std::invalid_argument("BoundingFunction: values must be wide-sense decreasing");
        }
    }
    BoundingFunction f;
    f.kind = Kind::Tabulated;
    f.table = std::move(points);
    return f;
}

double BoundingFunction::raw(double x) const {
    switch (kind) {
        case Kind::ScaledExponential:
            if (x < 0.0) return coefficient;
            return coefficient * std::exp(-decay * x);
        case Kind::Step:
            return x >= threshold ? 0.0 : 1.0;
        case Kind::Tabulated: {
            if (x <= table.front().first) return table.front().second;
            if (x >= table.back().first) return table.back().second;
            // last sample at or below x
            auto it = std::upper_bound(table.begin(), table.end(), x,
                                       [](double v, const auto& p) { return v < p.first; });
            return std::prev(it)->second;
        }
    }
    return 0.0;
}

double BoundingFunction::probability(double x) const {
    return std::clamp(raw(x), 0.0, 1.0);
}

bool BoundingFunction::is_zero() const {
    switch (kind) {
        case Kind::ScaledExponential:
            return coefficient == 0.0;
        case Kind::Step:
            return threshold <= 0.0;
        case Kind::Tabulated:
            return table.front().second == 0.0;
    }
    return false;
}

namespace {

// Both scaled-exponential: h(y) = a e^{-t1 y} + b e^{-t2 (x-y)} is convex in
// y, so the minimum sits at the critical point clamped into [0, x].
double convolve_exp_exp(const BoundingFunction& f, const BoundingFunction& g, double x) {
    const double a = f.coefficient, t1 = f.decay;
    const double b = g.coefficient, t2 = g.decay;
    double y = (t2 * x + std::log((t1 * a) / (t2 * b))) / (t1 + t2);
    y = std::clamp(y, 0.0, x);
    return a * std::exp(-t1 * y) + b * std::exp(-t2 * (x - y));
}

// f is a step at threshold T > 0. For y >= T the step contributes 0 and g is
// best at y = T; for y < T the step contributes 1 and g is best at y = 0.
double convolve_step_any(const BoundingFunction& f, const BoundingFunction& g, double x) {
    const double T = f.threshold;
    double best = 1.0 + g.raw(x);
    if (x >= T) best = std::min(best, g.raw(x - T));
    return best;
}

double convolve_grid(const BoundingFunction& f, const BoundingFunction& g, double x) {
    constexpr int kSteps = 1024;
    auto value = [&](double y) { return f.raw(y) + g.raw(x - y); };
    if (x == 0.0) return value(0.0);
    double step = x / kSteps;
    double best = kInf, best_y = 0.0;
    for (int i = 0; i <= kSteps; ++i) {
        double y = double(i) * step;
        double v = value(y);
        if (v < best) {
            best = v;
            best_y = y;
        }
    }
    // one refinement pass around the argmin
    double lo = std::max(0.0, best_y - step);
    double hi = std::min(x, best_y + step);
    double fine = (hi - lo) / kSteps;
    for (int i = 0; i <= kSteps; ++i) {
        double v = value(lo + double(i) * fine);
        best = std::min(best, v);
    }
    return best;
}

}  // namespace

double convolve_bounding(const BoundingFunction& f, const BoundingFunction& g, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("convolve_bounding: x must be finite");
    if (x < 0.0) return f.raw(0.0) + g.raw(0.0);
    if (f.is_zero()) return g.raw(x);
    if (g.is_zero()) return f.raw(x);

    using K = BoundingFunction::Kind;
    if (f.kind == K::Tabulated || g.kind == K::Tabulated) return convolve_grid(f, g, x);
    if (f.kind == K::ScaledExponential && g.kind == K::ScaledExponential)
        return convolve_exp_exp(f, g, x);
    if (f.kind == K::Step) return convolve_step_any(f, g, x);
    return convolve_step_any(g, f, x);
}

Trace::Trace(std::vector<double> values) : cumulative(std::move(values)) {
    if (cumulative.empty()) throw std::invalid_argument("Trace: empty");
    if (cumulative.front() != 0.0) throw std::invalid_argument("Trace: cumulative[0] must be 0");
    for (std::size_t i = 1; i < cumulative.size(); ++i)
        if (cumulative[i] < cumulative[i - 1])
            throw std::invalid_argument("Trace: cumulative must be wide-sense increasing");
}

double Trace::at(std::int64_t t) const {
    if (t < 0 || std::size_t(t) >= cumulative.size())
        throw std::out_of_range("Trace: slot outside horizon");
    return cumulative[std::size_t(t)];
}

double convolve_curve(const Trace& arrival, const RateCurve& beta, std::int64_t t) {
    if (t < 0 || t > arrival.horizon())
        throw std::out_of_range("convolve_curve: t beyond trace horizon");
    double best = kInf;
    for (std::int64_t s = 0; s <= t; ++s)
        best = std::min(best, arrival.at(s) + beta.value_at(t - s));
    return best;
}

namespace {
void check_causal(const Trace& arrival, const Trace& departure, std::int64_t t) {
    std::int64_t limit = std::min(t, departure.horizon());
    for (std::int64_t u = 0; u <= limit; ++u)
        if (departure.at(u) > arrival.at(std::min(u, arrival.horizon())) + 1e-9)
            throw std::invalid_argument("backlog/delay: departure exceeds arrival (non-causal)");
}
}  // namespace

double backlog_of(const Trace& arrival, const Trace& departure, std::int64_t t) {
    check_causal(arrival, departure, t);
    return arrival.at(t) - departure.at(t);
}

std::optional<std::int64_t> delay_of(const Trace& arrival, const Trace& departure,
                                     std::int64_t t) {
    check_causal(arrival, departure, t);
    const double target = arrival.at(t);
    for (std::int64_t u = t; u <= departure.horizon(); ++u)
        if (departure.at(u) >= target) return u - t;
    return std::nullopt;
}

}  // namespace dcfcalc
