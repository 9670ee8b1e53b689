#include "dcfcalc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace dcfcalc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

FitResult fit_upper_constraint(const std::function<double(int)>& M, double theta,
                               double epsilon, int t_max) {
    if (epsilon <= 0.0) throw std::invalid_argument("fit_upper_constraint: epsilon must be positive");
    if (t_max < 2) throw std::invalid_argument("fit_upper_constraint: t_max must be at least 2");
    if (std::abs(M(0)) > 1e-9)
        throw std::invalid_argument("fit_upper_constraint: M(0) must be 0");

    // A convergence candidate is the first t whose slope agrees with its
    // predecessor within epsilon; it is accepted only once the following
    // slopes stay inside the same band for a confirmation window, so a flat
    // stretch before a later kink does not end the scan early.
    constexpr int kConfirmWindow = 25;
    std::vector<double> values{0.0};
    int candidate = -1;
    double candidate_slope = 0.0;
    double prev_slope = 0.0;
    for (int t = 1; t <= t_max; ++t) {
        values.push_back(M(t));
        double slope = values[std::size_t(t)] - values[std::size_t(t) - 1];
        if (slope < -1e-9)
            throw std::invalid_argument("fit_upper_constraint: M must be wide-sense increasing");
        if (t >= 2) {
            if (candidate >= 0) {
                bool in_band = (1.0 - epsilon) * candidate_slope <= slope &&
                               slope <= (1.0 + epsilon) * candidate_slope;
                if (!in_band) candidate = -1;  // not settled after all
                else if (t - candidate >= kConfirmWindow)
                    break;
            }
            if (candidate < 0 && (1.0 - epsilon) * prev_slope <= slope &&
                slope <= (1.0 + epsilon) * prev_slope) {
                candidate = t;
                candidate_slope = slope;
            }
        }
        prev_slope = slope;
    }
    const bool converged = candidate >= 0;
    const int t_star = converged ? candidate : int(values.size()) - 1;

    const double rho = values[std::size_t(t_star)] - values[std::size_t(t_star) - 1];
    const double intercept = values[std::size_t(t_star)] - rho * double(t_star);
    // max displacement over every scanned point, confirmation window included
    double max_shift = 0.0;
    for (std::size_t t = 0; t < values.size(); ++t)
        max_shift = std::max(max_shift, values[t] - (intercept + rho * double(t)));
    return FitResult{UpperConstraint{theta, intercept + max_shift, rho}, t_star, converged};
}

FitResult fit_upper_constraint(std::span<const double> M, double theta, double epsilon) {
    if (M.size() < 3) throw std::invalid_argument("fit_upper_constraint: need at least 3 samples");
    return fit_upper_constraint([&](int t) { return M[std::size_t(t)]; }, theta, epsilon,
                                int(M.size()) - 1);
}

FitResult fit_impairment(const DcfSolution& sol, double theta2, double epsilon, int t_max) {
    return fit_upper_constraint(
        [&](int t) { return impairment_log_mgf(t, theta2, sol) / theta2; }, theta2, epsilon,
        t_max);
}

WeakServiceCurve service_curve(const DcfSolution& sol, double theta2, double r_impairment,
                               double fit_epsilon, int fit_t_max) {
    constexpr double capacity = 1.0;  // one packet per calculus slot
    FitResult fit = fit_impairment(sol, theta2, fit_epsilon, fit_t_max);
    if (r_impairment >= capacity)
        throw std::domain_error("service_curve: r_I must be below the channel capacity");
    if (r_impairment <= fit.constraint.rho)
        throw std::domain_error("service_curve: r_I must exceed the fitted rho_I(theta2)");
    VbcArrivalCurve impairment = vbc_from_constraint(fit.constraint, r_impairment);
    return WeakServiceCurve{RateCurve::affine(capacity - r_impairment), impairment.f, capacity};
}

bool check_stability(const StabilityInput& s) {
    if (s.arrival_rate < 0.0 || s.impairment_rate < 0.0 || s.capacity <= 0.0 ||
        s.impairment_rate > s.capacity)
        throw std::invalid_argument("check_stability: invalid rates");
    return s.arrival_rate < s.capacity - s.impairment_rate;
}

BacklogTailValue backlog_tail(const VbcArrivalCurve& arrival, const WeakServiceCurve& service,
                              double x) {
    if (arrival.alpha.kind != RateCurve::Kind::Affine ||
        service.beta.kind != RateCurve::Kind::Affine)
        throw std::invalid_argument("backlog_tail: affine curves required");
    if (arrival.alpha.rate > service.beta.rate) return BacklogTailValue{1.0, false};
    double raw = convolve_bounding(arrival.f, service.g, x);
    return BacklogTailValue{std::clamp(raw, 0.0, 1.0), true};
}

namespace {

struct Candidate {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double r_arrival = 0.0;
    double value = kInf;
};

std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> grid;
    grid.reserve(std::size_t(points));
    if (points == 1) {
        grid.push_back(lo);
        return grid;
    }
    double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < points; ++i)
        grid.push_back(std::exp(llo + (lhi - llo) * double(i) / double(points - 1)));
    return grid;
}

// exp(theta sigma) / (1 - e^{theta (rho - r)})
double envelope_coefficient(double theta, double sigma, double rho, double r) {
    return std::exp(theta * sigma) / -std::expm1(theta * (rho - r));
}

// min over y in [0,x] of a e^{-t1 y} + b e^{-t2 (x-y)}; convex in y
double exp_exp_value(double a, double t1, double b, double t2, double x) {
    double y = (t2 * x + std::log((t1 * a) / (t2 * b))) / (t1 + t2);
    y = std::clamp(y, 0.0, x);
    return a * std::exp(-t1 * y) + b * std::exp(-t2 * (x - y));
}

}  // namespace

BoundReport optimize_backlog_tail(const TrafficModel& arrival, const DcfSolution& sol,
                                  std::span<const double> x_grid,
                                  const OptimizerOptions& options) {
    if (x_grid.empty()) throw std::invalid_argument("optimize_backlog_tail: empty x grid");
    for (std::size_t i = 1; i < x_grid.size(); ++i)
        if (x_grid[i] <= x_grid[i - 1])
            throw std::invalid_argument("optimize_backlog_tail: x grid must be increasing");
    if (options.theta_points < 2)
        throw std::invalid_argument("optimize_backlog_tail: need at least 2 theta grid points");
    if (options.theta_min <= 0.0 || options.theta_max < options.theta_min)
        throw std::invalid_argument("optimize_backlog_tail: invalid theta range");

    BoundReport report;
    report.x_grid.assign(x_grid.begin(), x_grid.end());

    const double lambda = arrival.lambda;
    const double capacity = 1.0;
    const double a_I = capacity - stability_threshold(sol);
    if (!check_stability(StabilityInput{lambda, a_I, capacity})) {
        report.feasible = false;
        std::vector<std::pair<double, double>> flat;
        for (double x : x_grid) flat.emplace_back(x, 1.0);
        report.tail = BoundingFunction::tabulated(std::move(flat));
        return report;
    }

    const bool cbr = arrival.kind == TrafficModel::Kind::Cbr;
    std::vector<Candidate> best(x_grid.size());

    std::map<double, FitResult> fit_cache;
    auto impairment_fit = [&](double theta2) -> const FitResult& {
        auto it = fit_cache.find(theta2);
        if (it == fit_cache.end())
            it = fit_cache
                     .emplace(theta2, fit_impairment(sol, theta2, options.fit_epsilon,
                                                     options.fit_t_max))
                     .first;
        return it->second;
    };

    // Bound value for one parameter set at one x. For CBR the arrival tail is
    // the exact unit step and theta1/r_A are fixed by the traffic itself.
    auto evaluate_cbr = [&](double theta2, const UpperConstraint& c, double x) {
        double r_I = capacity - lambda;
        double gcoef = envelope_coefficient(theta2, c.sigma, c.rho, r_I);
        double v = 1.0 + gcoef * std::exp(-theta2 * x);
        if (x >= 1.0) v = std::min(v, gcoef * std::exp(-theta2 * (x - 1.0)));
        return v;
    };
    auto evaluate_poisson = [&](double theta1, double rho_A, double theta2,
                                const UpperConstraint& c, double r_A, double x) {
        double fcoef = envelope_coefficient(theta1, 0.0, rho_A, r_A);
        double gcoef = envelope_coefficient(theta2, c.sigma, c.rho, capacity - r_A);
        return exp_exp_value(fcoef, theta1, gcoef, theta2, x);
    };

    double theta1_lo = options.theta_min, theta1_hi = options.theta_max;
    double theta2_lo = options.theta_min, theta2_hi = options.theta_max;
    constexpr double golden = 0.6180339887498949;

    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        std::vector<double> before(best.size());
        for (std::size_t i = 0; i < best.size(); ++i) before[i] = best[i].value;

        std::vector<double> theta2s = log_grid(theta2_lo, theta2_hi, options.theta_points);
        std::vector<double> theta1s =
            cbr ? std::vector<double>{0.0} : log_grid(theta1_lo, theta1_hi, options.theta_points);

        for (double theta2 : theta2s) {
            const FitResult& fit = impairment_fit(theta2);
            if (!fit.converged) continue;
            const UpperConstraint& ci = fit.constraint;
            if (cbr) {
                if (ci.rho >= capacity - lambda) continue;
                for (std::size_t i = 0; i < x_grid.size(); ++i) {
                    double v = evaluate_cbr(theta2, ci, x_grid[i]);
                    if (v < best[i].value)
                        best[i] = Candidate{0.0, theta2, lambda, v};
                }
                continue;
            }
            for (double theta1 : theta1s) {
                double rho_A = poisson_constraint(lambda, theta1).rho;
                double lo = rho_A, hi = capacity - ci.rho;
                if (hi - lo < 1e-12) continue;  // no feasible split
                double margin = (hi - lo) * 1e-9;
                lo += margin;
                hi -= margin;
                for (std::size_t i = 0; i < x_grid.size(); ++i) {
                    double x = x_grid[i];
                    // golden-section on the r_A split
                    double a = lo, b = hi;
                    double c1 = b - golden * (b - a), c2 = a + golden * (b - a);
                    double f1 = evaluate_poisson(theta1, rho_A, theta2, ci, c1, x);
                    double f2 = evaluate_poisson(theta1, rho_A, theta2, ci, c2, x);
                    for (int iter = 0; iter < 48; ++iter) {
                        if (f1 < f2) {
                            b = c2;
                            c2 = c1;
                            f2 = f1;
                            c1 = b - golden * (b - a);
                            f1 = evaluate_poisson(theta1, rho_A, theta2, ci, c1, x);
                        } else {
                            a = c1;
                            c1 = c2;
                            f1 = f2;
                            c2 = a + golden * (b - a);
                            f2 = evaluate_poisson(theta1, rho_A, theta2, ci, c2, x);
                        }
                    }
                    double r = f1 < f2 ? c1 : c2;
                    double v = std::min(f1, f2);
                    if (v < best[i].value) best[i] = Candidate{theta1, theta2, r, v};
                }
            }
        }

        bool improved = false;
        for (std::size_t i = 0; i < best.size(); ++i)
            if (best[i].value < before[i] * (1.0 - options.improvement_tol)) improved = true;
        if (!improved && sweep > 0) break;

        // zoom the theta grids around the argmin at the deepest grid point
        const Candidate& ref = best.back();
        if (ref.value == kInf) break;  // nothing feasible anywhere
        auto zoom = [&](double center, double& lo_out, double& hi_out, double lo0, double hi0,
                        double step_ratio) {
            lo_out = std::max(lo0, center / step_ratio);
            hi_out = std::min(hi0, center * step_ratio);
        };
        double ratio = std::pow(theta2_hi / theta2_lo, 2.0 / double(options.theta_points - 1));
        zoom(ref.theta2, theta2_lo, theta2_hi, options.theta_min, options.theta_max, ratio);
        if (!cbr) {
            double ratio1 =
                std::pow(theta1_hi / theta1_lo, 2.0 / double(options.theta_points - 1));
            zoom(ref.theta1, theta1_lo, theta1_hi, options.theta_min, options.theta_max, ratio1);
        }
    }

    const Candidate& chosen = best.back();
    if (chosen.value == kInf) {
        report.feasible = false;
        std::vector<std::pair<double, double>> flat;
        for (double x : x_grid) flat.emplace_back(x, 1.0);
        report.tail = BoundingFunction::tabulated(std::move(flat));
        return report;
    }

    report.feasible = true;
    report.theta2 = chosen.theta2;
    report.r_arrival = chosen.r_arrival;
    report.r_impairment = capacity - chosen.r_arrival;
    const UpperConstraint& ci = impairment_fit(chosen.theta2).constraint;
    report.service_tail = vbc_from_constraint(ci, report.r_impairment).f;
    if (cbr) {
        report.theta1 = 0.0;
        report.arrival_tail = BoundingFunction::step(1.0);
    } else {
        report.theta1 = chosen.theta1;
        UpperConstraint ca = poisson_constraint(lambda, chosen.theta1);
        report.arrival_tail = vbc_from_constraint(ca, chosen.r_arrival).f;
    }

    // The reported parameter set is itself a valid bound at every x; fold it
    // in, then enforce wide-sense decrease (a bound at smaller x bounds all
    // larger x, so a running minimum stays valid).
    std::vector<std::pair<double, double>> points;
    points.reserve(x_grid.size());
    double run_min = kInf;
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        double v = std::min(best[i].value,
                            convolve_bounding(report.arrival_tail, report.service_tail,
                                              x_grid[i]));
        run_min = std::min(run_min, v);
        points.emplace_back(x_grid[i], run_min);
    }
    report.tail = BoundingFunction::tabulated(std::move(points));
    return report;
}

double expected_backlog_bound(const BoundReport& report, std::int64_t i_max) {
    if (!report.feasible)
        throw std::invalid_argument("expected_backlog_bound: infeasible report");
    if (i_max < 1) throw std::invalid_argument("expected_backlog_bound: i_max must be positive");
    const BoundingFunction& f = report.arrival_tail;
    const BoundingFunction& g = report.service_tail;

    using K = BoundingFunction::Kind;
    if (f.kind == K::Tabulated || g.kind == K::Tabulated)
        throw std::invalid_argument("expected_backlog_bound: exponential-family tail required");

    // asymptotic decay rate of the convolution
    double decay;
    if (f.kind == K::ScaledExponential && g.kind == K::ScaledExponential)
        decay = f.decay * g.decay / (f.decay + g.decay);
    else if (f.kind == K::ScaledExponential)
        decay = f.decay;
    else if (g.kind == K::ScaledExponential)
        decay = g.decay;
    else
        decay = kInf;  // both steps: tail vanishes identically past the thresholds

    constexpr std::int64_t kMaxTerms = 1 << 22;
    for (std::int64_t limit = i_max;; limit *= 2) {
        double sum = 0.0;
        for (std::int64_t i = 0; i <= limit; ++i) {
            double v = std::clamp(convolve_bounding(f, g, double(i)), 0.0, 1.0);
            sum += v * double(i + 1);
        }
        double remainder = 0.0;
        if (decay != kInf) {
            double q = std::exp(-decay);
            double tail_value = convolve_bounding(f, g, double(limit));
            remainder = tail_value *
                        (double(limit + 1) * q / (1.0 - q) + q / ((1.0 - q) * (1.0 - q)));
        }
        if (remainder <= 1e-6 * std::max(sum, 1e-300) || remainder == 0.0)
            return sum + remainder;
        if (limit >= kMaxTerms)
            throw std::runtime_error("expected_backlog_bound: tail decays too slowly");
    }
}

double delay_mean_bound(double expected_backlog, double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("delay_mean_bound: lambda must be positive");
    if (expected_backlog < 0.0)
        throw std::invalid_argument("delay_mean_bound: negative expected backlog");
    return expected_backlog / lambda;
}

double delay_tail_bound(double expected_backlog, double lambda, double x_slots) {
    if (lambda <= 0.0) throw std::invalid_argument("delay_tail_bound: lambda must be positive");
    if (x_slots <= 0.0) throw std::invalid_argument("delay_tail_bound: x must be positive");
    if (expected_backlog < 0.0)
        throw std::invalid_argument("delay_tail_bound: negative expected backlog");
    return std::min(expected_backlog / (lambda * x_slots), 1.0);
}

}  // namespace dcfcalc
