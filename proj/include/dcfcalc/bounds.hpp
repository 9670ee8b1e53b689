// Bound pipeline: envelope fitting, service-curve construction, stability
// check, the optimized backlog tail, and the derived delay bounds.
#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "dcfcalc/curves.hpp"
#include "dcfcalc/dcf.hpp"
#include "dcfcalc/traffic.hpp"

namespace dcfcalc {

// Probabilistic lower service guarantee: affine beta with deficit tail g.
struct WeakServiceCurve {
    RateCurve beta;
    BoundingFunction g;
    double capacity = 1.0;  // packets per slot
};

struct FitResult {
    UpperConstraint constraint;
    int t_star = 0;
    bool converged = false;
};

struct StabilityInput {
    double arrival_rate = 0.0;     // a_A, packets/slot
    double impairment_rate = 0.0;  // a_I, packets/slot
    double capacity = 1.0;         // c, packets/slot
};

struct BacklogTailValue {
    double probability = 1.0;
    bool feasible = false;
};

struct OptimizerOptions {
    double theta_min = 1e-3;
    double theta_max = 4.0;
    int theta_points = 32;
    double improvement_tol = 1e-3;  // relative, per refinement sweep
    int max_sweeps = 6;
    double fit_epsilon = 1e-5;
    int fit_t_max = 500;
};

struct BoundReport {
    bool feasible = false;
    double theta1 = 0.0;       // arrival exponent of the reported curve
    double theta2 = 0.0;       // impairment exponent of the reported curve
    double r_arrival = 0.0;    // r_A
    double r_impairment = 0.0; // r_I, r_A + r_I = capacity when feasible
    BoundingFunction arrival_tail;  // f of the reported parameter set
    BoundingFunction service_tail;  // g of the reported parameter set
    std::vector<double> x_grid;     // packets
    BoundingFunction tail;          // per-x optimized raw values, tabulated
    double expected_backlog = 0.0;  // packets, filled by expected_backlog_bound
};

// Fits (sigma, rho) to an increasing table M(t) with M(0) = 0: walk the slope
// s(t) = M(t) - M(t-1) until consecutive slopes agree within epsilon, take
// rho = s(t*), then shift the line through (t*, M(t*)) up by the maximum
// displacement so it dominates M on [0, t*].
FitResult fit_upper_constraint(const std::function<double(int)>& M, double theta,
                               double epsilon = 1e-5, int t_max = 500);
FitResult fit_upper_constraint(std::span<const double> M, double theta,
                               double epsilon = 1e-5);

// Fit of the impairment envelope at exponent theta2 from the MGF bound.
FitResult fit_impairment(const DcfSolution& sol, double theta2, double epsilon = 1e-5,
                         int t_max = 500);

// Weak service curve beta(t) = (c - r_I) t with tail g from the fitted
// impairment envelope; requires rho_I(theta2) < r_I < c.
WeakServiceCurve service_curve(const DcfSolution& sol, double theta2, double r_impairment,
                               double fit_epsilon = 1e-5, int fit_t_max = 500);

// Strict inequality a_A < c - a_I.
bool check_stability(const StabilityInput& s);

// P{B(t) > x} bounded by the min-plus convolution of f and g at x when the
// arrival rate does not exceed the service rate; otherwise the trivial bound
// 1 with feasible = false.
BacklogTailValue backlog_tail(const VbcArrivalCurve& arrival, const WeakServiceCurve& service,
                              double x);

// Deterministic search over (theta1, theta2, r_A split) minimizing the
// convolution per grid point x, subject to r_A > rho_A(theta1),
// r_I > rho_I(theta2), r_A + r_I = 1.
BoundReport optimize_backlog_tail(const TrafficModel& arrival, const DcfSolution& sol,
                                  std::span<const double> x_grid,
                                  const OptimizerOptions& options = {});

// Sum of clamp(f x g(i), 1) * (i + 1) up to i_max plus an analytic geometric
// remainder; i_max is doubled until the remainder is below 1e-6 of the sum.
double expected_backlog_bound(const BoundReport& report, std::int64_t i_max = 10000);

// Little's law: mean delay (slots) <= E B / lambda.
double delay_mean_bound(double expected_backlog, double lambda);

// Markov's inequality: P{D >= x} <= E B / (lambda x), clamped to 1.
double delay_tail_bound(double expected_backlog, double lambda, double x_slots);

}  // namespace dcfcalc
