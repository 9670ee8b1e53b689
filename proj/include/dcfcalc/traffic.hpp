// Arrival-process characterizations: MGF envelopes and their conversion to
// stochastic arrival curves, plus the two concrete traffic classes.
#pragma once

#include "dcfcalc/curves.hpp"

namespace dcfcalc {

// (sigma, rho) MGF envelope at exponent theta:
//   (1/theta) log E e^{theta A(s,t)} <= rho (t-s) + sigma.
struct UpperConstraint {
    double theta = 0.0;  // 1 / packet
    double sigma = 0.0;  // packets
    double rho = 0.0;    // packets / slot
};

// Stochastic arrival curve: affine envelope alpha with violation tail f.
struct VbcArrivalCurve {
    RateCurve alpha;
    BoundingFunction f;
};

struct TrafficModel {
    enum class Kind { Poisson, Cbr };

    Kind kind = Kind::Poisson;
    double lambda = 0.0;  // packets / slot, > 0

    static TrafficModel poisson(double lambda);
    static TrafficModel cbr(double lambda);

    // Both classes have envelope average rate lambda.
    double envelope_average_rate() const { return lambda; }
};

// Poisson with mean lambda per slot is (0, lambda (e^theta - 1) / theta)
// upper constrained.
UpperConstraint poisson_constraint(double lambda, double theta);

// CBR admits the exact envelope alpha(t) = lambda t with a unit step tail
// (violations of one packet or more never happen).
VbcArrivalCurve cbr_arrival_curve(double lambda);

// Envelope-to-curve conversion: for any r > rho the process has arrival curve
// r*t with tail  e^{theta sigma} / (1 - e^{theta (rho - r)}) * e^{-theta x}.
VbcArrivalCurve vbc_from_constraint(const UpperConstraint& c, double r);

}  // namespace dcfcalc
