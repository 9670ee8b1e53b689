#include "dcfcalc/traffic.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dcfcalc {

TrafficModel TrafficModel::poisson(double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("TrafficModel: lambda must be positive");
    return TrafficModel{Kind::Poisson, lambda};
}

TrafficModel TrafficModel::cbr(double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("TrafficModel: lambda must be positive");
    return TrafficModel{Kind::Cbr, lambda};
}

UpperConstraint poisson_constraint(double lambda, double theta) {
    if (lambda <= 0.0) throw std::invalid_argument("poisson_constraint: lambda must be positive");
    if (theta <= 0.0) throw std::invalid_argument("poisson_constraint: theta must be positive");
    return UpperConstraint{theta, 0.0, lambda * std::expm1(theta) / theta};
}

VbcArrivalCurve cbr_arrival_curve(double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("cbr_arrival_curve: lambda must be positive");
    return VbcArrivalCurve{RateCurve::affine(lambda), BoundingFunction::step(1.0)};
}

VbcArrivalCurve vbc_from_constraint(const UpperConstraint& c, double r) {
    if (c.theta <= 0.0) throw std::invalid_argument("vbc_from_constraint: theta must be positive");
    if (r <= c.rho) {
        std::ostringstream msg;
        msg << "vbc_from_constraint: envelope rate r = " << r
            << " must exceed rho(theta) = " << c.rho << " (denominator would be nonpositive)";
        throw std::domain_error(msg.str());
    }
    // 1 - e^{theta (rho - r)} via expm1 keeps precision for small gaps
    double denom = -std::expm1(c.theta * (c.rho - r));
    double coefficient = std::exp(c.theta * c.sigma) / denom;
    return VbcArrivalCurve{RateCurve::affine(r),
                           BoundingFunction::exponential(coefficient, c.theta)};
}

}  // namespace dcfcalc
