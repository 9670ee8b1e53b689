#include "dcfcalc/dcf.hpp"

#include <cmath>
#include <stdexcept>

#include "dcfcalc/logmath.hpp"

namespace dcfcalc {

void PhyParams::validate() const {
    if (basic_rate_bps <= 0 || data_rate_bps <= 0 || phy_header_bytes <= 0 ||
        ack_header_bytes <= 0 || mac_header_bytes <= 0 || sifs_us <= 0 || difs_us <= 0 ||
        idle_slot_us <= 0 || cw_min <= 0 || retry_limit < 0)
        throw std::invalid_argument("PhyParams: all parameters must be positive");
    if (cw_max < cw_min) throw std::invalid_argument("PhyParams: cw_max < cw_min");
}

void Scenario::validate() const {
    if (nodes < 1) throw std::invalid_argument("Scenario: need at least one node");
    if (payload_bytes <= 0) throw std::invalid_argument("Scenario: payload must be positive");
    phy.validate();
}

namespace {
// 0.5 us event clock; round to the nearest tick.
std::int64_t us_to_ticks(double us) { return std::llround(us * 2.0); }
}  // namespace

SlotTiming slot_length(const Scenario& scenario) {
    scenario.validate();
    const PhyParams& p = scenario.phy;

    double data_us = double(p.phy_header_bytes) * 8.0 / p.basic_rate_bps * 1e6 +
                     double(p.mac_header_bytes + scenario.payload_bytes) * 8.0 /
                         p.data_rate_bps * 1e6;
    double ack_us = double(p.phy_header_bytes + p.ack_header_bytes) * 8.0 /
                    p.basic_rate_bps * 1e6;

    SlotTiming t;
    t.data_ticks = us_to_ticks(data_us);
    t.ack_ticks = us_to_ticks(ack_us);
    t.difs_ticks = us_to_ticks(p.difs_us);
    t.sifs_ticks = us_to_ticks(p.sifs_us);
    t.idle_slot_ticks = us_to_ticks(p.idle_slot_us);
    t.calculus_slot_ticks = t.difs_ticks + t.data_ticks + t.sifs_ticks + t.ack_ticks;

    const double per_slot = double(t.idle_slot_ticks);
    t.data_slots = double(t.data_ticks) / per_slot;
    t.ack_slots = double(t.ack_ticks) / per_slot;
    t.difs_slots = double(t.difs_ticks) / per_slot;
    t.sifs_slots = double(t.sifs_ticks) / per_slot;
    t.slot_length = double(t.calculus_slot_ticks) / per_slot;
    t.slot_length_int = int(std::floor(t.slot_length + 0.5));
    t.slot_seconds = double(t.calculus_slot_ticks) * 0.5e-6;
    return t;
}

namespace {

std::vector<double> backoff_means(const PhyParams& p) {
    std::vector<double> b(std::size_t(p.retry_limit) + 1);
    double cw = p.cw_min;
    for (auto& bi : b) {
        bi = std::min(cw, double(p.cw_max)) / 2.0;
        cw *= 2.0;
    }
    return b;
}

// Expected attempts per packet over expected backoff slots per packet.
double tau_of_gamma(double gamma, const std::vector<double>& b) {
    double num = 0.0, den = 0.0, w = 1.0;
    for (double bi : b) {
        num += w;
        den += w * bi;
        w *= gamma;
    }
    return num / den;
}

}  // namespace

DcfSolution solve_fixed_point(const Scenario& scenario) {
    scenario.validate();
    const int n = scenario.nodes;
    SlotTiming timing = slot_length(scenario);

    DcfSolution sol;
    sol.nodes = n;
    sol.slot_len = timing.slot_length;
    sol.slot_len_int = timing.slot_length_int;
    sol.mean_backoff = backoff_means(scenario.phy);

    double gamma = 0.0;
    if (n > 1) {
        // 1 - (1 - tau(gamma))^{n-1} - gamma is strictly decreasing in gamma:
        // positive at 0, negative near 1, so bisection converges to the
        // unique root.
        double lo = 0.0, hi = 1.0;
        for (int iter = 0; iter < 200; ++iter) {
            double mid = 0.5 * (lo + hi);
            double tau = tau_of_gamma(mid, sol.mean_backoff);
            double h = 1.0 - std::pow(1.0 - tau, n - 1) - mid;
            (h > 0.0 ? lo : hi) = mid;
        }
        gamma = 0.5 * (lo + hi);
    }

    sol.tau = tau_of_gamma(gamma, sol.mean_backoff);
    const double miss = std::pow(1.0 - sol.tau, n - 1);  // (1 - tau)^{n-1}
    sol.gamma = 1.0 - miss;
    sol.p_nt = miss * (1.0 - sol.tau);
    sol.p_t = 1.0 - sol.p_nt;
    sol.p_s = sol.tau * miss;
    sol.p_o = sol.gamma;
    return sol;
}

double impairment_log_mgf(int t, double theta, const DcfSolution& sol) {
    if (t < 0) throw std::invalid_argument("impairment_log_mgf: t must be nonnegative");
    if (theta <= 0.0) throw std::invalid_argument("impairment_log_mgf: theta must be positive");
    if (t == 0) return 0.0;  // empty interval, MGF = 1

    const int L = sol.slot_len_int;
    const double log_pnt = std::log(sol.p_nt);
    const double log_pt = std::log(sol.p_t);
    // Weight per complete transmission: summing the binomial split of i
    // transmissions into j successes (weight e^{-theta j}) gives
    // w = (P_o + P_s e^{-theta}) / P_t per transmission.
    const double log_w = log_add(std::log(sol.p_o), std::log(sol.p_s) - theta) - log_pt;

    thread_local LogFactorialTable table;
    std::vector<double> terms;
    terms.reserve(std::size_t(L) * std::size_t(t));

    // last transmission complete (k = 0), i complete transmissions
    for (int i = 0; i < t; ++i) {
        std::int64_t idle = std::int64_t(t - i - 1) * L;
        terms.push_back(table.log_choose(idle + i, i) + double(idle) * log_pnt +
                        double(i) * (log_pt + log_w));
    }
    // last transmission incomplete, occupying the final k idle slots
    for (int k = 1; k < L; ++k) {
        for (int i = 0; i + 1 < t; ++i) {
            std::int64_t idle = std::int64_t(t - i - 1) * L - k;
            terms.push_back(log_pt + table.log_choose(idle + i, i) + double(idle) * log_pnt +
                            double(i) * (log_pt + log_w));
        }
    }
    return theta * double(t) + log_sum_exp(terms);
}

double impairment_mgf(int t, double theta, const DcfSolution& sol) {
    return std::exp(impairment_log_mgf(t, theta, sol));
}

double stability_threshold(const DcfSolution& sol) {
    const double L = sol.slot_len;
    return sol.p_s * L / (sol.p_nt + sol.p_t * L);
}

}  // namespace dcfcalc
