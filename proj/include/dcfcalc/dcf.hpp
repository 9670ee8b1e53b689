// Analytical 802.11 DCF model: PHY timing, the tau/gamma fixed point for n
// saturated stations, per-idle-slot event probabilities, and the MGF upper
// bound of the contention impairment process.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dcfcalc/traffic.hpp"

namespace dcfcalc {

// Defaults are the 802.11b parameter set used throughout.
struct PhyParams {
    double basic_rate_bps = 1e6;
    double data_rate_bps = 11e6;
    int phy_header_bytes = 24;
    int ack_header_bytes = 14;
    int mac_header_bytes = 28;
    double sifs_us = 10.0;
    double difs_us = 50.0;
    double idle_slot_us = 20.0;
    int cw_min = 32;
    int cw_max = 1024;
    int retry_limit = 6;

    void validate() const;
};

struct Scenario {
    int nodes = 10;
    int payload_bytes = 256;
    PhyParams phy;
    std::optional<TrafficModel> traffic;  // absent = saturated

    void validate() const;
};

// Frame and slot durations. The event clock ticks at 0.5 us so that all
// derived durations are exact integers; one calculus slot is
// DIFS + DATA + SIFS + ACK.
struct SlotTiming {
    double data_slots = 0.0;  // idle slots
    double ack_slots = 0.0;
    double difs_slots = 0.0;
    double sifs_slots = 0.0;
    double slot_length = 0.0;      // L, idle slots per calculus slot
    int slot_length_int = 0;       // round-half-up(L), used by the combinatorics
    double slot_seconds = 0.0;     // one calculus slot in seconds

    std::int64_t data_ticks = 0;   // 0.5 us ticks
    std::int64_t ack_ticks = 0;
    std::int64_t difs_ticks = 0;
    std::int64_t sifs_ticks = 0;
    std::int64_t idle_slot_ticks = 0;
    std::int64_t calculus_slot_ticks = 0;
};

SlotTiming slot_length(const Scenario& scenario);

// Solved saturated MAC quantities for one scenario.
struct DcfSolution {
    double tau = 0.0;    // transmission attempt probability per idle slot
    double gamma = 0.0;  // conditional collision probability
    double p_nt = 0.0;   // no transmission in an idle slot
    double p_t = 0.0;    // at least one transmission
    double p_s = 0.0;    // tagged node starts a successful transmission
    double p_o = 0.0;    // other nodes start transmissions (= gamma)
    double slot_len = 0.0;
    int slot_len_int = 0;
    std::vector<double> mean_backoff;  // b_i = min(2^i cw_min, cw_max)/2
    int nodes = 0;
};

// Bisection on gamma; residuals of both fixed-point equations < 1e-10.
DcfSolution solve_fixed_point(const Scenario& scenario);

// log of the upper bound on E e^{theta I(s, s+t)} over t calculus slots.
// Evaluated entirely in the log domain (log-gamma binomials, log-sum-exp);
// the inner success-count sum is a binomial expansion and is folded into a
// per-transmission weight, which keeps the evaluation O(L t) per call.
double impairment_log_mgf(int t, double theta, const DcfSolution& sol);

// exp of the above; may overflow to +inf for large theta * t.
double impairment_mgf(int t, double theta, const DcfSolution& sol);

// Saturated per-node service rate P_s L / (P_nt + P_t L) in packets per
// calculus slot; arrivals below this rate are stable.
double stability_threshold(const DcfSolution& sol);

}  // namespace dcfcalc
