// Slotted discrete-event simulator of n DCF stations on a 0.5 us integer
// clock, producing per-node cumulative traces and replication-aggregated
// backlog/delay statistics.
#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "dcfcalc/curves.hpp"
#include "dcfcalc/dcf.hpp"

namespace dcfcalc {

// Per-station contention state. The backoff counter doubles as the
// post-backoff between consecutive transmissions: it keeps counting down
// while the queue is empty and is redrawn for a fresh head-of-line packet.
struct NodeState {
    std::deque<std::int64_t> queue;  // arrival ticks, FIFO
    int backoff_counter = -1;        // idle slots left; -1 = no active backoff
    int cw = 0;
    int retry = 0;
    bool post_backoff_pending = false;
};

struct SimConfig {
    Scenario scenario;
    double duration_s = 20.0;
    int replications = 50;
    double snapshot_s = 10.0;
    std::uint64_t seed = 1;

    void validate() const;
};

// One replication: traces plus raw counters. The live queue lengths sampled
// at the snapshot instant give an independent measurement of the trace-based
// backlog (they differ exactly by the packets dropped before the snapshot).
struct ReplicationResult {
    std::vector<Trace> arrivals;    // per node
    std::vector<Trace> departures;  // per node, successful service only
    std::vector<double> snapshot_backlog;
    std::vector<std::optional<std::int64_t>> snapshot_delay;  // slots, nullopt = censored
    std::vector<std::int64_t> live_queue_at_snapshot;
    std::vector<std::int64_t> drops_before_snapshot;
    std::vector<std::int64_t> total_arrivals;    // per node, whole run
    std::vector<std::int64_t> total_departures;  // per node
    std::vector<std::int64_t> total_drops;       // per node
    std::vector<std::int64_t> final_queue;       // per node, packets left at the horizon
    double time_avg_backlog = 0.0;   // live backlog averaged over slots and nodes
    double sojourn_sum_slots = 0.0;  // per departed packet, arrival to ACK end
    std::int64_t sojourn_count = 0;
    std::int64_t attempts = 0;
    std::int64_t collided_attempts = 0;
    std::int64_t idle_boundaries = 0;  // contention boundaries with no transmission
    std::int64_t successes = 0;
    std::int64_t drops = 0;
    std::int64_t horizon_slots = 0;
};

struct SimResult {
    std::vector<double> backlog_samples;       // snapshot backlog, node x replication
    std::vector<std::int64_t> delay_samples;   // snapshot virtual delay (slots), uncensored
    std::int64_t censored_delays = 0;
    double censored_fraction = 0.0;
    bool censoring_flagged = false;  // censored fraction above 1%

    double mean_backlog = 0.0;           // time-averaged backlog, packets
    double mean_snapshot_backlog = 0.0;  // mean of backlog_samples
    double mean_virtual_delay_s = 0.0;   // snapshot delay mean, uncensored
    double mean_sojourn_delay_s = 0.0;   // per-packet delay mean
    double per_node_throughput = 0.0;    // packets per calculus slot
    std::int64_t drops = 0;
    double slot_seconds = 0.0;

    double backlog_tail(double x) const;      // P{B(t) > x}
    double delay_tail(double x_slots) const;  // P{D(t) >= x}, censored counted above any x
};

ReplicationResult run_replication(const SimConfig& config, int replication_index);

// Aggregates replications; replications run in parallel and are reduced in
// index order, so results depend only on (config, seed).
SimResult run_experiment(const SimConfig& config);

struct SaturationStats {
    double tau_hat = 0.0;
    double gamma_hat = 0.0;
    double throughput_per_node = 0.0;  // packets per calculus slot
    DcfSolution solved;
    double analytical_throughput = 0.0;
    double tau_error = 0.0;
    double gamma_error = 0.0;
    double throughput_rel_error = 0.0;
};

// Saturated-mode run (every node always backlogged) compared against the
// fixed-point solution.
SaturationStats saturation_validate(const Scenario& scenario, double duration_s = 20.0,
                                    std::uint64_t seed = 1);

}  // namespace dcfcalc
