#include "dcfcalc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>
#include <thread>

namespace dcfcalc {

void SimConfig::validate() const {
    scenario.validate();
    if (duration_s <= 0.0) throw std::invalid_argument("SimConfig: duration must be positive");
    if (duration_s < snapshot_s)
        throw std::invalid_argument("SimConfig: duration must cover the snapshot");
    if (snapshot_s < 0.0) throw std::invalid_argument("SimConfig: negative snapshot");
    if (replications < 1) throw std::invalid_argument("SimConfig: need at least one replication");
}

namespace {

// Deterministic draws on top of the raw engine; std:: distributions are
// implementation-defined, these are not.
struct Rng {
    std::mt19937_64 engine;

    explicit Rng(std::uint64_t seed) : engine(seed) {}

    double uniform01() { return double(engine() >> 11) * 0x1.0p-53; }

    int below(int bound) {  // uniform in [0, bound)
        return int((unsigned __int128)(engine()) * (unsigned __int128)(bound) >> 64);
    }

    int poisson(double mean) {  // Knuth, fine for small means
        if (mean <= 0.0) return 0;
        double limit = std::exp(-mean);
        int k = 0;
        double p = uniform01();
        while (p > limit) {
            p *= uniform01();
            ++k;
        }
        return k;
    }
};

struct ArrivalEvent {
    std::int64_t tick;
    int node;
};

class Engine {
public:
    Engine(const SimConfig& config, int replication_index)
        : config_(config),
          timing_(slot_length(config.scenario)),
          rng_(config.seed + std::uint64_t(replication_index)),
          saturated_(!config.scenario.traffic.has_value()),
          n_(config.scenario.nodes) {
        horizon_ = std::int64_t(config.duration_s * 2e6);
        horizon_slots_ = horizon_ / timing_.calculus_slot_ticks;
        snap_tick_ = std::min(std::int64_t(config.snapshot_s * 2e6), horizon_);
        snap_slot_ = snap_tick_ / timing_.calculus_slot_ticks;
        snap_tick_ = snap_slot_ * timing_.calculus_slot_ticks;
        nodes_.resize(std::size_t(n_));
        for (auto& node : nodes_) node.cw = config.scenario.phy.cw_min;
        generate_arrivals();
        if (saturated_)
            for (auto& node : nodes_) node.backoff_counter = rng_.below(node.cw);
        dep_ticks_.resize(std::size_t(n_));
        drop_ticks_.resize(std::size_t(n_));
        live_sample_.assign(std::size_t(n_), 0);
        drops_before_snap_.assign(std::size_t(n_), 0);
    }

    ReplicationResult run();

private:
    void generate_arrivals() {
        if (saturated_) return;
        const TrafficModel& traffic = *config_.scenario.traffic;
        if (traffic.lambda <= 0.0) return;  // no arrivals
        if (traffic.kind == TrafficModel::Kind::Poisson) {
            // packet counts drawn per calculus slot, batch at the slot start
            for (int node = 0; node < n_; ++node)
                for (std::int64_t m = 0; m < horizon_slots_; ++m) {
                    int count = rng_.poisson(traffic.lambda);
                    for (int c = 0; c < count; ++c)
                        arrivals_.push_back({m * timing_.calculus_slot_ticks, node});
                }
        } else {
            // one packet per 1/lambda slots, first packet at time 0
            double interval = double(timing_.calculus_slot_ticks) / traffic.lambda;
            for (int node = 0; node < n_; ++node)
                for (std::int64_t k = 0;; ++k) {
                    std::int64_t tick = std::llround(double(k) * interval);
                    if (tick >= horizon_) break;
                    arrivals_.push_back({tick, node});
                }
        }
        std::stable_sort(arrivals_.begin(), arrivals_.end(),
                         [](const ArrivalEvent& a, const ArrivalEvent& b) {
                             return a.tick != b.tick ? a.tick < b.tick : a.node < b.node;
                         });
    }

    bool backlogged(const NodeState& node) const { return saturated_ || !node.queue.empty(); }

    void enqueue(int index, std::int64_t tick) {
        NodeState& node = nodes_[std::size_t(index)];
        node.queue.push_back(tick);
        if (node.backoff_counter < 0) {
            // fresh head-of-line packet: new retry chain, fresh draw
            node.cw = config_.scenario.phy.cw_min;
            node.retry = 0;
            node.backoff_counter = rng_.below(node.cw);
        }
    }

    void ingest(std::int64_t up_to, bool inclusive) {
        while (cursor_ < arrivals_.size() &&
               (inclusive ? arrivals_[cursor_].tick <= up_to : arrivals_[cursor_].tick < up_to)) {
            enqueue(arrivals_[cursor_].node, arrivals_[cursor_].tick);
            ++cursor_;
        }
    }

    void sample_snapshot() {
        if (sampled_) return;
        ingest(snap_tick_, false);
        for (int i = 0; i < n_; ++i) {
            live_sample_[std::size_t(i)] = std::int64_t(nodes_[std::size_t(i)].queue.size());
            std::int64_t before = 0;
            for (std::int64_t t : drop_ticks_[std::size_t(i)])
                if (t < snap_tick_) ++before;
            drops_before_snap_[std::size_t(i)] = before;
        }
        sampled_ = true;
    }

    const SimConfig& config_;
    SlotTiming timing_;
    Rng rng_;
    bool saturated_;
    int n_;
    std::int64_t horizon_ = 0;
    std::int64_t horizon_slots_ = 0;
    std::int64_t snap_tick_ = 0;
    std::int64_t snap_slot_ = 0;

    std::vector<ArrivalEvent> arrivals_;
    std::size_t cursor_ = 0;
    std::vector<NodeState> nodes_;
    std::vector<std::vector<std::int64_t>> dep_ticks_;
    std::vector<std::vector<std::int64_t>> drop_ticks_;
    std::vector<std::int64_t> live_sample_;
    std::vector<std::int64_t> drops_before_snap_;
    bool sampled_ = false;

    ReplicationResult result_;
};

ReplicationResult Engine::run() {
    const std::int64_t slot = timing_.idle_slot_ticks;
    const std::int64_t frame = timing_.data_ticks + timing_.sifs_ticks + timing_.ack_ticks;
    const PhyParams& phy = config_.scenario.phy;
    std::vector<int> ready;
    ready.reserve(std::size_t(n_));

    std::int64_t boundary = timing_.difs_ticks;
    while (true) {
        if (!sampled_ && boundary >= snap_tick_) sample_snapshot();
        if (boundary >= horizon_) break;
        ingest(boundary, true);

        ready.clear();
        for (int i = 0; i < n_; ++i) {
            NodeState& node = nodes_[std::size_t(i)];
            if (node.backoff_counter == 0 && backlogged(node)) ready.push_back(i);
        }

        if (ready.empty()) {
            ++result_.idle_boundaries;
            bool any_active = false;
            for (auto& node : nodes_) {
                if (node.backoff_counter > 0) {
                    --node.backoff_counter;
                    any_active = true;
                } else if (node.backoff_counter == 0) {
                    // post-backoff finished with nothing to send
                    node.backoff_counter = -1;
                    node.post_backoff_pending = false;
                }
            }
            if (!saturated_ && !any_active) {
                bool all_empty = true;
                for (const auto& node : nodes_)
                    if (!node.queue.empty()) all_empty = false;
                if (all_empty) {
                    if (cursor_ >= arrivals_.size()) {
                        if (!sampled_) sample_snapshot();
                        break;
                    }
                    std::int64_t target = arrivals_[cursor_].tick;
                    if (target > boundary) {
                        // jump idle time, keeping the slot grid aligned
                        std::int64_t steps = (target - boundary + slot - 1) / slot;
                        std::int64_t jump_to = boundary + steps * slot;
                        if (!sampled_ && jump_to >= snap_tick_) sample_snapshot();
                        boundary = jump_to;
                        continue;
                    }
                }
            }
            boundary += slot;
            continue;
        }

        result_.attempts += std::int64_t(ready.size());
        // Success and collision both occupy the frame time before the next
        // DIFS: a collision is followed by the ACK-timeout recovery, so the
        // channel is unavailable for DATA + SIFS + ACK either way.
        std::int64_t end = boundary + frame;
        if (ready.size() >= 2) result_.collided_attempts += std::int64_t(ready.size());
        if (!sampled_ && end >= snap_tick_) sample_snapshot();
        if (end > horizon_) break;  // transmission truncated by the horizon

        if (ready.size() == 1) {
            int i = ready.front();
            NodeState& node = nodes_[std::size_t(i)];
            ++result_.successes;
            if (!saturated_) {
                std::int64_t arrived = node.queue.front();
                node.queue.pop_front();
                dep_ticks_[std::size_t(i)].push_back(end);
                result_.sojourn_sum_slots +=
                    double(end - arrived) / double(timing_.calculus_slot_ticks);
                ++result_.sojourn_count;
            } else {
                dep_ticks_[std::size_t(i)].push_back(end);
            }
            node.cw = phy.cw_min;
            node.retry = 0;
            node.backoff_counter = rng_.below(node.cw);  // post-backoff
            node.post_backoff_pending = true;
        } else {
            for (int i : ready) {
                NodeState& node = nodes_[std::size_t(i)];
                if (node.retry >= phy.retry_limit) {
                    // retransmission limit reached, packet dropped
                    ++result_.drops;
                    if (!saturated_) {
                        node.queue.pop_front();
                        drop_ticks_[std::size_t(i)].push_back(end);
                    }
                    node.cw = phy.cw_min;
                    node.retry = 0;
                } else {
                    ++node.retry;
                    node.cw = std::min(node.cw * 2, phy.cw_max);
                }
                node.backoff_counter = rng_.below(node.cw);
            }
        }
        boundary = end + timing_.difs_ticks;
    }
    if (!sampled_) sample_snapshot();
    ingest(horizon_, true);  // arrivals after the last event still count as queued

    // cumulative traces on the calculus-slot grid; an event at tick u lands
    // in slot floor(u / slot_ticks) + 1
    result_.arrivals.resize(std::size_t(n_));
    result_.departures.resize(std::size_t(n_));
    const std::int64_t cslot = timing_.calculus_slot_ticks;
    std::vector<std::vector<std::int64_t>> arr_by_node(static_cast<std::size_t>(n_));
    for (const auto& ev : arrivals_) arr_by_node[std::size_t(ev.node)].push_back(ev.tick);

    double ticks_in_system = 0.0;
    for (int i = 0; i < n_; ++i) {
        std::vector<double> a(std::size_t(horizon_slots_) + 1, 0.0);
        std::vector<double> d(std::size_t(horizon_slots_) + 1, 0.0);
        auto bucket = [&](std::vector<double>& cum, std::int64_t tick) {
            std::int64_t m = tick / cslot + 1;
            if (m <= horizon_slots_) cum[std::size_t(m)] += 1.0;
        };
        for (std::int64_t t : dep_ticks_[std::size_t(i)]) bucket(d, t);
        if (saturated_) {
            // infinite backlog: a packet enters exactly when one is consumed
            for (std::int64_t t : dep_ticks_[std::size_t(i)]) bucket(a, t);
            for (std::int64_t t : drop_ticks_[std::size_t(i)]) bucket(a, t);
        } else {
            for (std::int64_t t : arr_by_node[std::size_t(i)]) bucket(a, t);
        }
        for (std::int64_t m = 1; m <= horizon_slots_; ++m) {
            a[std::size_t(m)] += a[std::size_t(m) - 1];
            d[std::size_t(m)] += d[std::size_t(m) - 1];
        }
        result_.arrivals[std::size_t(i)] = Trace(std::move(a));
        result_.departures[std::size_t(i)] = Trace(std::move(d));

        // exact time integral of the queue process: the j-th removal
        // (departure or drop, merged chronologically) ends the j-th arrival
        const auto& arr = arr_by_node[std::size_t(i)];
        const auto& dep = dep_ticks_[std::size_t(i)];
        const auto& drop = drop_ticks_[std::size_t(i)];
        std::size_t di = 0, ri = 0;
        for (std::size_t j = 0; j < arr.size(); ++j) {
            std::int64_t removal;
            if (di < dep.size() && (ri >= drop.size() || dep[di] <= drop[ri]))
                removal = dep[di++];
            else if (ri < drop.size())
                removal = drop[ri++];
            else
                removal = horizon_;
            ticks_in_system += double(std::min(removal, horizon_) - std::min(arr[j], horizon_));
        }
    }
    result_.time_avg_backlog = ticks_in_system / double(horizon_) / double(n_);

    if (!saturated_) {
        for (int i = 0; i < n_; ++i) {
            result_.snapshot_backlog.push_back(
                backlog_of(result_.arrivals[std::size_t(i)], result_.departures[std::size_t(i)],
                           snap_slot_));
            result_.snapshot_delay.push_back(
                delay_of(result_.arrivals[std::size_t(i)], result_.departures[std::size_t(i)],
                         snap_slot_));
        }
    }
    result_.live_queue_at_snapshot = live_sample_;
    result_.drops_before_snapshot = drops_before_snap_;
    for (int i = 0; i < n_; ++i) {
        result_.total_arrivals.push_back(
            saturated_ ? std::int64_t(dep_ticks_[std::size_t(i)].size() +
                                      drop_ticks_[std::size_t(i)].size())
                       : std::int64_t(arr_by_node[std::size_t(i)].size()));
        result_.total_departures.push_back(std::int64_t(dep_ticks_[std::size_t(i)].size()));
        result_.total_drops.push_back(std::int64_t(drop_ticks_[std::size_t(i)].size()));
        result_.final_queue.push_back(std::int64_t(nodes_[std::size_t(i)].queue.size()));
    }
    result_.horizon_slots = horizon_slots_;
    return result_;
}

}  // namespace

ReplicationResult run_replication(const SimConfig& config, int replication_index) {
    config.validate();
    if (replication_index < 0 || replication_index >= config.replications)
        throw std::invalid_argument("run_replication: index out of range");
    Engine engine(config, replication_index);
    return engine.run();
}

double SimResult::backlog_tail(double x) const {
    if (backlog_samples.empty()) return 0.0;
    std::int64_t count = 0;
    for (double b : backlog_samples)
        if (b > x) ++count;
    return double(count) / double(backlog_samples.size());
}

double SimResult::delay_tail(double x_slots) const {
    std::int64_t total = std::int64_t(delay_samples.size()) + censored_delays;
    if (total == 0) return 0.0;
    std::int64_t count = censored_delays;  // censored delays exceed any finite x
    for (std::int64_t d : delay_samples)
        if (double(d) >= x_slots) ++count;
    return double(count) / double(total);
}

SimResult run_experiment(const SimConfig& config) {
    config.validate();
    const int reps = config.replications;
    std::vector<ReplicationResult> results(static_cast<std::size_t>(reps));

    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, unsigned(reps));
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1))
                results[std::size_t(r)] = run_replication(config, r);
        });
    for (auto& t : pool) t.join();

    SlotTiming timing = slot_length(config.scenario);
    SimResult out;
    out.slot_seconds = timing.slot_seconds;

    double time_avg_sum = 0.0, sojourn_sum = 0.0, throughput_sum = 0.0;
    std::int64_t sojourn_count = 0;
    for (const auto& rep : results) {
        for (double b : rep.snapshot_backlog) out.backlog_samples.push_back(b);
        for (const auto& d : rep.snapshot_delay) {
            if (d.has_value())
                out.delay_samples.push_back(*d);
            else
                ++out.censored_delays;
        }
        time_avg_sum += rep.time_avg_backlog;
        sojourn_sum += rep.sojourn_sum_slots;
        sojourn_count += rep.sojourn_count;
        out.drops += rep.drops;
        throughput_sum += double(rep.successes) / double(config.scenario.nodes) /
                          (double(rep.horizon_slots));
    }
    out.mean_backlog = time_avg_sum / double(reps);
    if (!out.backlog_samples.empty()) {
        double sum = 0.0;
        for (double b : out.backlog_samples) sum += b;
        out.mean_snapshot_backlog = sum / double(out.backlog_samples.size());
    }
    if (!out.delay_samples.empty()) {
        double sum = 0.0;
        for (std::int64_t d : out.delay_samples) sum += double(d);
        out.mean_virtual_delay_s =
            sum / double(out.delay_samples.size()) * timing.slot_seconds;
    }
    if (sojourn_count > 0)
        out.mean_sojourn_delay_s = sojourn_sum / double(sojourn_count) * timing.slot_seconds;
    out.per_node_throughput = throughput_sum / double(reps);
    std::int64_t total_delays = std::int64_t(out.delay_samples.size()) + out.censored_delays;
    if (total_delays > 0)
        out.censored_fraction = double(out.censored_delays) / double(total_delays);
    out.censoring_flagged = out.censored_fraction > 0.01;
    return out;
}

SaturationStats saturation_validate(const Scenario& scenario, double duration_s,
                                    std::uint64_t seed) {
    Scenario saturated = scenario;
    saturated.traffic.reset();
    SimConfig config;
    config.scenario = saturated;
    config.duration_s = duration_s;
    config.snapshot_s = duration_s;
    config.replications = 1;
    config.seed = seed;
    ReplicationResult rep = run_replication(config, 0);

    SaturationStats stats;
    stats.solved = solve_fixed_point(saturated);
    stats.analytical_throughput = stability_threshold(stats.solved);
    std::int64_t consumed = std::int64_t(scenario.nodes) * rep.idle_boundaries + rep.attempts;
    stats.tau_hat = consumed > 0 ? double(rep.attempts) / double(consumed) : 0.0;
    stats.gamma_hat =
        rep.attempts > 0 ? double(rep.collided_attempts) / double(rep.attempts) : 0.0;
    stats.throughput_per_node =
        double(rep.successes) / double(scenario.nodes) / double(rep.horizon_slots);
    stats.tau_error = stats.tau_hat - stats.solved.tau;
    stats.gamma_error = stats.gamma_hat - stats.solved.gamma;
    stats.throughput_rel_error =
        (stats.throughput_per_node - stats.analytical_throughput) / stats.analytical_throughput;
    return stats;
}

}  // namespace dcfcalc
