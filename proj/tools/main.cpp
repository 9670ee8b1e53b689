// Command-line harness: solve the MAC model, compute bounds, run the
// simulator, and emit paired analytical/empirical tables.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcfcalc/bounds.hpp"
#include "dcfcalc/report.hpp"
#include "dcfcalc/scenario.hpp"
#include "dcfcalc/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dcfcalc;

namespace {

bool g_text_output = true;

struct CommonOptions {
    std::string scenario_path;
    std::string out_dir;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    std::optional<int> replications;
    std::optional<double> duration;
    bool dump_traces = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("scenario", opts.scenario_path, "scenario file (JSON)")->required();
    const char* env_out = std::getenv("DCFCALC_OUT");
    opts.out_dir = env_out ? env_out : ".";
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--format", opts.format, "stdout format: csv (text) or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", opts.seed, "override sim.seed");
    cmd->add_option("--replications", opts.replications, "override sim.replications");
    cmd->add_option("--duration", opts.duration, "override sim.duration_s (seconds)");
    cmd->add_flag("--dump-traces", opts.dump_traces,
                  "write per-replication cumulative traces as CSV");
}

ScenarioFile load(const CommonOptions& opts) {
    g_text_output = opts.format != "json";
    ScenarioFile file = parse_scenario_file(opts.scenario_path);
    if (opts.seed) file.sim.seed = *opts.seed;
    if (opts.replications) file.sim.replications = *opts.replications;
    if (opts.duration) {
        file.sim.duration_s = *opts.duration;
        file.sim.snapshot_s = std::min(file.sim.snapshot_s, *opts.duration);
    }
    return file;
}

fs::path ensure_out_dir(const CommonOptions& opts) {
    fs::path dir(opts.out_dir);
    fs::create_directories(dir);
    return dir;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void print_kv(const char* key, const std::string& value) {
    if (g_text_output) std::printf("%-24s %s\n", key, value.c_str());
}
void print_kv(const char* key, double value) { print_kv(key, format_number(value)); }

struct BoundPipeline {
    DcfSolution sol;
    SlotTiming timing;
    double threshold = 0.0;
    bool stable = false;
    bool no_arrivals = false;
    std::optional<FitResult> fit;  // at the chosen theta2
    std::optional<BoundReport> bound;
    double delay_mean_bound_s = 0.0;
    double solve_seconds = 0.0;
    double optimize_seconds = 0.0;
};

BoundPipeline run_bound_pipeline(const ScenarioFile& file) {
    BoundPipeline pipe;
    auto t0 = std::chrono::steady_clock::now();
    pipe.timing = slot_length(file.scenario);
    pipe.sol = solve_fixed_point(file.scenario);
    pipe.threshold = stability_threshold(pipe.sol);
    pipe.solve_seconds = seconds_since(t0);
    if (!file.scenario.traffic) return pipe;

    const TrafficModel& traffic = *file.scenario.traffic;
    if (traffic.lambda == 0.0) {
        // no arrivals: backlog and delay are identically zero
        pipe.no_arrivals = true;
        pipe.stable = true;
        BoundReport report;
        report.feasible = true;
        report.arrival_tail = BoundingFunction::zero();
        report.service_tail = BoundingFunction::zero();
        std::vector<std::pair<double, double>> flat;
        for (double x : file.bounds.x_grid()) flat.emplace_back(x, 0.0);
        report.x_grid = file.bounds.x_grid();
        report.tail = BoundingFunction::tabulated(std::move(flat));
        report.expected_backlog = 0.0;
        pipe.bound = report;
        return pipe;
    }

    pipe.stable = check_stability(
        StabilityInput{traffic.lambda, 1.0 - pipe.threshold, 1.0});
    if (!pipe.stable) return pipe;

    auto t1 = std::chrono::steady_clock::now();
    std::vector<double> x_grid = file.bounds.x_grid();
    BoundReport report =
        optimize_backlog_tail(traffic, pipe.sol, x_grid, file.bounds.optimizer);
    if (report.feasible) {
        report.expected_backlog = expected_backlog_bound(report, file.bounds.i_max);
        pipe.delay_mean_bound_s = delay_mean_bound(report.expected_backlog, traffic.lambda) *
                                  pipe.timing.slot_seconds;
        pipe.fit = fit_impairment(pipe.sol, report.theta2, file.bounds.optimizer.fit_epsilon,
                                  file.bounds.optimizer.fit_t_max);
    }
    pipe.optimize_seconds = seconds_since(t1);
    pipe.bound = std::move(report);
    return pipe;
}

json base_report(const ScenarioFile& file) {
    json root;
    root["schema"] = 1;
    root["scenario"] = json::parse(scenario_to_json_text(file));
    return root;
}

void emit_report(const fs::path& dir, const json& root, const CommonOptions& opts) {
    write_text_file(dir / "report.json", root.dump(2) + "\n");
    if (opts.format == "json") std::printf("%s\n", root.dump(2).c_str());
}

int cmd_solve(const CommonOptions& opts) {
    ScenarioFile file = load(opts);
    BoundPipeline pipe = run_bound_pipeline(file);

    print_kv("tau", pipe.sol.tau);
    print_kv("gamma", pipe.sol.gamma);
    print_kv("p_nt", pipe.sol.p_nt);
    print_kv("p_t", pipe.sol.p_t);
    print_kv("p_s", pipe.sol.p_s);
    print_kv("p_o", pipe.sol.p_o);
    print_kv("slot_length", pipe.sol.slot_len);
    print_kv("slot_length_int", double(pipe.sol.slot_len_int));
    print_kv("slot_seconds", pipe.timing.slot_seconds);
    print_kv("stability_threshold", pipe.threshold);
    if (file.scenario.traffic) {
        print_kv("lambda", file.scenario.traffic->lambda);
        print_kv("stable", pipe.stable || pipe.no_arrivals ? "true" : "false");
    }

    fs::path dir = ensure_out_dir(opts);
    json root = base_report(file);
    root["timing"] = to_json(pipe.timing);
    root["solution"] = to_json(pipe.sol);
    root["stability_threshold"] = pipe.threshold;
    root["runtimes_s"] = {{"solve", pipe.solve_seconds}};
    emit_report(dir, root, opts);
    return 0;
}

json bound_section(const BoundPipeline& pipe, const ScenarioFile& file) {
    json section;
    section["stable"] = pipe.stable;
    section["stability_threshold"] = pipe.threshold;
    if (!pipe.stable && !pipe.no_arrivals) {
        section["verdict"] = "unstable";
        return section;
    }
    section["verdict"] = pipe.bound && pipe.bound->feasible ? "feasible" : "infeasible";
    if (pipe.bound) section["bound"] = to_json(*pipe.bound);
    if (pipe.fit) section["impairment_fit"] = to_json(*pipe.fit);
    if (pipe.bound && pipe.bound->feasible) {
        section["delay_mean_bound_s"] = pipe.delay_mean_bound_s;
        json delay = json::array();
        const double lambda = file.scenario.traffic->lambda;
        for (double x : file.bounds.delay_grid()) {
            double p = lambda > 0.0
                           ? delay_tail_bound(pipe.bound->expected_backlog, lambda, x)
                           : 0.0;
            delay.push_back(json{{"x_slots", x}, {"probability", p}});
        }
        section["delay_tail_bound"] = delay;
    }
    return section;
}

int cmd_bound(const CommonOptions& opts) {
    ScenarioFile file = load(opts);
    if (!file.scenario.traffic)
        throw ConfigError(opts.scenario_path + ": bound requires a traffic section");
    BoundPipeline pipe = run_bound_pipeline(file);
    fs::path dir = ensure_out_dir(opts);

    json root = base_report(file);
    root["timing"] = to_json(pipe.timing);
    root["solution"] = to_json(pipe.sol);
    root["analysis"] = bound_section(pipe, file);
    root["runtimes_s"] = {{"solve", pipe.solve_seconds}, {"optimize", pipe.optimize_seconds}};

    if (!pipe.stable && !pipe.no_arrivals) {
        print_kv("verdict", "unstable");
        print_kv("lambda", file.scenario.traffic->lambda);
        print_kv("stability_threshold", pipe.threshold);
        emit_report(dir, root, opts);
        return 0;  // a valid answer
    }

    const BoundReport& bound = *pipe.bound;
    std::vector<double> xs, analytical;
    for (const auto& [x, raw] : bound.tail.table) {
        xs.push_back(x);
        analytical.push_back(std::min(raw, 1.0));
    }
    write_csv(dir / "backlog_bound.csv",
              {{"x", xs}, {"analytical_bound", analytical}});

    std::vector<double> dx, dxs_seconds, dbound;
    const double lambda = file.scenario.traffic->lambda;
    for (double x : file.bounds.delay_grid()) {
        dx.push_back(x);
        dxs_seconds.push_back(x * pipe.timing.slot_seconds);
        dbound.push_back(bound.feasible && lambda > 0.0
                             ? delay_tail_bound(bound.expected_backlog, lambda, x)
                             : 0.0);
    }
    write_csv(dir / "delay_bound.csv",
              {{"x_slots", dx}, {"x_seconds", dxs_seconds}, {"analytical_bound", dbound}});

    print_kv("verdict", bound.feasible ? "feasible" : "infeasible");
    if (bound.feasible) {
        print_kv("theta1", bound.theta1);
        print_kv("theta2", bound.theta2);
        print_kv("r_arrival", bound.r_arrival);
        print_kv("r_impairment", bound.r_impairment);
        print_kv("expected_backlog_bound", bound.expected_backlog);
        print_kv("delay_mean_bound_s", pipe.delay_mean_bound_s);
    }
    emit_report(dir, root, opts);
    return 0;
}

void dump_traces(const ScenarioFile& file, const fs::path& dir) {
    SimConfig config = make_sim_config(file);
    for (int r = 0; r < config.replications; ++r) {
        ReplicationResult rep = run_replication(config, r);
        std::vector<double> slots, nodes, arrivals, departures;
        for (std::size_t node = 0; node < rep.arrivals.size(); ++node) {
            const Trace& a = rep.arrivals[node];
            const Trace& d = rep.departures[node];
            for (std::int64_t m = 0; m <= a.horizon(); ++m) {
                slots.push_back(double(m));
                nodes.push_back(double(node));
                arrivals.push_back(a.at(m));
                departures.push_back(d.at(m));
            }
        }
        char name[48];
        std::snprintf(name, sizeof(name), "traces_rep%03d.csv", r);
        write_csv(dir / name, {{"slot", slots},
                               {"node", nodes},
                               {"cumulative_arrivals", arrivals},
                               {"cumulative_departures", departures}});
    }
}

int cmd_simulate(const CommonOptions& opts) {
    ScenarioFile file = load(opts);
    fs::path dir = ensure_out_dir(opts);
    json root = base_report(file);

    if (!file.scenario.traffic) {
        // saturated scenario: validate the fixed point against the simulator
        auto t0 = std::chrono::steady_clock::now();
        SaturationStats stats =
            saturation_validate(file.scenario, file.sim.duration_s, file.sim.seed);
        double sim_seconds = seconds_since(t0);
        print_kv("tau_solved", stats.solved.tau);
        print_kv("tau_empirical", stats.tau_hat);
        print_kv("gamma_solved", stats.solved.gamma);
        print_kv("gamma_empirical", stats.gamma_hat);
        print_kv("throughput_analytical", stats.analytical_throughput);
        print_kv("throughput_empirical", stats.throughput_per_node);
        print_kv("throughput_rel_error", stats.throughput_rel_error);
        root["saturation"] = {{"tau_solved", stats.solved.tau},
                              {"tau_empirical", stats.tau_hat},
                              {"gamma_solved", stats.solved.gamma},
                              {"gamma_empirical", stats.gamma_hat},
                              {"throughput_analytical", stats.analytical_throughput},
                              {"throughput_empirical", stats.throughput_per_node},
                              {"throughput_rel_error", stats.throughput_rel_error}};
        root["runtimes_s"] = {{"simulate", sim_seconds}};
        emit_report(dir, root, opts);
        return 0;
    }

    auto t0 = std::chrono::steady_clock::now();
    SimResult sim = run_experiment(make_sim_config(file));
    double sim_seconds = seconds_since(t0);
    if (opts.dump_traces) dump_traces(file, dir);

    std::vector<double> xs, tail;
    for (double x : file.bounds.x_grid()) {
        xs.push_back(x);
        tail.push_back(sim.backlog_tail(x));
    }
    write_csv(dir / "sim_backlog.csv", {{"x", xs}, {"empirical_tail", tail}});
    std::vector<double> dx, dxs, dtail;
    for (double x : file.bounds.delay_grid()) {
        dx.push_back(x);
        dxs.push_back(x * sim.slot_seconds);
        dtail.push_back(sim.delay_tail(x));
    }
    write_csv(dir / "sim_delay.csv",
              {{"x_slots", dx}, {"x_seconds", dxs}, {"empirical_tail", dtail}});

    print_kv("mean_backlog", sim.mean_backlog);
    print_kv("mean_snapshot_backlog", sim.mean_snapshot_backlog);
    print_kv("mean_sojourn_delay_s", sim.mean_sojourn_delay_s);
    print_kv("mean_virtual_delay_s", sim.mean_virtual_delay_s);
    print_kv("per_node_throughput", sim.per_node_throughput);
    print_kv("drops", double(sim.drops));
    print_kv("censored_fraction", sim.censored_fraction);
    root["simulation"] = sim_summary_json(sim);
    root["runtimes_s"] = {{"simulate", sim_seconds}};
    emit_report(dir, root, opts);
    return 0;
}

int cmd_experiment(const CommonOptions& opts) {
    ScenarioFile file = load(opts);
    if (!file.scenario.traffic)
        throw ConfigError(opts.scenario_path + ": experiment requires a traffic section");
    const double lambda = file.scenario.traffic->lambda;
    fs::path dir = ensure_out_dir(opts);

    BoundPipeline pipe = run_bound_pipeline(file);
    auto t0 = std::chrono::steady_clock::now();
    SimResult sim = run_experiment(make_sim_config(file));
    double sim_seconds = seconds_since(t0);
    if (opts.dump_traces) dump_traces(file, dir);

    // paired backlog table
    std::vector<double> xs, analytical, empirical;
    bool backlog_dominates = true;
    for (double x : file.bounds.x_grid()) {
        double bound = 1.0;
        if (pipe.bound && pipe.bound->feasible) bound = pipe.bound->tail.probability(x);
        double tail = sim.backlog_tail(x);
        if (bound < tail - 1e-12) backlog_dominates = false;
        xs.push_back(x);
        analytical.push_back(bound);
        empirical.push_back(tail);
    }
    write_csv(dir / "backlog.csv",
              {{"x", xs}, {"analytical_bound", analytical}, {"empirical_tail", empirical}});

    // paired delay table; the Markov bound is fed the simulator's own mean
    // backlog (time-averaged)
    std::vector<double> dx, dxs, dbound, dtail;
    bool delay_dominates = true;
    for (double x : file.bounds.delay_grid()) {
        double bound = lambda > 0.0 ? delay_tail_bound(sim.mean_backlog, lambda, x) : 0.0;
        double tail = sim.delay_tail(x);
        if (bound < tail - 1e-12) delay_dominates = false;
        dx.push_back(x);
        dxs.push_back(x * sim.slot_seconds);
        dbound.push_back(bound);
        dtail.push_back(tail);
    }
    write_csv(dir / "delay.csv", {{"x_slots", dx},
                                  {"x_seconds", dxs},
                                  {"analytical_bound", dbound},
                                  {"empirical_tail", dtail}});

    double little_bound_s =
        lambda > 0.0 ? delay_mean_bound(sim.mean_backlog, lambda) * sim.slot_seconds : 0.0;
    double measured_s = sim.mean_sojourn_delay_s;
    json little = {{"bound_s", little_bound_s},
                   {"measured_mean_delay_s", measured_s},
                   {"dominates", little_bound_s >= measured_s},
                   {"relative_gap",
                    measured_s > 0.0 ? (little_bound_s - measured_s) / measured_s : 0.0}};

    json root = base_report(file);
    root["timing"] = to_json(pipe.timing);
    root["solution"] = to_json(pipe.sol);
    root["analysis"] = bound_section(pipe, file);
    root["simulation"] = sim_summary_json(sim);
    root["verdicts"] = {{"backlog_dominance", backlog_dominates},
                        {"markov_delay_dominance", delay_dominates},
                        {"little_comparison", little}};
    root["runtimes_s"] = {{"solve", pipe.solve_seconds},
                          {"optimize", pipe.optimize_seconds},
                          {"simulate", sim_seconds}};

    print_kv("stable", pipe.stable || pipe.no_arrivals ? "true" : "false");
    print_kv("backlog_dominance", backlog_dominates ? "pass" : "fail");
    print_kv("markov_delay_dominance", delay_dominates ? "pass" : "fail");
    print_kv("little_bound_s", little_bound_s);
    print_kv("little_measured_s", measured_s);
    print_kv("mean_backlog", sim.mean_backlog);
    print_kv("censored_fraction", sim.censored_fraction);
    emit_report(dir, root, opts);
    return 0;
}

int cmd_sweep(const CommonOptions& opts) {
    ScenarioFile file = load(opts);
    if (file.sweep_lambdas.empty())
        throw ConfigError(opts.scenario_path + ": sweep requires sweep.lambdas");
    if (!file.scenario.traffic)
        throw ConfigError(opts.scenario_path + ": sweep requires a traffic section (kind)");
    fs::path dir = ensure_out_dir(opts);

    DcfSolution sol = solve_fixed_point(file.scenario);
    double threshold = stability_threshold(sol);

    std::vector<double> lambdas, snapshot_backlog, time_avg_backlog, sojourn_s, throughput;
    json runs = json::array();
    auto t0 = std::chrono::steady_clock::now();
    for (double lambda : file.sweep_lambdas) {
        ScenarioFile point = file;
        point.scenario.traffic->lambda = lambda;
        SimResult sim = run_experiment(make_sim_config(point));
        lambdas.push_back(lambda);
        snapshot_backlog.push_back(sim.mean_snapshot_backlog);
        time_avg_backlog.push_back(sim.mean_backlog);
        sojourn_s.push_back(sim.mean_sojourn_delay_s);
        throughput.push_back(sim.per_node_throughput);
        runs.push_back({{"lambda", lambda},
                        {"stable_analytical", lambda < threshold},
                        {"simulation", sim_summary_json(sim)}});
        if (g_text_output)
            std::printf("lambda %-10s mean_snapshot_backlog %-14s mean_backlog %s\n",
                        format_number(lambda).c_str(),
                        format_number(sim.mean_snapshot_backlog).c_str(),
                        format_number(sim.mean_backlog).c_str());
    }
    write_csv(dir / "sweep.csv", {{"lambda", lambdas},
                                  {"mean_snapshot_backlog", snapshot_backlog},
                                  {"mean_backlog", time_avg_backlog},
                                  {"mean_sojourn_delay_s", sojourn_s},
                                  {"per_node_throughput", throughput}});

    json root = base_report(file);
    root["solution"] = to_json(sol);
    root["stability_threshold"] = threshold;
    root["sweep"] = runs;
    root["runtimes_s"] = {{"sweep", seconds_since(t0)}};
    print_kv("stability_threshold", threshold);
    emit_report(dir, root, opts);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic network calculus bounds and slotted simulation for 802.11 DCF"};
    app.require_subcommand(1);

    CommonOptions solve_opts, bound_opts, sim_opts, exp_opts, sweep_opts;
    add_common(app.add_subcommand("solve", "fixed point, timing, stability threshold"),
               solve_opts);
    add_common(app.add_subcommand("bound", "analytical backlog/delay bounds"), bound_opts);
    add_common(app.add_subcommand("simulate", "slotted DCF simulation only"), sim_opts);
    add_common(app.add_subcommand("experiment", "simulation + bounds + dominance verdicts"),
               exp_opts);
    add_common(app.add_subcommand("sweep", "simulate a grid of arrival rates"), sweep_opts);

    try {
        app.parse(argc, argv);
        if (app.got_subcommand("solve")) return cmd_solve(solve_opts);
        if (app.got_subcommand("bound")) return cmd_bound(bound_opts);
        if (app.got_subcommand("simulate")) return cmd_simulate(sim_opts);
        if (app.got_subcommand("experiment")) return cmd_experiment(exp_opts);
        if (app.got_subcommand("sweep")) return cmd_sweep(sweep_opts);
        return 1;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 2;
    }
}
