#include "dcfcalc/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dcfcalc {

using nlohmann::json;

std::vector<double> BoundControls::x_grid() const {
    std::vector<double> grid;
    for (double x = 0.0; x <= x_max + 1e-9; x += x_step) grid.push_back(x);
    return grid;
}

std::vector<double> BoundControls::delay_grid() const {
    std::vector<double> grid;
    for (double x = delay_x_step; x <= delay_x_max + 1e-9; x += delay_x_step)
        grid.push_back(x);
    return grid;
}

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& path,
                       const std::string& what) {
    throw ConfigError(origin + ": " + path + ": " + what);
}

void require_keys(const json& obj, const std::string& origin, const std::string& path,
                  const std::set<std::string>& allowed) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            fail(origin, path, "unknown key '" + item.key() + "'");
}

double get_number(const json& obj, const std::string& origin, const std::string& path,
                  const std::string& key, double fallback, bool* present = nullptr) {
    if (!obj.contains(key)) {
        if (present) *present = false;
        return fallback;
    }
    if (present) *present = true;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(origin, path + "." + key, "expected a number");
    return v.get<double>();
}

std::int64_t get_integer(const json& obj, const std::string& origin, const std::string& path,
                         const std::string& key, std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(origin, path + "." + key, "expected an integer");
    return v.get<std::int64_t>();
}

PhyParams parse_phy(const json& obj, const std::string& origin) {
    const std::string path = "scenario.phy";
    require_keys(obj, origin, path,
                 {"basic_rate_bps", "data_rate_bps", "phy_header_bytes", "ack_header_bytes",
                  "mac_header_bytes", "sifs_us", "difs_us", "idle_slot_us", "cw_min", "cw_max",
                  "retry_limit"});
    PhyParams p;
    p.basic_rate_bps = get_number(obj, origin, path, "basic_rate_bps", p.basic_rate_bps);
    p.data_rate_bps = get_number(obj, origin, path, "data_rate_bps", p.data_rate_bps);
    p.phy_header_bytes = int(get_integer(obj, origin, path, "phy_header_bytes", p.phy_header_bytes));
    p.ack_header_bytes = int(get_integer(obj, origin, path, "ack_header_bytes", p.ack_header_bytes));
    p.mac_header_bytes = int(get_integer(obj, origin, path, "mac_header_bytes", p.mac_header_bytes));
    p.sifs_us = get_number(obj, origin, path, "sifs_us", p.sifs_us);
    p.difs_us = get_number(obj, origin, path, "difs_us", p.difs_us);
    p.idle_slot_us = get_number(obj, origin, path, "idle_slot_us", p.idle_slot_us);
    p.cw_min = int(get_integer(obj, origin, path, "cw_min", p.cw_min));
    p.cw_max = int(get_integer(obj, origin, path, "cw_max", p.cw_max));
    p.retry_limit = int(get_integer(obj, origin, path, "retry_limit", p.retry_limit));
    return p;
}

TrafficModel parse_traffic(const json& obj, const std::string& origin) {
    const std::string path = "traffic";
    require_keys(obj, origin, path, {"kind", "lambda"});
    if (!obj.contains("kind") || !obj.at("kind").is_string())
        fail(origin, path + ".kind", "expected \"poisson\" or \"cbr\"");
    std::string kind = obj.at("kind").get<std::string>();
    TrafficModel traffic;
    if (kind == "poisson")
        traffic.kind = TrafficModel::Kind::Poisson;
    else if (kind == "cbr")
        traffic.kind = TrafficModel::Kind::Cbr;
    else
        fail(origin, path + ".kind", "expected \"poisson\" or \"cbr\", got '" + kind + "'");
    bool present = false;
    traffic.lambda = get_number(obj, origin, path, "lambda", 0.0, &present);
    if (!present) fail(origin, path + ".lambda", "required");
    // lambda == 0 is the documented no-arrivals edge case
    if (traffic.lambda < 0.0) fail(origin, path + ".lambda", "must be nonnegative");
    return traffic;
}

}  // namespace

ScenarioFile parse_scenario_text(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line number for the diagnostic
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min(text.size(), std::size_t(e.byte)); ++i)
            if (text[i] == '\n') ++line;
        std::ostringstream msg;
        msg << origin << ": line " << line << ": " << e.what();
        throw ConfigError(msg.str());
    }
    if (!root.is_object()) fail(origin, "$", "top level must be an object");
    require_keys(root, origin, "$", {"schema", "scenario", "traffic", "sim", "bounds", "sweep"});

    ScenarioFile file;
    file.schema = int(get_integer(root, origin, "$", "schema", 0));
    if (file.schema != 1) fail(origin, "schema", "unsupported schema version (expected 1)");

    if (!root.contains("scenario") || !root.at("scenario").is_object())
        fail(origin, "scenario", "required object");
    const json& sc = root.at("scenario");
    require_keys(sc, origin, "scenario", {"nodes", "payload_bytes", "phy"});
    file.scenario.nodes = int(get_integer(sc, origin, "scenario", "nodes", 10));
    file.scenario.payload_bytes = int(get_integer(sc, origin, "scenario", "payload_bytes", 256));
    if (sc.contains("phy")) {
        if (!sc.at("phy").is_object()) fail(origin, "scenario.phy", "expected an object");
        file.scenario.phy = parse_phy(sc.at("phy"), origin);
    }

    if (root.contains("traffic")) {
        if (!root.at("traffic").is_object()) fail(origin, "traffic", "expected an object");
        file.scenario.traffic = parse_traffic(root.at("traffic"), origin);
    }

    if (root.contains("sim")) {
        const json& sm = root.at("sim");
        if (!sm.is_object()) fail(origin, "sim", "expected an object");
        require_keys(sm, origin, "sim", {"duration_s", "replications", "snapshot_s", "seed"});
        file.sim.duration_s = get_number(sm, origin, "sim", "duration_s", file.sim.duration_s);
        file.sim.replications =
            int(get_integer(sm, origin, "sim", "replications", file.sim.replications));
        file.sim.snapshot_s = get_number(sm, origin, "sim", "snapshot_s", file.sim.snapshot_s);
        file.sim.seed = std::uint64_t(get_integer(sm, origin, "sim", "seed",
                                                  std::int64_t(file.sim.seed)));
    }

    if (root.contains("bounds")) {
        const json& bd = root.at("bounds");
        if (!bd.is_object()) fail(origin, "bounds", "expected an object");
        require_keys(bd, origin, "bounds",
                     {"theta_min", "theta_max", "theta_points", "x_max", "x_step", "delay_x_max",
                      "delay_x_step", "i_max", "fit_epsilon", "fit_t_max"});
        BoundControls& b = file.bounds;
        b.optimizer.theta_min = get_number(bd, origin, "bounds", "theta_min", b.optimizer.theta_min);
        b.optimizer.theta_max = get_number(bd, origin, "bounds", "theta_max", b.optimizer.theta_max);
        b.optimizer.theta_points =
            int(get_integer(bd, origin, "bounds", "theta_points", b.optimizer.theta_points));
        b.optimizer.fit_epsilon =
            get_number(bd, origin, "bounds", "fit_epsilon", b.optimizer.fit_epsilon);
        b.optimizer.fit_t_max =
            int(get_integer(bd, origin, "bounds", "fit_t_max", b.optimizer.fit_t_max));
        b.x_max = get_number(bd, origin, "bounds", "x_max", b.x_max);
        b.x_step = get_number(bd, origin, "bounds", "x_step", b.x_step);
        b.delay_x_max = get_number(bd, origin, "bounds", "delay_x_max", b.delay_x_max);
        b.delay_x_step = get_number(bd, origin, "bounds", "delay_x_step", b.delay_x_step);
        b.i_max = get_integer(bd, origin, "bounds", "i_max", b.i_max);
        if (b.x_step <= 0 || b.delay_x_step <= 0)
            fail(origin, "bounds", "grid steps must be positive");
        if (b.x_max / b.x_step > 1e6 || b.delay_x_max / b.delay_x_step > 1e6)
            fail(origin, "bounds", "grid too large (over 1e6 points)");
        if (b.optimizer.theta_points < 2 || b.optimizer.theta_min <= 0.0 ||
            b.optimizer.theta_max < b.optimizer.theta_min)
            fail(origin, "bounds", "theta grid needs theta_max >= theta_min > 0 and >= 2 points");
    }

    if (root.contains("sweep")) {
        const json& sw = root.at("sweep");
        if (!sw.is_object()) fail(origin, "sweep", "expected an object");
        require_keys(sw, origin, "sweep", {"lambdas"});
        if (!sw.contains("lambdas") || !sw.at("lambdas").is_array())
            fail(origin, "sweep.lambdas", "expected an array of rates");
        for (const auto& v : sw.at("lambdas")) {
            if (!v.is_number()) fail(origin, "sweep.lambdas", "expected numbers");
            file.sweep_lambdas.push_back(v.get<double>());
        }
    }

    // surface invariant violations with the config origin attached
    try {
        file.scenario.validate();
        make_sim_config(file).validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return file;
}

ScenarioFile parse_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str(), path.string());
}

std::string scenario_to_json_text(const ScenarioFile& file, int indent) {
    json root;
    root["schema"] = file.schema;
    json sc;
    sc["nodes"] = file.scenario.nodes;
    sc["payload_bytes"] = file.scenario.payload_bytes;
    const PhyParams& p = file.scenario.phy;
    sc["phy"] = {{"basic_rate_bps", p.basic_rate_bps},
                 {"data_rate_bps", p.data_rate_bps},
                 {"phy_header_bytes", p.phy_header_bytes},
                 {"ack_header_bytes", p.ack_header_bytes},
                 {"mac_header_bytes", p.mac_header_bytes},
                 {"sifs_us", p.sifs_us},
                 {"difs_us", p.difs_us},
                 {"idle_slot_us", p.idle_slot_us},
                 {"cw_min", p.cw_min},
                 {"cw_max", p.cw_max},
                 {"retry_limit", p.retry_limit}};
    root["scenario"] = sc;
    if (file.scenario.traffic) {
        root["traffic"] = {
            {"kind",
             file.scenario.traffic->kind == TrafficModel::Kind::Poisson ? "poisson" : "cbr"},
            {"lambda", file.scenario.traffic->lambda}};
    }
    root["sim"] = {{"duration_s", file.sim.duration_s},
                   {"replications", file.sim.replications},
                   {"snapshot_s", file.sim.snapshot_s},
                   {"seed", std::int64_t(file.sim.seed)}};
    root["bounds"] = {{"theta_min", file.bounds.optimizer.theta_min},
                      {"theta_max", file.bounds.optimizer.theta_max},
                      {"theta_points", file.bounds.optimizer.theta_points},
                      {"x_max", file.bounds.x_max},
                      {"x_step", file.bounds.x_step},
                      {"delay_x_max", file.bounds.delay_x_max},
                      {"delay_x_step", file.bounds.delay_x_step},
                      {"i_max", file.bounds.i_max},
                      {"fit_epsilon", file.bounds.optimizer.fit_epsilon},
                      {"fit_t_max", file.bounds.optimizer.fit_t_max}};
    if (!file.sweep_lambdas.empty()) root["sweep"] = {{"lambdas", file.sweep_lambdas}};
    return root.dump(indent);
}

SimConfig make_sim_config(const ScenarioFile& file) {
    SimConfig config;
    config.scenario = file.scenario;
    config.duration_s = file.sim.duration_s;
    config.replications = file.sim.replications;
    config.snapshot_s = file.sim.snapshot_s;
    config.seed = file.sim.seed;
    return config;
}

}  // namespace dcfcalc
