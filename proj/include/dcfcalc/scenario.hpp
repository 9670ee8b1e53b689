// Scenario files: strict, versioned JSON documents bundling the scenario,
// traffic, simulation controls, and bound-search controls.
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcfcalc/bounds.hpp"
#include "dcfcalc/sim.hpp"

namespace dcfcalc {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

struct SimControls {
    double duration_s = 20.0;
    int replications = 50;
    double snapshot_s = 10.0;
    std::uint64_t seed = 1;
};

struct BoundControls {
    OptimizerOptions optimizer;
    double x_max = 50.0;  // backlog grid: 0, x_step, ..., x_max packets
    double x_step = 1.0;
    double delay_x_max = 50.0;  // delay grid: x_step, ..., delay_x_max slots
    double delay_x_step = 1.0;
    std::int64_t i_max = 10000;

    std::vector<double> x_grid() const;
    std::vector<double> delay_grid() const;
};

struct ScenarioFile {
    int schema = 1;
    Scenario scenario;
    SimControls sim;
    BoundControls bounds;
    std::vector<double> sweep_lambdas;
};

ScenarioFile parse_scenario_text(const std::string& text, const std::string& origin = "<input>");
ScenarioFile parse_scenario_file(const std::filesystem::path& path);

// Serialization used when embedding the scenario in reports; the output
// re-parses to an identical ScenarioFile.
std::string scenario_to_json_text(const ScenarioFile& file, int indent = 2);

SimConfig make_sim_config(const ScenarioFile& file);

}  // namespace dcfcalc
