#include "dcfcalc/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace dcfcalc {

using nlohmann::json;

std::string format_number(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

json to_json(const SlotTiming& t) {
    return json{{"data_slots", t.data_slots},
                {"ack_slots", t.ack_slots},
                {"difs_slots", t.difs_slots},
                {"sifs_slots", t.sifs_slots},
                {"slot_length", t.slot_length},
                {"slot_length_int", t.slot_length_int},
                {"slot_seconds", t.slot_seconds}};
}

json to_json(const DcfSolution& s) {
    return json{{"tau", s.tau},
                {"gamma", s.gamma},
                {"p_nt", s.p_nt},
                {"p_t", s.p_t},
                {"p_s", s.p_s},
                {"p_o", s.p_o},
                {"slot_length", s.slot_len},
                {"slot_length_int", s.slot_len_int},
                {"mean_backoff", s.mean_backoff},
                {"nodes", s.nodes}};
}

json to_json(const FitResult& f) {
    return json{{"theta", f.constraint.theta},
                {"sigma", f.constraint.sigma},
                {"rho", f.constraint.rho},
                {"t_star", f.t_star},
                {"converged", f.converged}};
}

json to_json(const BoundReport& r) {
    json tail = json::array();
    for (const auto& [x, value] : r.tail.table)
        tail.push_back(json{{"x", x}, {"raw", value}, {"probability", std::min(value, 1.0)}});
    return json{{"feasible", r.feasible},
                {"theta1", r.theta1},
                {"theta2", r.theta2},
                {"r_arrival", r.r_arrival},
                {"r_impairment", r.r_impairment},
                {"expected_backlog", r.expected_backlog},
                {"tail", tail}};
}

json sim_summary_json(const SimResult& s) {
    return json{{"mean_backlog", s.mean_backlog},
                {"mean_snapshot_backlog", s.mean_snapshot_backlog},
                {"mean_virtual_delay_s", s.mean_virtual_delay_s},
                {"mean_sojourn_delay_s", s.mean_sojourn_delay_s},
                {"per_node_throughput", s.per_node_throughput},
                {"drops", s.drops},
                {"censored_delays", s.censored_delays},
                {"censored_fraction", s.censored_fraction},
                {"censoring_flagged", s.censoring_flagged},
                {"samples", s.backlog_samples.size()},
                {"slot_seconds", s.slot_seconds}};
}

void write_csv(const std::filesystem::path& path, const std::vector<CsvColumn>& columns) {
    if (columns.empty()) throw std::invalid_argument("write_csv: no columns");
    std::size_t rows = columns.front().values.size();
    for (const auto& column : columns)
        if (column.values.size() != rows)
            throw std::invalid_argument("write_csv: ragged columns");
    std::string text;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c) text += ',';
        text += columns[c].header;
    }
    text += '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) text += ',';
            text += format_number(columns[c].values[r]);
        }
        text += '\n';
    }
    write_text_file(path, text);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << text;
}

}  // namespace dcfcalc
