// Machine-readable reports: JSON assembly and fixed-column CSV tables.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcfcalc/bounds.hpp"
#include "dcfcalc/scenario.hpp"
#include "dcfcalc/sim.hpp"

namespace dcfcalc {

// Stable shortest-round-trip number formatting shared by all CSV output.
std::string format_number(double value);

nlohmann::json to_json(const SlotTiming& timing);
nlohmann::json to_json(const DcfSolution& sol);
nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const BoundReport& report);
nlohmann::json sim_summary_json(const SimResult& result);

struct CsvColumn {
    std::string header;
    std::vector<double> values;
};

// Writes header + rows with format_number; all tables share this writer so
// reruns are byte-identical.
void write_csv(const std::filesystem::path& path, const std::vector<CsvColumn>& columns);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace dcfcalc
