#pragma once

#include <string>

#include "bbcu/scenario.hpp"

namespace bbcu {

// Plain-text report of derived constants, equilibria, theorem constants,
// gain bounds, reaching estimates and Mode-2 eigenstructure for every load
// in the spec's ladder.
std::string analysis_report(const ScenarioSpec& spec);

// Certifies the full (R_D, I_OL) ladder and writes `roa_table.csv` plus one
// `roa_RD<r>_IOL<i>_x3k.csv` projection polyline per certified pair into
// out_dir. Returns the table CSV text.
std::string roa_report(const ScenarioSpec& spec, const std::string& out_dir);

void write_text_file(const std::string& path, const std::string& content);
std::string format_double(double v);

}  // namespace bbcu
