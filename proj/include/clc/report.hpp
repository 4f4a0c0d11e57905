#pragma once

#include <string>

#include "clc/analytics.hpp"
#include "clc/config.hpp"
#include "clc/trace.hpp"

namespace clc {

// output.dir, else $CLC_OUTPUT_DIR, else ./out.
std::string output_root(const ScenarioConfig& cfg);

// Writes report.json and, as configured, trace.jsonl and CSV tables into dir.
void write_artifacts(const std::string& dir, const ScenarioConfig& cfg, const Trace& trace,
                     const Report& report);

void write_slots_csv(const std::string& path, const Trace& trace);
void write_checkpoints_csv(const std::string& path, const Trace& trace);
void write_iterations_csv(const std::string& path, const Trace& trace);

}  // namespace clc
