#include "clc/report.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "clc/error.hpp"

namespace clc {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << std::setprecision(17);
  return out;
}

}  // namespace

std::string output_root(const ScenarioConfig& cfg) {
  if (!cfg.output.dir.empty()) return cfg.output.dir;
  if (const char* env = std::getenv("CLC_OUTPUT_DIR"); env && *env) return env;
  return "out";
}

void write_slots_csv(const std::string& path, const Trace& trace) {
  ScenarioConfig cfg = config_from_json(trace.config);
  auto out = open_out(path);
  out << "slot,honest,adversarial,y,z\n";
  for (const SlotStats& s : compute_yz(trace, cfg.delta)) {
    out << s.slot << ',' << s.honest << ',' << s.adversarial << ',' << s.y << ',' << s.z << '\n';
  }
}

void write_checkpoints_csv(const std::string& path, const Trace& trace) {
  TraceIndex ix = index_trace(trace);
  auto out = open_out(path);
  out << "iteration,block,height,appear,recency\n";
  for (const CheckpointInfo& c : measure_recency(ix)) {
    out << c.iteration << ',' << c.block << ',' << ix.tree.at(c.block).height << ',' << c.appear
        << ',';
    if (std::isfinite(c.recency)) out << c.recency;
    out << '\n';
  }
}

void write_iterations_csv(const std::string& path, const Trace& trace) {
  TraceIndex ix = index_trace(trace);
  auto out = open_out(path);
  out << "iteration,deciding_period,first_leader_byzantine,first_halt,last_halt,max_latency,halts\n";
  for (const IterationInfo& it : measure_cadence(ix).iterations) {
    out << it.iteration << ',' << it.deciding_period << ',' << (it.first_leader_byzantine ? 1 : 0)
        << ',' << it.first_halt << ',' << it.last_halt << ',' << it.max_halt_latency << ','
        << it.halts << '\n';
  }
}

void write_artifacts(const std::string& dir, const ScenarioConfig& cfg, const Trace& trace,
                     const Report& report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
  {
    auto out = open_out(dir + "/report.json");
    out << report.json.dump(2) << '\n';
  }
  if (cfg.output.trace) write_trace_file(dir + "/trace.jsonl", trace);
  if (cfg.output.csv) {
    write_slots_csv(dir + "/slots.csv", trace);
    write_checkpoints_csv(dir + "/checkpoints.csv", trace);
    write_iterations_csv(dir + "/iterations.csv", trace);
  }
}

}  // namespace clc
