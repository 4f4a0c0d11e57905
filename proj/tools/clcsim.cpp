// clcsim: run, replay and batch-run checkpointed longest chain scenarios.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clc/analytics.hpp"
#include "clc/battery.hpp"
#include "clc/config.hpp"
#include "clc/error.hpp"
#include "clc/report.hpp"
#include "clc/sim.hpp"

#ifndef CLC_SCENARIO_DIR
#define CLC_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using clc::ScenarioConfig;

namespace {

ScenarioConfig load(const std::string& path, const std::vector<std::string>& sets) {
  nlohmann::json doc = clc::read_config_json(path);
  for (const std::string& s : sets) clc::apply_override(doc, s);
  return clc::config_from_json(doc);
}

std::vector<std::string> scenario_files(const std::string& path) {
  std::vector<std::string> out;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.path().extension() == ".json") out.push_back(e.path().string());
    }
    std::sort(out.begin(), out.end());
  } else {
    out.push_back(path);
  }
  return out;
}

std::string scenario_dir() {
  if (const char* env = std::getenv("CLC_SCENARIO_DIR"); env && *env) return env;
  return CLC_SCENARIO_DIR;
}

void print_warnings(const ScenarioConfig& cfg) {
  for (const std::string& w : clc::validate(cfg)) std::cerr << "warning: " << w << '\n';
}

int cmd_run(const std::string& path, const std::vector<std::string>& sets,
            std::optional<std::uint64_t> seed, const std::string& out) {
  ScenarioConfig cfg = load(path, sets);
  if (seed) cfg.seed = *seed;
  print_warnings(cfg);
  clc::Trace trace = clc::run_scenario(cfg);
  clc::Report rep = clc::analyze(trace);
  std::string dir = out.empty() ? clc::output_root(cfg) + "/" + cfg.name + "/seed-" +
                                      std::to_string(cfg.seed)
                                : out;
  clc::write_artifacts(dir, cfg, trace, rep);
  std::cout << cfg.name << " seed " << cfg.seed << ": " << trace.records.size() << " records, "
            << (rep.must_pass_ok ? "must-pass ok" : "MUST-PASS FAILED") << ", "
            << (rep.audits_ok ? "audits ok" : "AUDITS FAILED") << " -> " << dir << '\n';
  for (const auto& [name, c] : rep.json["checkers"].items()) {
    if (!c["pass"].get<bool>()) {
      std::cout << "  " << name << ": " << c["violations"] << " violation(s)\n";
    }
  }
  return rep.must_pass_ok && rep.audits_ok ? 0 : 1;
}

int cmd_replay(const std::string& path, const std::vector<std::string>& checkers,
               const std::string& out) {
  clc::Trace trace = clc::read_trace_file(path);
  if (!checkers.empty()) trace.config["checkers"]["enabled"] = checkers;
  clc::Report rep = clc::analyze(trace);
  std::string text = rep.json.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) throw clc::Error(clc::ErrorCode::IoError, "cannot write " + out);
    f << text;
  }
  return rep.must_pass_ok && rep.audits_ok ? 0 : 1;
}

int cmd_battery(const std::string& path, const std::vector<std::string>& sets,
                std::uint32_t seeds, std::uint64_t first, unsigned threads,
                const std::string& out) {
  nlohmann::json all = nlohmann::json::array();
  bool ok = true;
  for (const std::string& file : scenario_files(path)) {
    ScenarioConfig cfg = load(file, sets);
    clc::BatteryResult res = clc::run_battery(cfg, first, seeds, threads);
    const auto& s = res.summary;
    std::cout << cfg.name << ": must-pass " << s["mustPassOk"] << "/" << seeds << ", audits "
              << s["auditsOk"] << "/" << seeds << '\n';
    for (const auto& [name, c] : s["checkers"].items()) {
      std::cout << "  " << name << ": " << c["passing"] << "/" << seeds << " passing, "
                << c["violations"] << " violation(s)\n";
    }
    ok = ok && s["mustPassOk"].get<std::uint32_t>() == seeds &&
         s["auditsOk"].get<std::uint32_t>() == seeds;
    all.push_back(s);
    if (!out.empty()) {
      fs::create_directories(out);
      std::ofstream f(out + "/" + cfg.name + ".battery.json");
      nlohmann::json detail = s;
      for (const auto& r : res.seeds) detail["runs"].push_back(r.report);
      f << detail.dump(1) << '\n';
    }
  }
  if (!out.empty()) {
    std::ofstream f(out + "/battery.json");
    f << all.dump(2) << '\n';
  }
  return ok ? 0 : 1;
}

int cmd_validate(const std::string& path, const std::vector<std::string>& sets) {
  ScenarioConfig cfg = load(path, sets);
  auto warnings = clc::validate(cfg);
  for (const std::string& w : warnings) std::cout << "warning: " << w << '\n';
  std::cout << cfg.name << ": ok\n";
  return 0;
}

int cmd_list(const std::string& dir) {
  for (const std::string& file : scenario_files(dir)) {
    try {
      ScenarioConfig cfg = clc::load_config(file);
      std::cout << cfg.name << "  " << fs::path(file).filename().string() << "  "
                << cfg.description << '\n';
    } catch (const clc::Error& ex) {
      std::cout << fs::path(file).filename().string() << "  invalid: " << ex.what() << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Checkpointed longest chain simulator"};
  app.require_subcommand(1);

  std::string config, trace_path, out, dir;
  std::vector<std::string> sets, checkers;
  std::uint64_t seed = 0, first = 1;
  std::uint32_t seeds = 100;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "Run one scenario and write trace, report and CSVs");
  run->add_option("config", config, "Scenario JSON")->required();
  run->add_option("--seed", seed, "Override the seed");
  run->add_option("--set", sets, "Override a field: path.to.field=value");
  run->add_option("--out", out, "Output directory");

  auto* replay = app.add_subcommand("replay", "Re-run analytics on a stored trace");
  replay->add_option("trace", trace_path, "Trace file (.jsonl)")->required();
  replay->add_option("--checkers", checkers, "Checkers to run (default: as configured)")
      ->delimiter(',');
  replay->add_option("--out", out, "Write the report here instead of stdout");

  auto* battery = app.add_subcommand("battery", "Run scenarios over a range of seeds");
  battery->add_option("config", config, "Scenario JSON or a directory of them")->required();
  battery->add_option("--seeds", seeds, "Number of seeds")->capture_default_str();
  battery->add_option("--first-seed", first, "First seed")->capture_default_str();
  battery->add_option("--threads", threads, "Worker threads (0 = hardware)");
  battery->add_option("--set", sets, "Override a field: path.to.field=value");
  battery->add_option("--out", out, "Directory for aggregate reports");

  auto* validate = app.add_subcommand("validate-config", "Parse and validate a scenario");
  validate->add_option("config", config, "Scenario JSON")->required();
  validate->add_option("--set", sets, "Override a field: path.to.field=value");

  auto* list = app.add_subcommand("list-scenarios", "List bundled scenarios");
  list->add_option("dir", dir, "Scenario directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      std::optional<std::uint64_t> s;
      if (run->count("--seed")) s = seed;
      return cmd_run(config, sets, s, out);
    }
    if (*replay) return cmd_replay(trace_path, checkers, out);
    if (*battery) return cmd_battery(config, sets, seeds, first, threads, out);
    if (*validate) return cmd_validate(config, sets);
    if (*list) return cmd_list(dir.empty() ? scenario_dir() : dir);
  } catch (const clc::Error& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  }
  return 0;
}
