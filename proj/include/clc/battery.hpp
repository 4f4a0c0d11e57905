#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>

#include "clc/config.hpp"
#include "clc/trace.hpp"

namespace clc {

struct SeedResult {
  std::uint64_t seed = 0;
  nlohmann::json report;
  bool must_pass_ok = true;
  bool audits_ok = true;
};

struct BatteryResult {
  std::vector<SeedResult> seeds;  // in seed order
  nlohmann::json summary;         // per checker: seeds passing
};

// Runs seeds first..first+count-1 of the scenario on `threads` workers.
// `each` (optional) sees every seed's config and trace before analysis; it is
// called from worker threads.
BatteryResult run_battery(const ScenarioConfig& cfg, std::uint64_t first, std::uint32_t count,
                          unsigned threads = 0,
                          const std::function<void(const ScenarioConfig&, const Trace&)>& each = {});

}  // namespace clc
