#include "clc/battery.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "clc/analytics.hpp"
#include "clc/sim.hpp"

namespace clc {

BatteryResult run_battery(const ScenarioConfig& cfg, std::uint64_t first, std::uint32_t count,
                          unsigned threads,
                          const std::function<void(const ScenarioConfig&, const Trace&)>& each) {
  BatteryResult res;
  res.seeds.resize(count);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<std::uint32_t>(count, 1));
  std::atomic<std::uint32_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      std::uint32_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        ScenarioConfig c = cfg;
        c.seed = first + i;
        Trace trace = run_scenario(c);
        if (each) each(c, trace);
        Report rep = analyze(trace);
        res.seeds[i] = {c.seed, std::move(rep.json), rep.must_pass_ok, rep.audits_ok};
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  nlohmann::json checkers = nlohmann::json::object();
  std::uint32_t must_ok = 0, audits_ok = 0;
  for (const SeedResult& s : res.seeds) {
    must_ok += s.must_pass_ok ? 1 : 0;
    audits_ok += s.audits_ok ? 1 : 0;
    for (const auto& [name, c] : s.report["checkers"].items()) {
      auto& entry = checkers[name];
      if (entry.is_null()) entry = {{"passing", 0}, {"violations", 0}};
      if (c["pass"].get<bool>()) entry["passing"] = entry["passing"].get<int>() + 1;
      entry["violations"] = entry["violations"].get<std::uint64_t>() + c["violations"].get<std::uint64_t>();
    }
  }
  res.summary = {{"scenario", cfg.name},  {"firstSeed", first},          {"seeds", count},
                 {"mustPassOk", must_ok}, {"auditsOk", audits_ok},       {"checkers", checkers}};
  return res;
}

}  // namespace clc
