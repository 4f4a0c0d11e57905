#include <doctest.h>

#include <cmath>

#include "clc/analytics.hpp"
#include "clc/error.hpp"
#include "clc/sim.hpp"

using namespace clc;

namespace {

ScenarioConfig small(double duration = 1500.0) {
  ScenarioConfig c = config_from_json({{"durationDelta", duration}});
  c.network.delay = "uniform";
  return c;
}

std::size_t count(const Trace& t, RecordKind k) {
  std::size_t n = 0;
  for (const auto& r : t.records) n += r.kind == k ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("exponential sampler mean and unit range") {
  std::mt19937_64 rng(3);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += sample_exponential(rng, 0.25);
  CHECK(sum / n == doctest::Approx(4.0).epsilon(0.02));
  for (int i = 0; i < 1000; ++i) {
    double u = sample_unit(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(splitmix64(1) != splitmix64(2));
}

TEST_CASE("event queue orders by time, priority, insertion") {
  EventQueue q;
  q.push({2.0, 0, 0, EventType::deliver, 1});
  q.push({1.0, 8, 0, EventType::step, 2});
  q.push({1.0, 2, 0, EventType::deliver, 3});
  q.push({1.0, 2, 0, EventType::deliver, 4});
  std::vector<NodeId> order;
  while (!q.empty()) order.push_back(q.pop().node);
  CHECK(order == std::vector<NodeId>{3, 4, 2, 1});
}

TEST_CASE("runs are deterministic per seed") {
  ScenarioConfig c = small();
  c.beta = 0.3;
  c.adversary.strategy = "private-chain";
  c.adversary.checkpointers = "equivocate";
  std::string a = trace_to_string(run_scenario(c));
  std::string b = trace_to_string(run_scenario(c));
  CHECK(a == b);
  c.seed = 2;
  CHECK(trace_to_string(run_scenario(c)) != a);
}

TEST_CASE("zero duration processes nothing") {
  ScenarioConfig c = small(0.0);
  Trace t = run_scenario(c);
  CHECK(count(t, RecordKind::block_mined) == 0);
  CHECK(count(t, RecordKind::period_start) == 0);
}

TEST_CASE("honest mining rate and clean audits") {
  ScenarioConfig c = small(4000.0);
  c.beta = 0.2;
  Trace t = run_scenario(c);
  TraceIndex ix = index_trace(t);
  std::size_t honest = 0, adv_ops = 0;
  for (const auto& r : t.records) {
    if (r.kind == RecordKind::block_mined && !r.d) ++honest;
    if (r.kind == RecordKind::mining_opportunity && r.d) ++adv_ops;
  }
  // Poisson with mean 320; 5 sigma.
  CHECK(std::abs(static_cast<double>(honest) - 320.0) < 5 * std::sqrt(320.0));
  CHECK(std::abs(static_cast<double>(adv_ops) - 80.0) < 5 * std::sqrt(80.0));
  CHECK(count(t, RecordKind::block_mined) == honest);  // strategy none mines nothing
  CHECK(audit_deliveries(ix).empty());
  CHECK(audit_capability(ix).empty());
  CHECK(audit_confirmations(ix).empty());
  CHECK(audit_heights(ix).empty());
  CHECK(check_cp0(ix).empty());
}

TEST_CASE("checkpoints keep the configured spacing") {
  ScenarioConfig c = small(3000.0);
  Trace t = run_scenario(c);
  Cadence cad = measure_cadence(index_trace(t));
  REQUIRE(cad.checkpoints.size() >= 5);
  for (double g : cad.gaps) CHECK(g >= c.e_delta() - 1e-9);
}

TEST_CASE("pre-gst delays stay within the model") {
  for (const char* pre : {"maximal", "uniform", "partition"}) {
    ScenarioConfig c = small(2500.0);
    c.network.mode = "M1";
    c.network.gst = 800;
    c.network.pre_gst = pre;
    c.beta = 0.25;
    c.adversary.strategy = "private-chain";
    Trace t = run_scenario(c);
    TraceIndex ix = index_trace(t);
    CHECK(audit_deliveries(ix).empty());
    CHECK(check_cp0(ix).empty());
    CHECK(check_rule_safety(ix, Rule::fin).empty());
  }
}

TEST_CASE("churn respects the online floor") {
  ScenarioConfig c = small(2000.0);
  c.participation.mode = "U2";
  c.participation.miner_floor = 0.5;
  Trace t = run_scenario(c);
  std::vector<int> online(c.n_honest(), 1);
  int min_online = static_cast<int>(c.n_miners);
  double last = -1.0;
  auto miners_online = [&] {
    int n = 0;
    for (std::uint32_t i = 0; i < c.n_miners; ++i) n += online[i];
    return n;
  };
  for (const auto& r : t.records) {
    if (r.time != last && last >= 0.0) min_online = std::min(min_online, miners_online());
    last = r.time;
    if (r.kind == RecordKind::online) online[r.node] = 1;
    if (r.kind == RecordKind::offline) online[r.node] = 0;
  }
  CHECK(count(t, RecordKind::offline) > 0);
  CHECK(min_online >= 25);
  CHECK(audit_deliveries(index_trace(t)).empty());
}

TEST_CASE("roll-back adversary needs the depth variant") {
  ScenarioConfig c = small();
  c.adversary.strategy = "grandpa-rollback";
  CHECK_THROWS_AS(run_scenario(c), Error);
  c.variant.checkpoint_depth_override = 0;
  c.variant.enforce_p3 = false;
  CHECK_NOTHROW(run_scenario(c));
}

TEST_CASE("scripted byzantine votes appear at their times") {
  ScenarioConfig c = small(200.0);
  c.adversary.checkpointers = "scripted";
  c.adversary.script = {Vote{VoteKind::next, kBottom, 1, 1, 57}};
  c.adversary.script_times = {3.25};
  Trace t = run_scenario(c);
  bool found = false;
  for (const auto& r : t.records) {
    if (r.kind == RecordKind::vote_cast && r.node == 57) {
      CHECK(r.time == 3.25);
      CHECK(r.e == 1);
      found = true;
    }
  }
  CHECK(found);
}
