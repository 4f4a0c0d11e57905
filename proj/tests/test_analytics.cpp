#include <doctest.h>

#include <cmath>
#include <random>

#include "clc/analytics.hpp"
#include "oracles.hpp"

using namespace clc;

namespace {

// Hand-built traces on a small configuration: 2 miners, 4 checkpointers
// (t = 1, one byzantine), so honest ids are 0..4.
struct Builder {
  Trace t;
  Builder() {
    t.config = config_to_json(config_from_json({{"nMiners", 2},
                                                {"nCheckpointers", 4},
                                                {"byzantineCheckpointers", 1},
                                                {"k", 2},
                                                {"kPrime", 2},
                                                {"durationDelta", 100}}));
  }
  TraceRecord& rec(SimTime time, RecordKind k, NodeId node) { return t.add(time, k, node); }
  void mine(SimTime time, BlockId id, BlockId parent, bool adv = false) {
    auto& r = rec(time, RecordKind::block_mined, adv ? kAdversary : 0);
    r.a = id;
    r.b = parent;
    r.d = adv;
  }
  void adopt(SimTime time, NodeId node, BlockId tip, BlockId old = 0) {
    auto& r = rec(time, RecordKind::chain_adopt, node);
    r.a = tip;
    r.b = old;
  }
  void confirm(SimTime time, NodeId node, BlockId fin, BlockId ada) {
    auto& r = rec(time, RecordKind::confirm_change, node);
    r.a = fin;
    r.b = ada;
  }
  void cert_vote(SimTime time, NodeId voter, std::int64_t value) {
    auto& r = rec(time, RecordKind::vote_cast, voter);
    r.a = 1;
    r.b = 1;
    r.c = static_cast<std::int64_t>(VoteKind::cert);
    r.d = value;
  }
  void halt(SimTime time, NodeId node, std::int64_t value, std::int64_t block,
            std::vector<std::int64_t> voters) {
    auto& r = rec(time, RecordKind::iteration_halt, node);
    r.a = 1;
    r.b = 1;
    r.c = value;
    r.d = block;
    r.list = std::move(voters);
  }
};

// Two branches off genesis: 1-2-3-4 and 5-6-7-8.
void two_branches(Builder& b) {
  b.mine(1, 1, 0);
  b.mine(2, 2, 1);
  b.mine(3, 3, 2);
  b.mine(4, 4, 3);
  b.mine(5, 5, 0, true);
  b.mine(6, 6, 5, true);
  b.mine(7, 7, 6, true);
  b.mine(8, 8, 7, true);
}

}  // namespace

TEST_CASE("slot classification") {
  auto s = classify_slots({0, 1, 0}, {0, 0, 0});
  CHECK(s[1].y == 1);
  CHECK(s[1].z == 0);
  s = classify_slots({0, 2, 0}, {0, 0, 0});
  CHECK(s[1].y == 0);
  CHECK(s[1].z == 2);
  s = classify_slots({1, 1, 0}, {0, 0, 0});
  CHECK(s[1].y == 0);
  CHECK(s[1].z == 1);
  s = classify_slots({1, 0, 0}, {0, 3, 0});
  CHECK(s[0].y == 1);
  CHECK(s[1].z == 3);
  CHECK(slot_of(0.0, 1.0) == 1);
  CHECK(slot_of(1.0, 1.0) == 1);
  CHECK(slot_of(1.0000001, 1.0) == 2);
  CHECK(slot_of(2.5, 0.5) == 5);
}

TEST_CASE("expected loner rate") {
  YBar a = expected_ybar(0.2, 0.1, 1.0);
  CHECK(a.ybar == doctest::Approx(0.08 * std::exp(-0.24)));
  CHECK(a.zbar == doctest::Approx(0.1 - a.ybar));
  CHECK_FALSE(a.regime_warning);
  CHECK(expected_ybar(0.0, 1e-6, 1.0).ybar == doctest::Approx(1e-6).epsilon(1e-5));
  CHECK(expected_ybar(0.0, 1.0, 1.0).regime_warning);
}

TEST_CASE("expected loner rate against a Monte-Carlo oracle") {
  std::mt19937_64 rng(11);
  const double beta = 0.2, ld = 0.1;
  std::poisson_distribution<std::uint32_t> honest((1 - beta) * ld), adv(beta * ld);
  const std::size_t n = 2'000'000;
  std::vector<std::uint32_t> h(n), a(n);
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = honest(rng);
    a[i] = adv(rng);
  }
  double y = 0, z = 0;
  for (const auto& s : classify_slots(h, a)) {
    y += s.y;
    z += s.z;
  }
  YBar e = expected_ybar(beta, ld, 1.0);
  CHECK(y / n == doctest::Approx(e.ybar).epsilon(0.01));
  CHECK((y + z) / n == doctest::Approx(ld).epsilon(0.01));
}

TEST_CASE("typical execution checker") {
  const double ey = 0.07, ez = 0.03;
  std::vector<double> y(300, ey), z(300, ez);
  CHECK(check_typical(y, z, ey, ez, {0.01, 50}).typical);
  // A window without convergence opportunities and heavy adversarial load.
  for (int i = 100; i < 160; ++i) {
    y[i] = 0;
    z[i] = 1;
  }
  TypicalResult r = check_typical(y, z, ey, ez, {0.2, 50});
  CHECK_FALSE(r.typical);
  CHECK(r.t2 - r.t1 >= 50);
}

TEST_CASE("typical checker agrees with the all-windows oracle") {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 200; ++round) {
    std::size_t T = 20 + rng() % 60;
    std::vector<double> y(T), z(T);
    for (std::size_t i = 0; i < T; ++i) {
      y[i] = rng() % 4 == 0 ? 1 : 0;
      z[i] = static_cast<double>(rng() % 3 == 0 ? rng() % 3 : 0);
    }
    double ey = 0.15 + 0.2 * (rng() % 100) / 100.0;
    double ez = 0.1 + 0.3 * (rng() % 100) / 100.0;
    double eps = 0.1 + 0.8 * (rng() % 100) / 100.0;
    std::uint64_t tau = 3 + rng() % 15;
    TypicalResult got = check_typical(y, z, ey, ez, {eps, tau});
    oracle::Typical want = oracle::typical(y, z, ey, ez, eps, tau);
    CHECK(got.typical == want.typical);
    if (!want.typical) {
      CHECK(got.t2 == want.t2);
      CHECK(got.condition == want.condition);
    }
  }
}

TEST_CASE("common prefix and chain quality agree with brute force on micro traces") {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 300; ++round) {
    auto m = oracle::micro_trace(rng, 1 + rng() % 200);
    std::uint32_t k = static_cast<std::uint32_t>(rng() % 5);
    std::set<SimTime> got;
    for (const auto& v : check_common_prefix(m.tree, m.nodes, m.changes, k)) {
      got.insert(v.time);
      CHECK_FALSE(oracle::truncated_prefix(m.tree, v.earlier, 0, v.later));
    }
    CHECK(got == oracle::common_prefix_times(m.tree, m.nodes, m.changes, k));
    SimTime s = static_cast<double>(rng() % 20);
    std::set<std::size_t> q;
    for (const auto& v : check_chain_quality(m.tree, m.changes, k, s)) q.insert(v.change);
    CHECK(q == oracle::chain_quality_changes(m.tree, m.changes, k, s));
  }
}

TEST_CASE("abandoning a k-deep block is one violation") {
  Builder b;
  two_branches(b);
  for (NodeId v = 0; v < 5; ++v) b.adopt(4, v, 4);
  b.adopt(9, 1, 8, 4);
  TraceIndex ix = index_trace(b.t);
  auto v = check_common_prefix(ix, 2);
  REQUIRE(v.size() == 1);
  CHECK(v[0].time == 9);
  CHECK(v[0].later == 8);
  CHECK(v[0].earlier == 2);
  CHECK(check_common_prefix(ix, 4).empty());
  // Block 8 closes a run of four adversarial blocks.
  CHECK(check_chain_quality(ix, 4, 0.0).size() == 1);
  CHECK(check_chain_quality(ix, 5, 0.0).empty());
  CHECK(check_chain_quality(ix, 4, 5.0).empty());  // only three mined after s
}

TEST_CASE("a node running ahead of the others") {
  Builder b;
  b.mine(1, 1, 0);
  b.mine(2, 2, 1);
  b.adopt(1, 0, 1);
  b.adopt(2, 0, 2, 1);
  TraceIndex ix = index_trace(b.t);
  // The other honest nodes still hold genesis.
  CHECK(check_common_prefix(ix, 2).empty());
  CHECK(check_common_prefix(ix, 1).size() == 1);
  CHECK(check_chain_quality(ix, 1, 0.0).empty());
}

TEST_CASE("rule safety") {
  Builder b;
  two_branches(b);
  b.confirm(3, 0, 0, 1);
  b.confirm(4, 0, 0, 2);
  TraceIndex ix = index_trace(b.t);
  CHECK(check_rule_safety(ix, Rule::ada).empty());
  b.confirm(9, 0, 0, 6);
  TraceIndex ix2 = index_trace(b.t);
  auto v = check_rule_safety(ix2, Rule::ada);
  REQUIRE(v.size() == 1);
  CHECK(v[0].node == 0);
  CHECK(v[0].time == 9);
  CHECK(check_rule_safety(ix2, Rule::fin).empty());
  Builder empty;
  CHECK(check_rule_safety(index_trace(empty.t), Rule::fin).empty());
}

TEST_CASE("nesting") {
  Builder b;
  two_branches(b);
  b.adopt(4, 0, 4);
  auto& cp = b.rec(5, RecordKind::checkpoint_mark, 0);
  cp.a = 1;
  cp.b = 2;
  CHECK(check_nesting(index_trace(b.t), 2).empty());
  CHECK(check_nesting(index_trace(b.t), 3).size() == 1);
}

TEST_CASE("disagreeing halts and forged certificates") {
  Builder b;
  two_branches(b);
  for (NodeId v : {2, 3, 4}) b.cert_vote(10, v, 4);
  b.halt(11, 2, 4, 2, {2, 3, 4});
  CHECK(check_cp0(index_trace(b.t)).empty());
  b.halt(11.5, 3, 4, 2, {2, 3, 4});
  CHECK(check_cp0(index_trace(b.t)).empty());
  Builder forged = b;
  forged.halt(12, 4, 8, 6, {2, 3, 5});  // no cert votes for 8 were cast
  auto v = check_cp0(index_trace(forged.t));
  CHECK(v.size() == 2);  // unbacked certificate, and a different output
  Builder short_q = b;
  short_q.halt(12, 4, 4, 2, {2, 3});
  CHECK(check_cp0(index_trace(short_q.t)).size() == 1);
}

TEST_CASE("recency is zero when the checkpoint is k-deep at appearance") {
  Builder b;
  two_branches(b);
  b.adopt(4, 2, 4);
  auto& cp = b.rec(6, RecordKind::checkpoint_mark, 2);
  cp.a = 1;
  cp.b = 2;
  auto r = measure_recency(index_trace(b.t));
  REQUIRE(r.size() == 1);
  CHECK(r[0].recency == 0.0);
  Builder later;
  two_branches(later);
  later.adopt(4, 2, 4);
  later.adopt(5, 2, 8, 4);
  auto& cp2 = later.rec(9, RecordKind::checkpoint_mark, 3);
  cp2.a = 1;
  cp2.b = 2;
  r = measure_recency(index_trace(later.t));
  CHECK(r[0].recency == doctest::Approx(4.0));
}

TEST_CASE("liveness") {
  Builder b;
  two_branches(b);
  b.confirm(10, 0, 0, 2);
  TraceIndex ix = index_trace(b.t);
  CHECK(check_rule_liveness(ix, Rule::ada, 0.0, 0.0, 0.0).live);
  // Two honest blocks by time 10, none after: rate 0.02 over 100 with slack 2.
  LivenessResult l = check_rule_liveness(ix, Rule::ada, 0.05, 2.0, 0.0);
  CHECK_FALSE(l.live);
  CHECK(l.worst_s == 100.0);
  CHECK(check_rule_liveness(ix, Rule::ada, 0.02, 2.0, 0.0).live);
}

TEST_CASE("reports are a pure function of the trace") {
  Builder b;
  two_branches(b);
  b.adopt(4, 0, 4);
  b.confirm(4, 0, 0, 2);
  CHECK(analyze(b.t).json == analyze(b.t).json);
}
