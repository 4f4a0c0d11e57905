#include <doctest.h>

#include <functional>
#include <map>
#include <memory>

#include "clc/ba.hpp"

using namespace clc;

TEST_CASE("vote book counts distinct voters per key") {
  VoteBook b;
  CHECK(b.add(Vote{VoteKind::soft, 5, 1, 1, 0}));
  CHECK_FALSE(b.add(Vote{VoteKind::soft, 5, 1, 1, 0}));
  b.add(Vote{VoteKind::soft, 5, 1, 1, 1});
  b.add(Vote{VoteKind::soft, 6, 1, 1, 1});  // same voter, other value: kept too
  CHECK(b.count(VoteKind::soft, 1, 5) == 2);
  CHECK(b.count(VoteKind::soft, 1, 6) == 1);
  CHECK(b.count(VoteKind::cert, 1, 5) == 0);
  for (NodeId v = 0; v < 3; ++v) {
    b.add(Vote{VoteKind::next, kBottom, 1, 2, v});
    b.add(Vote{VoteKind::next, 9, 1, 2, v});
  }
  CHECK(b.quorum_values(VoteKind::next, 2, 3) == std::vector<Value>{9, kBottom});
  CHECK(b.max_quorum_period(VoteKind::next, 3) == 2u);
  CHECK_FALSE(b.max_quorum_period(VoteKind::cert, 1).has_value());
}

namespace {

// Honest checkpointers on a fixed-delay network. Every vote and proposal
// reaches every other member after `delay`.
struct Net : BaEnv {
  BlockTree tree = BlockTree::with_genesis();
  std::vector<std::unique_ptr<NodeState>> nodes;
  std::vector<std::unique_ptr<BaCheckpointer>> bas;
  std::multimap<std::pair<SimTime, std::uint64_t>, std::function<void()>> q;
  std::uint64_t seq = 0;
  SimTime now = 0.0, delay = 1.0;
  std::function<NodeId(std::uint32_t, std::uint32_t)> leader = [](auto, auto) { return 0; };
  std::map<NodeId, std::vector<std::pair<SimTime, Certificate>>> halts;
  std::map<NodeId, std::vector<std::pair<std::uint32_t, SimTime>>> periods;  // (period, time)
  std::uint32_t stop_after_iteration = 1;

  Net(std::uint32_t n, std::uint32_t t, std::uint32_t chain_len, bool containment = true) {
    for (BlockId i = 1; i <= chain_len; ++i) {
      Block b;
      b.id = i;
      b.parent = i - 1;
      tree.append(b);
    }
    BaConfig cfg;
    cfg.n = n;
    cfg.t = t;
    cfg.quorum = 2 * t + 1;
    cfg.depth = 4;
    cfg.check_containment = containment;
    cfg.e = 50.0;
    NodeParams np;
    np.checkpoint_depth = 4;
    np.quorum = cfg.quorum;
    for (NodeId id = 0; id < static_cast<NodeId>(n); ++id) {
      nodes.push_back(std::make_unique<NodeState>(id, &tree, np));
      nodes.back()->on_receive_chain(chain_len);
      bas.push_back(std::make_unique<BaCheckpointer>(id, cfg, nodes.back().get(), this));
    }
  }

  void at(SimTime t, std::function<void()> f) { q.emplace(std::make_pair(t, seq++), std::move(f)); }

  void run(SimTime until) {
    while (!q.empty() && q.begin()->first.first <= until) {
      auto it = q.begin();
      now = it->first.first;
      auto f = std::move(it->second);
      q.erase(it);
      f();
    }
  }

  void start() {
    for (auto& b : bas) {
      BaCheckpointer* p = b.get();
      at(0.0, [this, p] { p->start_iteration(1, now); });
    }
  }

  NodeId leader_for(std::uint32_t i, std::uint32_t p) override { return leader(i, p); }
  void send_vote(NodeId from, const Vote& v) override {
    for (auto& b : bas) {
      if (b->id() == from) continue;
      BaCheckpointer* p = b.get();
      at(now + delay, [this, p, v] { p->on_vote(v, now); });
    }
  }
  void send_proposal(NodeId from, std::uint32_t i, std::uint32_t per, Value v) override {
    for (auto& b : bas) {
      if (b->id() == from) continue;
      BaCheckpointer* p = b.get();
      at(now + delay, [this, p, from, i, per, v] { p->on_proposal(from, i, per, v, now); });
    }
  }
  void schedule_step(NodeId node, SimTime t, std::uint64_t epoch, int step) override {
    // Ticks run after deliveries at the same instant.
    q.emplace(std::make_pair(t + 1e-12, seq++),
              [this, node, epoch, step] { bas[node]->on_step(epoch, step, now); });
  }
  void schedule_iteration(NodeId node, SimTime t, std::uint32_t iteration) override {
    if (iteration > stop_after_iteration) return;
    at(t, [this, node, iteration] { bas[node]->start_iteration(iteration, now); });
  }
  void on_halt(NodeId node, const Certificate& c, SimTime t) override {
    halts[node].push_back({t, c});
    nodes[node]->on_receive_checkpoint(c, t);
  }
  void on_period_start(NodeId node, std::uint32_t, std::uint32_t p, Value, Value,
                       SimTime t) override {
    periods[node].push_back({p, t});
  }
  void on_next_quorum(NodeId, std::uint32_t, std::uint32_t, Value, SimTime) override {}
};

}  // namespace

TEST_CASE("honest leader: everyone halts in period 1 within 6 delays") {
  Net net(4, 1, 20);
  net.start();
  net.run(100.0);
  for (NodeId id = 0; id < 4; ++id) {
    REQUIRE(net.halts[id].size() == 1);
    auto [t, c] = net.halts[id][0];
    CHECK(c.period == 1);
    CHECK(c.value == 20);
    CHECK(t <= 6.0 + 1e-9);
    CHECK(net.nodes[id]->last_checkpoint().block == 16);
    CHECK(net.periods[id].size() == 1);
  }
}

TEST_CASE("absent leader: the period advances on a bottom quorum by 8 delays") {
  Net net(4, 1, 20);
  net.leader = [](std::uint32_t, std::uint32_t p) { return p == 1 ? NodeId{99} : NodeId{2}; };
  net.start();
  net.run(100.0);
  for (NodeId id = 0; id < 4; ++id) {
    REQUIRE(net.periods[id].size() >= 2);
    CHECK(net.periods[id][1].first == 2);
    CHECK(net.periods[id][1].second <= 8.0 + 1e-9);
    REQUIRE(net.halts[id].size() == 1);
    CHECK(net.halts[id][0].second.period == 2);
    CHECK(net.halts[id][0].first - net.periods[id][1].second <= 6.0 + 1e-9);
  }
}

TEST_CASE("tolerates t silent members") {
  Net net(4, 1, 20);
  net.bas.pop_back();  // member 3 never votes
  net.start();
  net.run(100.0);
  for (NodeId id = 0; id < 3; ++id) CHECK(net.halts[id].size() == 1);
}

TEST_CASE("short chains propose nothing until long enough") {
  Net net(4, 1, 3);  // height 3 < depth 4
  net.start();
  net.run(30.0);
  CHECK(net.halts.empty());
  CHECK(net.periods[0].size() > 2);
  CHECK(net.bas[0]->input_value() == kBottom);
}

TEST_CASE("validity predicate") {
  Net net(4, 1, 20);
  BaCheckpointer& b = *net.bas[0];
  net.start();
  net.run(0.0);
  CHECK_FALSE(b.is_valid(kBottom));
  CHECK(b.is_valid(20));
  CHECK(b.is_valid(10));
  CHECK_FALSE(b.is_valid(3));  // too short for depth 4
  // Sibling branch unknown to the node.
  Block s;
  s.id = 21;
  s.parent = 12;
  net.tree.append(s);
  CHECK_FALSE(b.is_valid(21));
  net.nodes[0]->on_receive_chain(21);
  CHECK(b.is_valid(21));  // its 4-deep block 9 is on the entry chain
  BlockId prev = 12;
  for (BlockId id = 22; id < 28; ++id) {
    Block f;
    f.id = id;
    f.parent = id == 22 ? 12 : prev;
    net.tree.append(f);
    prev = id;
  }
  net.nodes[0]->on_receive_chain(27);
  CHECK_FALSE(b.is_valid(27));  // 4-deep block 23 is not on the entry chain
  Net loose(4, 1, 20, false);
  loose.start();
  loose.run(0.0);
  prev = 12;
  for (BlockId id = 21; id < 27; ++id) {
    Block f;
    f.id = id;
    f.parent = prev;
    loose.tree.append(f);
    prev = id;
  }
  loose.nodes[0]->on_receive_chain(26);
  CHECK(loose.bas[0]->is_valid(26));
}

TEST_CASE("a certificate received while waiting halts the next iteration") {
  Net net(4, 1, 20);
  net.stop_after_iteration = 2;
  net.start();
  net.run(10.0);
  BaCheckpointer& b = *net.bas[0];
  CHECK(b.iteration() == 2);
  CHECK_FALSE(b.started());
  Certificate c{2, 1, 20, {}};
  for (NodeId v = 1; v < 4; ++v) c.votes.push_back(Vote{VoteKind::cert, 20, 2, 1, v});
  b.on_certificate(c, 11.0);
  CHECK(b.iteration() == 3);
  CHECK(net.halts[0].size() == 2);
}
