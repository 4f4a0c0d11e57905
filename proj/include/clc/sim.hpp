#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include "clc/adversary.hpp"
#include "clc/ba.hpp"
#include "clc/config.hpp"
#include "clc/node.hpp"
#include "clc/trace.hpp"

namespace clc {

// splitmix64 step; used to derive independent RNG streams from the seed.
std::uint64_t splitmix64(std::uint64_t x);

// Exponential variate with the given rate, from a 64-bit engine. Written
// out so that results do not depend on the standard library's distribution.
double sample_exponential(std::mt19937_64& rng, double rate);
double sample_unit(std::mt19937_64& rng);  // [0, 1)

// Event ordering: time, then kind priority, then insertion order.
enum class EventType : std::uint8_t {
  online_change = 0,
  churn = 1,
  deliver = 2,
  adversary_wake = 3,
  script_vote = 4,
  mine_honest = 5,
  mine_adversary = 6,
  iteration_start = 7,
  step = 8,
};

struct SimEvent {
  SimTime time = 0.0;
  std::uint8_t priority = 0;
  std::uint64_t seq = 0;
  EventType type = EventType::deliver;
  NodeId node = kNoNode;
  std::uint64_t a = 0;
  std::uint32_t b = 0;
};

struct EventLater {
  bool operator()(const SimEvent& x, const SimEvent& y) const {
    if (x.time != y.time) return x.time > y.time;
    if (x.priority != y.priority) return x.priority > y.priority;
    return x.seq > y.seq;
  }
};

class EventQueue {
 public:
  void push(SimEvent ev);
  bool empty() const { return q_.empty(); }
  const SimEvent& top() const { return q_.top(); }
  SimEvent pop();
  std::size_t size() const { return q_.size(); }

 private:
  std::priority_queue<SimEvent, std::vector<SimEvent>, EventLater> q_;
  std::uint64_t seq_ = 0;
};

class Simulation : public AdversaryContext, public BaEnv {
 public:
  explicit Simulation(const ScenarioConfig& cfg);
  ~Simulation() override;

  Trace run();

  // AdversaryContext
  SimTime now() const override { return now_; }
  const ScenarioConfig& config() const override { return cfg_; }
  const BlockTree& tree() const override { return universe_; }
  BlockId mine(BlockId parent) override;
  void release_chain(BlockId tip, std::span<const NodeId> to) override;
  void send_vote(const Vote& v, std::span<const NodeId> to) override;
  void send_proposal(NodeId from, std::uint32_t iteration, std::uint32_t period, Value v,
                     std::span<const NodeId> to) override;
  void wake_at(SimTime t, std::uint64_t token) override;
  NodeId leader_for(std::uint32_t iteration, std::uint32_t period) override;
  std::span<const NodeId> honest_nodes() const override { return honest_ids_; }
  std::span<const NodeId> honest_checkpointers() const override { return honest_cp_ids_; }
  std::span<const NodeId> byzantine_checkpointers() const override { return byz_ids_; }
  bool is_byzantine(NodeId id) const override;
  const NodeState& node(NodeId id) const override { return *nodes_.at(id); }
  std::uint32_t holders(BlockId tip) const override;
  BlockId public_tip() const override;
  BlockId latest_checkpoint() const override;
  std::uint32_t latest_checkpoint_iteration() const override;

  // BaEnv
  void send_vote(NodeId from, const Vote& v) override;
  void send_proposal(NodeId from, std::uint32_t iteration, std::uint32_t period,
                     Value v) override;
  void schedule_step(NodeId node, SimTime at, std::uint64_t epoch, int step) override;
  void schedule_iteration(NodeId node, SimTime at, std::uint32_t iteration) override;
  void on_halt(NodeId node, const Certificate& cert, SimTime now) override;
  void on_period_start(NodeId node, std::uint32_t iteration, std::uint32_t period, Value st,
                       Value vi, SimTime now) override;
  void on_next_quorum(NodeId node, std::uint32_t iteration, std::uint32_t period, Value v,
                      SimTime now) override;

  const BaCheckpointer* ba(NodeId id) const;

 private:
  struct Inflight {
    Message msg;
    std::vector<SimTime> scheduled;   // per honest node
    std::vector<std::uint8_t> state;  // 0 none, 1 received, 2 pending while offline
    std::vector<NodeId> from;         // relay that produced the scheduled delivery
    std::vector<SimTime> sent;        // its send time
    std::uint32_t remaining = 0;      // honest nodes yet to receive
  };

  bool is_honest(NodeId id) const { return id >= 0 && id < static_cast<NodeId>(n_honest_); }
  bool is_checkpointer(NodeId id) const;
  SimTime honest_delivery_time(NodeId from, NodeId to, SimTime sent);
  Inflight& new_message(Message m);
  void broadcast_honest(std::uint64_t msg_id, NodeId from);
  void deliver_now(std::uint64_t msg_id, std::span<const NodeId> to);
  void handle(const SimEvent& ev);
  void handle_delivery(NodeId node, std::uint64_t msg_id, bool deferred);
  void process(NodeId node, const Message& m);
  void mine_honest();
  void mine_adversary();
  void churn();
  void set_online(NodeId node, bool on);
  void sync_node(NodeId node);
  void apply_certificate(NodeId node, const Certificate& cert);
  void schedule_next_mining(EventType type, double rate, std::mt19937_64& rng);
  void push(SimTime t, EventType type, NodeId node = kNoNode, std::uint64_t a = 0,
            std::uint32_t b = 0);

  ScenarioConfig cfg_;
  Trace trace_;
  BlockTree universe_;
  EventQueue queue_;
  SimTime now_ = 0.0;
  SimTime horizon_ = 0.0;
  SimTime end_ = 0.0;
  bool mining_open_ = true;

  std::uint32_t n_honest_ = 0;
  std::vector<NodeId> honest_ids_, honest_cp_ids_, byz_ids_, miner_ids_;
  std::vector<std::unique_ptr<NodeState>> nodes_;          // honest only
  std::vector<std::unique_ptr<BaCheckpointer>> ba_;        // indexed by honest id
  std::vector<std::uint8_t> group_;                        // partition group
  std::vector<std::vector<std::uint64_t>> pending_;        // offline inboxes
  std::vector<std::uint8_t> scheduled_online_;             // explicit schedule present

  std::vector<Inflight> messages_;
  std::unique_ptr<Adversary> adversary_;
  bool in_adv_opportunity_ = false;
  bool adv_mined_ = false;

  std::map<std::pair<std::uint32_t, std::uint32_t>, NodeId> leaders_;
  std::map<std::tuple<NodeId, std::uint32_t, std::uint32_t, std::uint8_t>, Value> byz_votes_;

  struct Shadow {
    BlockId tip = kGenesis;
    std::size_t checkpoints = 1;
    BlockId fin = kGenesis;
    BlockId ada = kGenesis;
  };
  std::vector<Shadow> shadow_;
  std::map<BlockId, std::uint32_t> holder_count_;

  std::mt19937_64 rng_honest_mining_, rng_adv_mining_, rng_assign_, rng_delay_, rng_churn_;
};

// Runs one scenario to completion.
Trace run_scenario(const ScenarioConfig& cfg);

}  // namespace clc
