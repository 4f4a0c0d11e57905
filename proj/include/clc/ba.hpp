#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "clc/ba_types.hpp"
#include "clc/node.hpp"

namespace clc {

struct BaConfig {
  std::uint32_t n = 10;
  std::uint32_t t = 3;
  std::uint32_t quorum = 7;  // 2t+1
  std::uint32_t depth = 12;  // checkpoint depth in the agreed chain
  bool check_containment = true;  // third VALID condition
  SimTime delta = 1.0;
  SimTime e = 320.0;
};

// Votes of one iteration. Each voter counts once per (kind, period, value);
// conflicting votes from one voter are all kept.
class VoteBook {
 public:
  // Returns false when this exact vote was already present.
  bool add(const Vote& v);
  std::size_t count(VoteKind kind, std::uint32_t period, Value value) const;
  bool has_quorum(VoteKind kind, std::uint32_t period, Value value,
                  std::uint32_t quorum) const {
    return count(kind, period, value) >= quorum;
  }
  // Values holding a quorum for (kind, period), ascending, ⊥ last.
  std::vector<Value> quorum_values(VoteKind kind, std::uint32_t period,
                                   std::uint32_t quorum) const;
  // Highest period with any quorum of `kind`, if any.
  std::optional<std::uint32_t> max_quorum_period(VoteKind kind,
                                                 std::uint32_t quorum) const;
  // Every distinct (kind, period, value) key with its voters.
  const std::map<std::tuple<std::uint8_t, std::uint32_t, Value>, std::set<NodeId>>&
  entries() const {
    return voters_;
  }

 private:
  std::map<std::tuple<std::uint8_t, std::uint32_t, Value>, std::set<NodeId>> voters_;
};

// Hooks the event loop provides to an honest checkpointer.
class BaEnv {
 public:
  virtual ~BaEnv() = default;
  virtual NodeId leader_for(std::uint32_t iteration, std::uint32_t period) = 0;
  virtual void send_vote(NodeId from, const Vote& v) = 0;
  virtual void send_proposal(NodeId from, std::uint32_t iteration, std::uint32_t period,
                             Value v) = 0;
  virtual void schedule_step(NodeId node, SimTime at, std::uint64_t epoch, int step) = 0;
  virtual void schedule_iteration(NodeId node, SimTime at, std::uint32_t iteration) = 0;
  virtual void on_halt(NodeId node, const Certificate& cert, SimTime now) = 0;
  virtual void on_period_start(NodeId node, std::uint32_t iteration, std::uint32_t period,
                               Value st, Value vi, SimTime now) = 0;
  virtual void on_next_quorum(NodeId node, std::uint32_t iteration, std::uint32_t period,
                              Value v, SimTime now) = 0;
};

class BaCheckpointer {
 public:
  BaCheckpointer(NodeId id, BaConfig cfg, NodeState* node, BaEnv* env);

  NodeId id() const { return id_; }
  std::uint32_t iteration() const { return iteration_; }
  std::uint32_t period() const { return period_; }
  bool started() const { return started_; }
  bool halted() const { return halted_; }
  SimTime period_start() const { return period_start_; }
  Value starting_value() const { return st_; }
  Value input_value() const { return vi_; }
  std::optional<Value> cert_voted() const { return cert_voted_; }
  const VoteBook& book(std::uint32_t iteration) const;

  void start_iteration(std::uint32_t iteration, SimTime now);
  void on_step(std::uint64_t epoch, int step, SimTime now);
  void on_vote(const Vote& v, SimTime now);
  void on_proposal(NodeId from, std::uint32_t iteration, std::uint32_t period, Value v,
                   SimTime now);
  void on_certificate(const Certificate& cert, SimTime now);
  // Called when the node comes back online; restarts the current period's
  // timers without repeating votes already cast.
  void resume(SimTime now);
  // Iteration start was due while offline.
  void defer_iteration(std::uint32_t iteration) { deferred_iteration_ = iteration; }

  bool is_valid(Value proposal) const;

 private:
  void start_period(std::uint32_t p, Value st, SimTime now);
  void schedule_steps(SimTime now);
  void step1(SimTime now);
  void step2(SimTime now);
  void step4(SimTime now);
  void evaluate(SimTime now);
  bool try_halt(SimTime now);
  bool try_advance(SimTime now);
  void windows(SimTime now);
  void vote(VoteKind kind, Value v, SimTime now);
  VoteBook& cur_book() { return books_[iteration_]; }
  bool bottom_quorum_prev() const;

  NodeId id_;
  BaConfig cfg_;
  NodeState* node_;
  BaEnv* env_;

  std::uint32_t iteration_ = 1;
  bool started_ = false;
  bool halted_ = false;
  std::uint32_t period_ = 0;
  SimTime period_start_ = 0.0;
  std::uint64_t epoch_ = 0;
  Value st_ = kBottom;
  Value vi_ = kBottom;
  BlockId entry_tip_ = kGenesis;
  bool step1_done_ = false;
  bool step2_done_ = false;
  bool step4_done_ = false;
  std::optional<Value> soft_voted_;
  std::optional<Value> cert_voted_;
  std::set<Value> next_voted_;
  std::optional<std::uint32_t> deferred_iteration_;

  std::map<std::uint32_t, VoteBook> books_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, Value> proposals_;
};

}  // namespace clc
