#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "clc/ba_types.hpp"
#include "clc/block_tree.hpp"

namespace clc {

// Chooses among equally long candidate tips. `candidates` always holds at
// least one tip and contains `incumbent` when the current tip is eligible.
class TieBreakPolicy {
 public:
  virtual ~TieBreakPolicy() = default;
  virtual BlockId choose(NodeId node, BlockId incumbent,
                         std::span<const BlockId> candidates) = 0;
};

// Keeps the current tip when it is a candidate, else the lowest id.
class KeepIncumbent : public TieBreakPolicy {
 public:
  BlockId choose(NodeId node, BlockId incumbent,
                 std::span<const BlockId> candidates) override;
};

struct NodeParams {
  std::uint32_t k_prime = 12;
  std::uint32_t checkpoint_depth = 12;  // depth of the checkpoint in the agreed chain
  std::uint32_t quorum = 7;
  bool enforce_p2 = true;  // false: plain longest chain, checkpoints ignored
};

enum class CheckpointOutcome { applied, stale, buffered };

// A protocol participant's chain view. Blocks live in a shared universe
// tree; each node tracks which of them it has heard of.
class NodeState {
 public:
  NodeState(NodeId id, BlockTree* universe, NodeParams params,
            TieBreakPolicy* tie_break = nullptr);

  NodeId id() const { return id_; }
  const NodeParams& params() const { return params_; }
  bool online() const { return online_; }
  void set_online(bool v) { online_ = v; }

  bool knows(BlockId b) const { return b < known_.size() && known_[b]; }
  BlockId tip() const { return tip_; }
  std::uint32_t height() const;
  const Checkpoint& last_checkpoint() const { return history_.back(); }
  const std::vector<Checkpoint>& checkpoint_history() const { return history_; }
  const BlockTree& tree() const { return *universe_; }

  // Learns the chain ending at `tip`. `blocks` are inserted into the
  // universe first when not already present. Returns true iff the tip moved.
  bool on_receive_chain(BlockId tip, std::span<const Block> blocks = {});

  // Applies a certified checkpoint; the certificate's value chain must be
  // resolvable. The tip may move to a shorter chain.
  CheckpointOutcome on_receive_checkpoint(const Certificate& cert, SimTime now,
                                          std::span<const Block> chain = {});

  // New block on the current tip. The caller appends it to the universe
  // (with a fresh id) and broadcasts it.
  Block on_mine_opportunity(SimTime now, BlockId new_id) const;

  // Tips of the confirmed prefixes under the two rules.
  BlockId fin_tip() const { return last_checkpoint().block; }
  BlockId ada_tip() const;
  BlockId ada_tip(std::uint32_t k_prime) const;
  std::vector<BlockId> confirm_fin() const;
  std::vector<BlockId> confirm_ada() const;

  // Longest known chains containing the last checkpoint.
  std::vector<BlockId> best_tips() const;

 private:
  void learn(BlockId tip);
  void insert_blocks(std::span<const Block> blocks);
  bool eligible(BlockId b) const;
  void reselect_tip();
  void apply_checkpoint(const Certificate& cert, SimTime now);

  NodeId id_;
  BlockTree* universe_;
  NodeParams params_;
  TieBreakPolicy* tie_break_;
  std::vector<bool> known_;
  BlockId tip_ = kGenesis;
  std::vector<Checkpoint> history_;
  std::map<std::uint32_t, Certificate> pending_certs_;
  bool online_ = true;
};

}  // namespace clc
