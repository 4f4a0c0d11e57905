#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <tuple>
#include <vector>

#include "clc/ba.hpp"
#include "clc/config.hpp"
#include "clc/node.hpp"

namespace clc {

enum class MsgKind : std::uint8_t { chain = 0, vote = 1, proposal = 2, certificate = 3 };

struct Message {
  std::uint64_t id = 0;
  MsgKind kind = MsgKind::chain;
  NodeId origin = kNoNode;  // honest node or byzantine checkpointer; kAdversary for miner releases
  bool adversarial = false;
  SimTime sent = 0.0;
  BlockId tip = kNoBlock;       // chain
  Vote vote;                    // vote
  std::uint32_t iteration = 0;  // proposal
  std::uint32_t period = 0;     // proposal
  Value value = kBottom;        // proposal
  std::shared_ptr<const Certificate> cert;  // certificate
};

// What the event loop exposes to the adversary. All sends from the
// adversary reach their recipients with zero delay; honest recipients then
// relay under the network model.
class AdversaryContext {
 public:
  virtual ~AdversaryContext() = default;
  virtual SimTime now() const = 0;
  virtual const ScenarioConfig& config() const = 0;
  virtual const BlockTree& tree() const = 0;

  // Only valid inside on_mine_opportunity, at most once per opportunity.
  virtual BlockId mine(BlockId parent) = 0;
  // Empty `to` means every honest node.
  virtual void release_chain(BlockId tip, std::span<const NodeId> to) = 0;
  virtual void send_vote(const Vote& v, std::span<const NodeId> to) = 0;
  virtual void send_proposal(NodeId from, std::uint32_t iteration, std::uint32_t period,
                             Value v, std::span<const NodeId> to) = 0;
  virtual void wake_at(SimTime t, std::uint64_t token) = 0;

  virtual NodeId leader_for(std::uint32_t iteration, std::uint32_t period) = 0;
  virtual std::span<const NodeId> honest_nodes() const = 0;
  virtual std::span<const NodeId> honest_checkpointers() const = 0;
  virtual std::span<const NodeId> byzantine_checkpointers() const = 0;
  virtual bool is_byzantine(NodeId id) const = 0;
  virtual const NodeState& node(NodeId id) const = 0;
  // Number of honest nodes whose current tip is `tip`.
  virtual std::uint32_t holders(BlockId tip) const = 0;
  // Highest honest tip (lowest id among equals).
  virtual BlockId public_tip() const = 0;
  // Newest checkpoint block known to any honest node.
  virtual BlockId latest_checkpoint() const = 0;
  virtual std::uint32_t latest_checkpoint_iteration() const = 0;
};

class Adversary : public TieBreakPolicy {
 public:
  virtual void attach(AdversaryContext* ctx) { ctx_ = ctx; }
  virtual void on_start() {}
  virtual void on_mine_opportunity() {}
  // Every honest-originated message, at send time.
  virtual void on_observe(const Message&) {}
  // A byzantine checkpointer was chosen as leader.
  virtual void on_leader(std::uint32_t, std::uint32_t, NodeId) {}
  virtual void on_wake(std::uint64_t) {}
  // Scripted vote due now.
  virtual void on_script(std::size_t) {}

  BlockId choose(NodeId node, BlockId incumbent,
                 std::span<const BlockId> candidates) override;

 protected:
  AdversaryContext* ctx_ = nullptr;
};

// Builds the controller described by the config. Throws VariantRequired for
// strategies that only make sense against a protocol variant.
std::unique_ptr<Adversary> make_adversary(const ScenarioConfig& cfg);

// Tie-break picking the candidate held by the fewest honest nodes.
BlockId minority_tip(const AdversaryContext& ctx, std::span<const BlockId> candidates);

}  // namespace clc
