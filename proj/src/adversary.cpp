#include "clc/adversary.hpp"

#include <algorithm>

#include "clc/error.hpp"

namespace clc {

BlockId minority_tip(const AdversaryContext& ctx, std::span<const BlockId> candidates) {
  BlockId best = candidates.front();
  std::uint32_t best_n = ctx.holders(best);
  for (BlockId c : candidates) {
    std::uint32_t n = ctx.holders(c);
    if (n < best_n || (n == best_n && c < best)) {
      best = c;
      best_n = n;
    }
  }
  return best;
}

BlockId Adversary::choose(NodeId, BlockId, std::span<const BlockId> candidates) {
  return minority_tip(*ctx_, candidates);
}

namespace {

std::vector<BlockId> distinct_honest_tips(const AdversaryContext& ctx) {
  std::vector<BlockId> tips;
  for (NodeId id : ctx.honest_nodes()) tips.push_back(ctx.node(id).tip());
  std::sort(tips.begin(), tips.end());
  tips.erase(std::unique(tips.begin(), tips.end()), tips.end());
  return tips;
}

// Byzantine checkpointer behavior shared by the miner strategies.
class Checkpointers {
 public:
  explicit Checkpointers(std::string kind) : kind_(std::move(kind)) {}

  void on_observe(AdversaryContext& ctx, const Message& m) {
    if (kind_ != "equivocate" || m.kind != MsgKind::vote) return;
    const Vote& v = m.vote;
    echo(ctx, v.kind, v.iteration, v.period, v.value);
    if (v.kind == VoteKind::next) echo(ctx, VoteKind::next, v.iteration, v.period, kBottom);
  }

  void on_leader(AdversaryContext& ctx, std::uint32_t iteration, std::uint32_t period,
                 NodeId leader) {
    if (kind_ != "equivocate") return;
    const BlockTree& tree = ctx.tree();
    const std::uint32_t depth = ctx.config().checkpoint_depth();
    std::vector<BlockId> tips = distinct_honest_tips(ctx);
    std::sort(tips.begin(), tips.end(), [&](BlockId a, BlockId b) {
      auto ha = tree.at(a).height, hb = tree.at(b).height;
      return ha != hb ? ha > hb : a < b;
    });
    BlockId v1 = tips.front();
    BlockId v2 = tips.size() > 1 ? tips[1] : tree.at(v1).parent;
    if (v2 == kNoBlock) v2 = v1;
    auto cps = ctx.honest_checkpointers();
    std::size_t half = cps.size() / 2;
    if (tree.at(v1).height >= depth) {
      ctx.send_proposal(leader, iteration, period, v1, cps.subspan(0, half));
    }
    if (tree.at(v2).height >= depth) {
      ctx.send_proposal(leader, iteration, period, v2, cps.subspan(half));
    }
  }

  void on_script(AdversaryContext& ctx, std::size_t i) {
    if (kind_ != "scripted") return;
    ctx.send_vote(ctx.config().adversary.script.at(i), {});
  }

 private:
  void echo(AdversaryContext& ctx, VoteKind kind, std::uint32_t iteration,
            std::uint32_t period, Value value) {
    auto key = std::make_tuple(static_cast<std::uint8_t>(kind), iteration, period, value);
    if (!sent_.insert(key).second) return;
    for (NodeId voter : ctx.byzantine_checkpointers()) {
      ctx.send_vote(Vote{kind, value, iteration, period, voter}, {});
    }
  }

  std::string kind_;
  std::set<std::tuple<std::uint8_t, std::uint32_t, std::uint32_t, Value>> sent_;
};

class Controller : public Adversary {
 public:
  explicit Controller(const ScenarioConfig& cfg)
      : strategy_(cfg.adversary.strategy), cps_(cfg.adversary.checkpointers) {}

  void on_mine_opportunity() override {
    if (strategy_ == "private-chain") {
      private_chain();
    } else if (strategy_ == "balance") {
      balance();
    }
  }

  void on_observe(const Message& m) override { cps_.on_observe(*ctx_, m); }

  void on_leader(std::uint32_t iteration, std::uint32_t period, NodeId leader) override {
    cps_.on_leader(*ctx_, iteration, period, leader);
  }

  void on_script(std::size_t i) override { cps_.on_script(*ctx_, i); }

 private:
  void private_chain() {
    const BlockTree& tree = ctx_->tree();
    const ScenarioConfig& cfg = ctx_->config();
    const std::uint32_t fork_depth = cfg.adversary.fork_depth ? cfg.adversary.fork_depth
                                                              : cfg.k_prime + 1;
    const std::uint32_t give_up = cfg.adversary.give_up_deficit ? cfg.adversary.give_up_deficit
                                                                : 2 * fork_depth;
    BlockId pub = ctx_->public_tip();
    BlockId cp = ctx_->latest_checkpoint();
    if (active_) {
      bool dead = !is_descendant(tree, cp, private_tip_);
      bool hopeless = tree.at(pub).height > tree.at(private_tip_).height + give_up;
      if (dead || hopeless) active_ = false;
    }
    if (!active_) {
      std::uint32_t h = tree.at(pub).height;
      std::uint32_t floor_h = tree.at(cp).height;
      std::uint32_t base_h = h > floor_h + fork_depth ? h - fork_depth : floor_h;
      private_tip_ = tree.ancestor_at_height(pub, base_h);
      active_ = true;
    }
    private_tip_ = ctx_->mine(private_tip_);
    if (tree.at(private_tip_).height > tree.at(pub).height) {
      ctx_->release_chain(private_tip_, {});
      active_ = false;
    }
  }

  // Keeps honest nodes split across two equally long branches.
  void balance() {
    const BlockTree& tree = ctx_->tree();
    std::vector<BlockId> tips = distinct_honest_tips(*ctx_);
    std::uint32_t max_h = 0;
    for (BlockId t : tips) max_h = std::max(max_h, tree.at(t).height);
    std::vector<BlockId> recent;
    for (BlockId t : tips) {
      if (tree.at(t).height + 1 >= max_h) recent.push_back(t);
    }
    BlockId target;
    std::vector<NodeId> to;
    if (recent.size() >= 2) {
      // Extend the branch with the fewest holders among the recent ones,
      // preferring the one behind.
      target = recent.front();
      for (BlockId t : recent) {
        auto ht = tree.at(t).height, hb = tree.at(target).height;
        if (ht < hb || (ht == hb && ctx_->holders(t) < ctx_->holders(target))) target = t;
      }
      for (NodeId id : ctx_->honest_nodes()) {
        if (ctx_->node(id).tip() == target) to.push_back(id);
      }
    } else {
      // Open a sibling fork and show it to half of the honest nodes.
      target = tree.at(recent.front()).parent;
      if (target == kNoBlock || !is_descendant(tree, ctx_->latest_checkpoint(), target)) {
        target = recent.front();
      }
      auto honest = ctx_->honest_nodes();
      for (std::size_t i = 0; i < honest.size(); i += 2) to.push_back(honest[i]);
    }
    BlockId b = ctx_->mine(target);
    ctx_->release_chain(b, to);
  }

  std::string strategy_;
  Checkpointers cps_;
  bool active_ = false;
  BlockId private_tip_ = kGenesis;
};

// Locks honest checkpointers on value X by withholding byzantine votes,
// moves the honest chain onto an adversarial sibling S of X through the
// tie-break, and completes X's quorum once S is k-deep.
class GrandpaRollback : public Adversary {
 public:
  explicit GrandpaRollback(const ScenarioConfig& cfg) {
    if (!cfg.variant.checkpoint_depth_override) {
      throw Error(ErrorCode::VariantRequired,
                  "grandpa-rollback needs variant.checkpointDepthOverride");
    }
  }

  BlockId choose(NodeId, BlockId incumbent, std::span<const BlockId> candidates) override {
    if (phase_ != Phase::idle) {
      for (BlockId c : candidates) {
        if (is_descendant(ctx_->tree(), sibling_, c)) return c;
      }
    }
    if (std::find(candidates.begin(), candidates.end(), incumbent) != candidates.end()) {
      return incumbent;
    }
    return *std::min_element(candidates.begin(), candidates.end());
  }

  void on_mine_opportunity() override {
    const BlockTree& tree = ctx_->tree();
    BlockId pub = ctx_->public_tip();
    if (phase_ != Phase::idle) {
      // Help the sibling branch grow.
      if (is_descendant(tree, sibling_, pub)) {
        BlockId b = ctx_->mine(pub);
        ctx_->release_chain(b, {});
        check_depth();
      }
      return;
    }
    BlockId parent = tree.at(pub).parent;
    if (parent == kNoBlock || !is_descendant(tree, ctx_->latest_checkpoint(), parent)) return;
    if (siblings_.count(parent)) return;
    siblings_[parent] = ctx_->mine(parent);
  }

  void on_observe(const Message& m) override {
    switch (m.kind) {
      case MsgKind::proposal:
        if (phase_ == Phase::idle) try_lock(m);
        break;
      case MsgKind::vote:
        on_vote(m.vote);
        break;
      case MsgKind::chain:
        if (phase_ == Phase::locked) check_depth();
        break;
      case MsgKind::certificate:
        if (phase_ != Phase::idle && m.cert->iteration >= iteration_) phase_ = Phase::idle;
        break;
    }
  }

  void on_leader(std::uint32_t iteration, std::uint32_t period, NodeId leader) override {
    if (phase_ == Phase::released && iteration == iteration_) {
      ctx_->send_proposal(leader, iteration, period, value_, {});
    }
  }

 private:
  enum class Phase { idle, locked, released };

  void try_lock(const Message& m) {
    const BlockTree& tree = ctx_->tree();
    BlockId parent = tree.at(m.value).parent;
    auto it = siblings_.find(parent);
    if (parent == kNoBlock || it == siblings_.end() || it->second == m.value) return;
    phase_ = Phase::locked;
    iteration_ = m.iteration;
    period_ = m.period;
    value_ = m.value;
    sibling_ = it->second;
    siblings_.clear();
    ctx_->release_chain(sibling_, {});
  }

  void check_depth() {
    const BlockTree& tree = ctx_->tree();
    BlockId pub = ctx_->public_tip();
    if (!is_descendant(tree, sibling_, pub)) return;
    if (tree.at(pub).height < tree.at(sibling_).height + ctx_->config().k) return;
    phase_ = Phase::released;
    cast(VoteKind::soft, period_);
  }

  void on_vote(const Vote& v) {
    if (phase_ == Phase::idle) {
      // Let stalled periods rotate so another leader proposes.
      if (v.kind == VoteKind::next && v.value == kBottom) {
        cast_idle(v.iteration, v.period);
      }
      return;
    }
    if (phase_ == Phase::released && v.iteration == iteration_ && v.value == value_) {
      cast(v.kind, v.period);
    }
  }

  void cast(VoteKind kind, std::uint32_t period) {
    auto key = std::make_tuple(static_cast<std::uint8_t>(kind), iteration_, period, value_);
    if (!sent_.insert(key).second) return;
    for (NodeId voter : ctx_->byzantine_checkpointers()) {
      ctx_->send_vote(Vote{kind, value_, iteration_, period, voter}, {});
    }
  }

  void cast_idle(std::uint32_t iteration, std::uint32_t period) {
    auto key = std::make_tuple(static_cast<std::uint8_t>(VoteKind::next), iteration, period,
                               kBottom);
    if (!sent_.insert(key).second) return;
    for (NodeId voter : ctx_->byzantine_checkpointers()) {
      ctx_->send_vote(Vote{VoteKind::next, kBottom, iteration, period, voter}, {});
    }
  }

  Phase phase_ = Phase::idle;
  std::uint32_t iteration_ = 0;
  std::uint32_t period_ = 0;
  Value value_ = kBottom;
  BlockId sibling_ = kNoBlock;
  std::map<BlockId, BlockId> siblings_;  // parent -> withheld child
  std::set<std::tuple<std::uint8_t, std::uint32_t, std::uint32_t, Value>> sent_;
};

}  // namespace

std::unique_ptr<Adversary> make_adversary(const ScenarioConfig& cfg) {
  if (cfg.adversary.strategy == "grandpa-rollback") {
    return std::make_unique<GrandpaRollback>(cfg);
  }
  return std::make_unique<Controller>(cfg);
}

}  // namespace clc
