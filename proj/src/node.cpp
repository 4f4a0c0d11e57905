#include "clc/node.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "clc/error.hpp"

namespace clc {

bool certificate_valid(const Certificate& cert, std::uint32_t quorum) {
  if (cert.value == kBottom) return false;
  std::set<NodeId> voters;
  for (const Vote& v : cert.votes) {
    if (v.kind != VoteKind::cert || v.iteration != cert.iteration ||
        v.period != cert.period || v.value != cert.value) {
      return false;
    }
    voters.insert(v.voter);
  }
  return voters.size() >= quorum;
}

BlockId KeepIncumbent::choose(NodeId, BlockId incumbent,
                              std::span<const BlockId> candidates) {
  if (std::find(candidates.begin(), candidates.end(), incumbent) != candidates.end()) {
    return incumbent;
  }
  return *std::min_element(candidates.begin(), candidates.end());
}

namespace {
KeepIncumbent g_keep_incumbent;
}

NodeState::NodeState(NodeId id, BlockTree* universe, NodeParams params,
                     TieBreakPolicy* tie_break)
    : id_(id),
      universe_(universe),
      params_(params),
      tie_break_(tie_break ? tie_break : &g_keep_incumbent) {
  BlockId root = universe_->root();
  known_.assign(static_cast<std::size_t>(root) + 1, false);
  known_[root] = true;
  tip_ = root;
  history_.push_back(Checkpoint{0, root, 0.0});
}

std::uint32_t NodeState::height() const { return universe_->at(tip_).height; }

void NodeState::insert_blocks(std::span<const Block> blocks) {
  for (const Block& b : blocks) {
    if (universe_->contains(b.id)) continue;
    if (!universe_->contains(b.parent)) {
      throw Error(ErrorCode::DisconnectedChain,
                  "block " + std::to_string(b.id) + " has unknown parent");
    }
    universe_->append(b);
  }
}

void NodeState::learn(BlockId tip) {
  if (!universe_->contains(tip)) {
    throw Error(ErrorCode::DisconnectedChain, "tip " + std::to_string(tip));
  }
  if (known_.size() < universe_->next_id()) known_.resize(universe_->next_id(), false);
  BlockId b = tip;
  while (b != kNoBlock && !known_[b]) {
    known_[b] = true;
    b = universe_->at(b).parent;
  }
}

bool NodeState::eligible(BlockId b) const {
  return !params_.enforce_p2 || is_descendant(*universe_, last_checkpoint().block, b);
}

bool NodeState::on_receive_chain(BlockId tip, std::span<const Block> blocks) {
  insert_blocks(blocks);
  learn(tip);
  if (tip == tip_ || !eligible(tip)) return false;
  std::uint32_t h = universe_->at(tip).height;
  std::uint32_t cur = height();
  if (h > cur) {
    tip_ = tip;
    return true;
  }
  if (h == cur) {
    BlockId cands[2] = {tip_, tip};
    BlockId chosen = tie_break_->choose(id_, tip_, cands);
    if (chosen != tip_) {
      tip_ = chosen;
      return true;
    }
  }
  return false;
}

std::vector<BlockId> NodeState::best_tips() const {
  BlockId start = params_.enforce_p2 ? last_checkpoint().block : universe_->root();
  std::vector<BlockId> best;
  std::uint32_t best_h = 0;
  std::vector<BlockId> stack{start};
  while (!stack.empty()) {
    BlockId b = stack.back();
    stack.pop_back();
    bool leaf = true;
    for (BlockId c : universe_->children(b)) {
      if (knows(c)) {
        stack.push_back(c);
        leaf = false;
      }
    }
    if (!leaf) continue;
    std::uint32_t h = universe_->at(b).height;
    if (best.empty() || h > best_h) {
      best.assign(1, b);
      best_h = h;
    } else if (h == best_h) {
      best.push_back(b);
    }
  }
  std::sort(best.begin(), best.end());
  return best;
}

void NodeState::reselect_tip() {
  std::vector<BlockId> best = best_tips();
  if (best.size() == 1) {
    tip_ = best[0];
  } else {
    tip_ = tie_break_->choose(id_, tip_, best);
  }
}

void NodeState::apply_checkpoint(const Certificate& cert, SimTime now) {
  BlockId cp = block_at_depth(*universe_, Chain{cert.value}, params_.checkpoint_depth);
  if (!is_descendant(*universe_, last_checkpoint().block, cp)) {
    throw Error(ErrorCode::NonMonotoneCheckpoint,
                "iteration " + std::to_string(cert.iteration) + " block " +
                    std::to_string(cp) + " does not extend " +
                    std::to_string(last_checkpoint().block));
  }
  history_.push_back(Checkpoint{cert.iteration, cp, now});
  if (params_.enforce_p2) reselect_tip();
}

CheckpointOutcome NodeState::on_receive_checkpoint(const Certificate& cert, SimTime now,
                                                   std::span<const Block> chain) {
  if (!certificate_valid(cert, params_.quorum)) {
    throw Error(ErrorCode::BadCertificate,
                "iteration " + std::to_string(cert.iteration));
  }
  insert_blocks(chain);
  learn(cert.value);
  if (cert.iteration <= last_checkpoint().iteration ||
      pending_certs_.count(cert.iteration)) {
    return CheckpointOutcome::stale;
  }
  if (cert.iteration > last_checkpoint().iteration + 1) {
    pending_certs_.emplace(cert.iteration, cert);
    return CheckpointOutcome::buffered;
  }
  apply_checkpoint(cert, now);
  for (auto it = pending_certs_.begin(); it != pending_certs_.end();) {
    if (it->first <= last_checkpoint().iteration) {
      it = pending_certs_.erase(it);
    } else if (it->first == last_checkpoint().iteration + 1) {
      Certificate next = it->second;
      pending_certs_.erase(it);
      apply_checkpoint(next, now);
      it = pending_certs_.begin();
    } else {
      break;
    }
  }
  return CheckpointOutcome::applied;
}

Block NodeState::on_mine_opportunity(SimTime now, BlockId new_id) const {
  if (!online_) {
    throw Error(ErrorCode::Offline, "node " + std::to_string(id_));
  }
  Block b;
  b.id = new_id;
  b.parent = tip_;
  b.height = height() + 1;
  b.mine_time = now;
  b.miner = id_;
  b.miner_kind = MinerKind::honest;
  return b;
}

BlockId NodeState::ada_tip() const { return ada_tip(params_.k_prime); }

BlockId NodeState::ada_tip(std::uint32_t k_prime) const {
  return drop_last(*universe_, Chain{tip_}, k_prime).tip;
}

std::vector<BlockId> NodeState::confirm_fin() const {
  return chain_blocks(*universe_, Chain{fin_tip()});
}

std::vector<BlockId> NodeState::confirm_ada() const {
  return chain_blocks(*universe_, Chain{ada_tip()});
}

}  // namespace clc
