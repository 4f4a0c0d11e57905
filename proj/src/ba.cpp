#include "clc/ba.hpp"

#include "clc/error.hpp"

namespace clc {

bool VoteBook::add(const Vote& v) {
  auto& voters = voters_[{static_cast<std::uint8_t>(v.kind), v.period, v.value}];
  return voters.insert(v.voter).second;
}

std::size_t VoteBook::count(VoteKind kind, std::uint32_t period, Value value) const {
  auto it = voters_.find({static_cast<std::uint8_t>(kind), period, value});
  return it == voters_.end() ? 0 : it->second.size();
}

std::vector<Value> VoteBook::quorum_values(VoteKind kind, std::uint32_t period,
                                           std::uint32_t quorum) const {
  std::vector<Value> out;
  auto k = static_cast<std::uint8_t>(kind);
  for (auto it = voters_.lower_bound({k, period, 0});
       it != voters_.end() && std::get<0>(it->first) == k &&
       std::get<1>(it->first) == period;
       ++it) {
    if (it->second.size() >= quorum) out.push_back(std::get<2>(it->first));
  }
  return out;
}

std::optional<std::uint32_t> VoteBook::max_quorum_period(VoteKind kind,
                                                         std::uint32_t quorum) const {
  std::optional<std::uint32_t> best;
  auto k = static_cast<std::uint8_t>(kind);
  for (auto it = voters_.lower_bound({k, 0, 0});
       it != voters_.end() && std::get<0>(it->first) == k; ++it) {
    if (it->second.size() >= quorum) best = std::get<1>(it->first);
  }
  return best;
}

BaCheckpointer::BaCheckpointer(NodeId id, BaConfig cfg, NodeState* node, BaEnv* env)
    : id_(id), cfg_(cfg), node_(node), env_(env) {}

const VoteBook& BaCheckpointer::book(std::uint32_t iteration) const {
  static const VoteBook empty;
  auto it = books_.find(iteration);
  return it == books_.end() ? empty : it->second;
}

bool BaCheckpointer::bottom_quorum_prev() const {
  if (period_ < 2) return false;
  return book(iteration_).has_quorum(VoteKind::next, period_ - 1, kBottom, cfg_.quorum);
}

void BaCheckpointer::start_iteration(std::uint32_t iteration, SimTime now) {
  if (iteration != iteration_ || started_) return;
  if (!node_->online()) {
    deferred_iteration_ = iteration;
    return;
  }
  deferred_iteration_.reset();
  started_ = true;
  start_period(1, kBottom, now);
  evaluate(now);
}

void BaCheckpointer::start_period(std::uint32_t p, Value st, SimTime now) {
  period_ = p;
  period_start_ = now;
  st_ = st;
  entry_tip_ = node_->tip();
  vi_ = node_->height() >= cfg_.depth ? entry_tip_ : kBottom;
  step1_done_ = step2_done_ = step4_done_ = false;
  soft_voted_.reset();
  cert_voted_.reset();
  next_voted_.clear();
  env_->on_period_start(id_, iteration_, period_, st_, vi_, now);
  schedule_steps(now);
  step1(now);
}

void BaCheckpointer::schedule_steps(SimTime now) {
  ++epoch_;
  if (!step2_done_) env_->schedule_step(id_, now + 2 * cfg_.delta, epoch_, 2);
  if (!step4_done_) env_->schedule_step(id_, now + 4 * cfg_.delta, epoch_, 4);
}

void BaCheckpointer::resume(SimTime now) {
  if (deferred_iteration_) {
    std::uint32_t it = *deferred_iteration_;
    start_iteration(it, now);
    return;
  }
  if (!started_) return;
  period_start_ = now;
  schedule_steps(now);
  if (!step1_done_) step1(now);
  evaluate(now);
}

void BaCheckpointer::step1(SimTime now) {
  step1_done_ = true;
  if (env_->leader_for(iteration_, period_) != id_) return;
  Value proposal = (period_ == 1 || st_ == kBottom) ? vi_ : st_;
  if (proposal == kBottom) return;  // chain not yet k+1 long
  env_->send_proposal(id_, iteration_, period_, proposal);
  proposals_.emplace(std::make_pair(iteration_, period_), proposal);
}

void BaCheckpointer::step2(SimTime now) {
  step2_done_ = true;
  if (period_ == 1 || st_ == kBottom) {
    auto it = proposals_.find({iteration_, period_});
    if (it == proposals_.end()) return;
    Value v = it->second;
    bool backed = period_ >= 2 &&
                  book(iteration_).has_quorum(VoteKind::next, period_ - 1, v, cfg_.quorum);
    if (backed || is_valid(v)) vote(VoteKind::soft, v, now);
  } else {
    vote(VoteKind::soft, st_, now);
  }
}

void BaCheckpointer::step4(SimTime now) {
  step4_done_ = true;
  if (cert_voted_) {
    vote(VoteKind::next, *cert_voted_, now);
  } else if (bottom_quorum_prev()) {
    vote(VoteKind::next, kBottom, now);
  } else {
    vote(VoteKind::next, st_, now);
  }
}

void BaCheckpointer::vote(VoteKind kind, Value v, SimTime now) {
  Vote out{kind, v, iteration_, period_, id_};
  if (kind == VoteKind::soft) soft_voted_ = v;
  if (kind == VoteKind::cert) cert_voted_ = v;
  if (kind == VoteKind::next) next_voted_.insert(v);
  cur_book().add(out);
  env_->send_vote(id_, out);
  (void)now;
}

bool BaCheckpointer::is_valid(Value proposal) const {
  if (proposal == kBottom) return false;
  const BlockTree& tree = node_->tree();
  if (!node_->knows(proposal)) return false;
  if (tree.at(proposal).height < cfg_.depth) return false;
  BlockId b = block_at_depth(tree, Chain{proposal}, cfg_.depth);
  if (!is_descendant(tree, node_->last_checkpoint().block, b)) return false;
  if (cfg_.check_containment && !is_descendant(tree, b, entry_tip_)) return false;
  return true;
}

void BaCheckpointer::on_step(std::uint64_t epoch, int step, SimTime now) {
  if (!started_ || epoch != epoch_) return;
  if (step == 2 && !step2_done_) step2(now);
  if (step == 4 && !step4_done_) step4(now);
  evaluate(now);
}

void BaCheckpointer::on_vote(const Vote& v, SimTime now) {
  if (v.iteration < iteration_) return;
  books_[v.iteration].add(v);
  if (v.iteration == iteration_) evaluate(now);
}

void BaCheckpointer::on_proposal(NodeId from, std::uint32_t iteration,
                                 std::uint32_t period, Value v, SimTime now) {
  (void)now;
  if (iteration < iteration_) return;
  if (env_->leader_for(iteration, period) != from) return;
  proposals_.emplace(std::make_pair(iteration, period), v);
}

void BaCheckpointer::on_certificate(const Certificate& cert, SimTime now) {
  if (cert.iteration < iteration_) return;
  VoteBook& b = books_[cert.iteration];
  for (const Vote& v : cert.votes) b.add(v);
  if (cert.iteration == iteration_) evaluate(now);
}

bool BaCheckpointer::try_halt(SimTime now) {
  const VoteBook& b = book(iteration_);
  for (const auto& [key, voters] : b.entries()) {
    if (std::get<0>(key) != static_cast<std::uint8_t>(VoteKind::cert)) continue;
    if (voters.size() < cfg_.quorum || std::get<2>(key) == kBottom) continue;
    Certificate cert;
    cert.iteration = iteration_;
    cert.period = std::get<1>(key);
    cert.value = std::get<2>(key);
    for (NodeId voter : voters) {
      cert.votes.push_back(Vote{VoteKind::cert, cert.value, iteration_, cert.period, voter});
    }
    std::uint32_t done = iteration_;
    ++iteration_;
    started_ = false;
    deferred_iteration_.reset();
    ++epoch_;
    books_.erase(books_.begin(), books_.lower_bound(iteration_));
    proposals_.erase(proposals_.begin(), proposals_.lower_bound({iteration_, 0}));
    env_->on_halt(id_, cert, now);
    env_->schedule_iteration(id_, now + cfg_.e, done + 1);
    return true;
  }
  return false;
}

bool BaCheckpointer::try_advance(SimTime now) {
  const VoteBook& b = book(iteration_);
  auto q = b.max_quorum_period(VoteKind::next, cfg_.quorum);
  if (!q || *q < period_) return false;
  std::vector<Value> vals = b.quorum_values(VoteKind::next, *q, cfg_.quorum);
  Value v = vals.front();  // ⊥ sorts last, so any non-⊥ quorum wins
  env_->on_next_quorum(id_, iteration_, *q, v, now);
  start_period(*q + 1, v, now);
  return true;
}

void BaCheckpointer::windows(SimTime now) {
  const VoteBook& b = book(iteration_);
  if (step2_done_ && !step4_done_ && !cert_voted_) {
    for (Value v : b.quorum_values(VoteKind::soft, period_, cfg_.quorum)) {
      if (v == kBottom) continue;
      vote(VoteKind::cert, v, now);
      break;
    }
  }
  if (step4_done_) {
    for (Value v : b.quorum_values(VoteKind::soft, period_, cfg_.quorum)) {
      if (v != kBottom && !next_voted_.count(v)) vote(VoteKind::next, v, now);
    }
    if (!cert_voted_ && bottom_quorum_prev() && !next_voted_.count(kBottom)) {
      vote(VoteKind::next, kBottom, now);
    }
  }
}

void BaCheckpointer::evaluate(SimTime now) {
  for (int guard = 0; guard < 10000; ++guard) {
    if (try_halt(now)) return;
    if (!started_) return;
    if (try_advance(now)) continue;
    std::size_t before = cur_book().entries().size();
    auto cv = cert_voted_;
    auto nv = next_voted_.size();
    windows(now);
    if (cv == cert_voted_ && nv == next_voted_.size() &&
        before == cur_book().entries().size()) {
      return;
    }
  }
}

}  // namespace clc
