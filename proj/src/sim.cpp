#include "clc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "clc/error.hpp"

namespace clc {
namespace {

constexpr SimTime kNever = std::numeric_limits<SimTime>::infinity();

std::uint8_t priority_of(EventType t) { return static_cast<std::uint8_t>(t); }

std::int64_t value_field(Value v) { return v == kBottom ? -1 : static_cast<std::int64_t>(v); }

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double sample_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double sample_exponential(std::mt19937_64& rng, double rate) {
  return -std::log1p(-sample_unit(rng)) / rate;
}

void EventQueue::push(SimEvent ev) {
  ev.seq = seq_++;
  q_.push(ev);
}

SimEvent EventQueue::pop() {
  SimEvent ev = q_.top();
  q_.pop();
  return ev;
}

Simulation::Simulation(const ScenarioConfig& cfg) : cfg_(cfg) {
  validate(cfg_);
  universe_ = BlockTree::with_genesis();
  const std::uint32_t hc = cfg_.honest_checkpointers();
  n_honest_ = cfg_.n_miners + hc;
  for (std::uint32_t i = 0; i < n_honest_; ++i) honest_ids_.push_back(static_cast<NodeId>(i));
  for (std::uint32_t i = 0; i < cfg_.n_miners; ++i) miner_ids_.push_back(static_cast<NodeId>(i));
  for (std::uint32_t i = 0; i < hc; ++i) {
    honest_cp_ids_.push_back(static_cast<NodeId>(cfg_.n_miners + i));
  }
  for (std::uint32_t i = 0; i < cfg_.byzantine_checkpointers; ++i) {
    byz_ids_.push_back(static_cast<NodeId>(n_honest_ + i));
  }

  adversary_ = make_adversary(cfg_);
  adversary_->attach(this);
  TieBreakPolicy* tie = nullptr;
  if (cfg_.adversary.tie_break == "adversarial" || cfg_.adversary.strategy == "grandpa-rollback") {
    tie = adversary_.get();
  }

  NodeParams np;
  np.k_prime = cfg_.k_prime;
  np.checkpoint_depth = cfg_.checkpoint_depth();
  np.quorum = cfg_.quorum();
  np.enforce_p2 = cfg_.variant.enforce_p2;
  BaConfig bc;
  bc.n = cfg_.n_checkpointers;
  bc.t = cfg_.t();
  bc.quorum = cfg_.quorum();
  bc.depth = cfg_.checkpoint_depth();
  bc.check_containment = cfg_.variant.enforce_p3;
  bc.delta = cfg_.delta;
  bc.e = cfg_.e_delta() * cfg_.delta;

  for (NodeId id : honest_ids_) {
    nodes_.push_back(std::make_unique<NodeState>(id, &universe_, np, tie));
  }
  ba_.resize(n_honest_);
  for (NodeId id : honest_cp_ids_) {
    ba_[id] = std::make_unique<BaCheckpointer>(id, bc, nodes_[id].get(), this);
  }

  group_.assign(n_honest_, 0);
  auto in_a = [&](std::uint32_t i, std::uint32_t n) {
    return i < static_cast<std::uint32_t>(std::lround(cfg_.network.partition_fraction * n));
  };
  for (std::uint32_t i = 0; i < cfg_.n_miners; ++i) group_[i] = in_a(i, cfg_.n_miners) ? 0 : 1;
  for (std::uint32_t i = 0; i < hc; ++i) group_[cfg_.n_miners + i] = in_a(i, hc) ? 0 : 1;

  pending_.resize(n_honest_);
  scheduled_online_.assign(n_honest_, 0);
  for (const auto& iv : cfg_.participation.schedule) {
    if (is_honest(iv.node)) scheduled_online_[iv.node] = 1;
  }
  shadow_.resize(n_honest_);
  holder_count_[kGenesis] = n_honest_;

  const std::uint64_t s = cfg_.seed;
  rng_honest_mining_.seed(splitmix64(s ^ 0x1111));
  rng_adv_mining_.seed(splitmix64(s ^ 0x2222));
  rng_assign_.seed(splitmix64(s ^ 0x3333));
  rng_delay_.seed(splitmix64(s ^ 0x4444));
  rng_churn_.seed(splitmix64(s ^ 0x5555));
}

Simulation::~Simulation() = default;

bool Simulation::is_byzantine(NodeId id) const {
  return id >= static_cast<NodeId>(n_honest_) &&
         id < static_cast<NodeId>(n_honest_ + cfg_.byzantine_checkpointers);
}

bool Simulation::is_checkpointer(NodeId id) const {
  return is_honest(id) && ba_[id] != nullptr;
}

const BaCheckpointer* Simulation::ba(NodeId id) const {
  return is_honest(id) ? ba_[id].get() : nullptr;
}

void Simulation::push(SimTime t, EventType type, NodeId node, std::uint64_t a, std::uint32_t b) {
  SimEvent ev;
  ev.time = t;
  ev.priority = priority_of(type);
  ev.type = type;
  ev.node = node;
  ev.a = a;
  ev.b = b;
  queue_.push(ev);
}

void Simulation::schedule_next_mining(EventType type, double rate, std::mt19937_64& rng) {
  if (rate <= 0) return;
  SimTime t = now_ + sample_exponential(rng, rate);
  if (t < horizon_) push(t, type);
}

Trace Simulation::run() {
  trace_ = Trace{};
  trace_.config = config_to_json(cfg_);
  trace_.seed = cfg_.seed;
  horizon_ = cfg_.horizon();
  end_ = horizon_ + cfg_.flush * cfg_.delta;
  now_ = 0.0;

  if (end_ > 0) {
    // Participation.
    const auto& part = cfg_.participation;
    for (const auto& iv : part.schedule) {
      if (!is_honest(iv.node)) continue;
      push(iv.from, EventType::online_change, iv.node, 0, 1);
      push(iv.to, EventType::online_change, iv.node, 0, 0);
    }
    for (NodeId id : honest_ids_) {
      if (scheduled_online_[id]) {
        nodes_[id]->set_online(false);
        trace_.add(0.0, RecordKind::offline, id);
      }
    }
    if (part.mode == "U2") {
      if (part.online_checkpointers >= 0) {
        for (std::size_t i = static_cast<std::size_t>(part.online_checkpointers);
             i < honest_cp_ids_.size(); ++i) {
          NodeId id = honest_cp_ids_[i];
          if (scheduled_online_[id] || !nodes_[id]->online()) continue;
          nodes_[id]->set_online(false);
          trace_.add(0.0, RecordKind::offline, id);
        }
      }
      push(0.0, EventType::churn);
    }
    for (NodeId id : honest_cp_ids_) push(0.0, EventType::iteration_start, id, 0, 1);
    for (std::size_t i = 0; i < cfg_.adversary.script.size(); ++i) {
      push(cfg_.adversary.script_times[i] * cfg_.delta, EventType::script_vote, kNoNode, i);
    }
    schedule_next_mining(EventType::mine_honest, (1.0 - cfg_.beta) * cfg_.lambda,
                         rng_honest_mining_);
    schedule_next_mining(EventType::mine_adversary, cfg_.beta * cfg_.lambda, rng_adv_mining_);
    adversary_->on_start();
  }

  while (!queue_.empty() && queue_.top().time < end_) {
    SimEvent ev = queue_.pop();
    now_ = ev.time;
    handle(ev);
  }
  return std::move(trace_);
}

void Simulation::handle(const SimEvent& ev) {
  switch (ev.type) {
    case EventType::online_change:
      set_online(ev.node, ev.b != 0);
      break;
    case EventType::churn:
      churn();
      break;
    case EventType::deliver: {
      Inflight& f = messages_[ev.a];
      if (f.state.empty() || f.state[ev.node] != 0 || f.scheduled[ev.node] != ev.time) break;
      if (!nodes_[ev.node]->online()) {
        f.state[ev.node] = 2;
        pending_[ev.node].push_back(ev.a);
        break;
      }
      handle_delivery(ev.node, ev.a, false);
      break;
    }
    case EventType::adversary_wake:
      adversary_->on_wake(ev.a);
      break;
    case EventType::script_vote:
      adversary_->on_script(ev.a);
      break;
    case EventType::mine_honest:
      mine_honest();
      break;
    case EventType::mine_adversary:
      mine_adversary();
      break;
    case EventType::iteration_start:
      ba_[ev.node]->start_iteration(ev.b, now_);
      break;
    case EventType::step:
      if (nodes_[ev.node]->online()) ba_[ev.node]->on_step(ev.a, static_cast<int>(ev.b), now_);
      break;
  }
}

SimTime Simulation::honest_delivery_time(NodeId from, NodeId to, SimTime sent) {
  const SimTime d = cfg_.delta;
  auto post = [&]() {
    if (cfg_.network.delay == "max") return sent + d;
    return sent + d * (1.0 - sample_unit(rng_delay_));
  };
  if (!cfg_.is_m1()) return post();
  const SimTime gst = cfg_.gst_time();
  if (sent >= gst) return post();
  const std::string& p = cfg_.network.pre_gst;
  if (p == "maximal") return gst + d;
  if (p == "uniform") return sent + (gst + d - sent) * (1.0 - sample_unit(rng_delay_));
  // partition
  if (group_[from] == group_[to]) return post();
  return gst + d;
}

Simulation::Inflight& Simulation::new_message(Message m) {
  m.id = messages_.size();
  m.sent = now_;
  Inflight& f = messages_.emplace_back();
  f.msg = std::move(m);
  f.scheduled.assign(n_honest_, kNever);
  f.state.assign(n_honest_, 0);
  f.from.assign(n_honest_, kNoNode);
  f.sent.assign(n_honest_, 0.0);
  f.remaining = n_honest_;
  if (is_honest(f.msg.origin) && !f.msg.adversarial) {
    f.state[f.msg.origin] = 1;
    f.remaining -= 1;
  }
  return f;
}

void Simulation::broadcast_honest(std::uint64_t msg_id, NodeId from) {
  Inflight& f = messages_[msg_id];
  if (f.remaining == 0) return;
  for (NodeId r : honest_ids_) {
    if (r == from || f.state[r] != 0) continue;
    SimTime t = honest_delivery_time(from, r, now_);
    if (t < f.scheduled[r]) {
      f.scheduled[r] = t;
      f.from[r] = from;
      f.sent[r] = now_;
      push(t, EventType::deliver, r, msg_id);
    }
  }
}

void Simulation::deliver_now(std::uint64_t msg_id, std::span<const NodeId> to) {
  Inflight& f = messages_[msg_id];
  auto one = [&](NodeId r) {
    if (!is_honest(r) || f.state[r] != 0 || !(now_ < f.scheduled[r])) return;
    f.scheduled[r] = now_;
    f.from[r] = f.msg.origin;
    f.sent[r] = now_;
    push(now_, EventType::deliver, r, msg_id);
  };
  if (to.empty()) {
    for (NodeId r : honest_ids_) one(r);
  } else {
    for (NodeId r : to) one(r);
  }
}

void Simulation::handle_delivery(NodeId node, std::uint64_t msg_id, bool deferred) {
  Inflight& f = messages_[msg_id];
  f.state[node] = 1;
  f.remaining -= 1;
  if (cfg_.output.deliveries) {
    TraceRecord& r = trace_.add(now_, RecordKind::delivery, node);
    r.a = static_cast<std::int64_t>(msg_id);
    r.b = f.from[node];
    r.c = static_cast<std::int64_t>(f.msg.kind);
    r.d = deferred ? 1 : 0;
    r.x = f.sent[node];
  }
  broadcast_honest(msg_id, node);
  // Copy: processing may append to messages_.
  Message m = messages_[msg_id].msg;
  if (messages_[msg_id].remaining == 0) {
    Inflight& done = messages_[msg_id];
    std::vector<SimTime>().swap(done.scheduled);
    std::vector<NodeId>().swap(done.from);
    std::vector<SimTime>().swap(done.sent);
  }
  process(node, m);
}

void Simulation::process(NodeId node, const Message& m) {
  NodeState& n = *nodes_[node];
  BaCheckpointer* ba = ba_[node].get();
  switch (m.kind) {
    case MsgKind::chain:
      n.on_receive_chain(m.tip);
      sync_node(node);
      break;
    case MsgKind::vote:
      if (m.vote.value != kBottom) {
        n.on_receive_chain(m.vote.value);
        sync_node(node);
      }
      if (ba) ba->on_vote(m.vote, now_);
      break;
    case MsgKind::proposal:
      n.on_receive_chain(m.value);
      sync_node(node);
      if (ba) ba->on_proposal(m.origin, m.iteration, m.period, m.value, now_);
      break;
    case MsgKind::certificate:
      apply_certificate(node, *m.cert);
      if (ba) ba->on_certificate(*m.cert, now_);
      break;
  }
}

void Simulation::apply_certificate(NodeId node, const Certificate& cert) {
  NodeState& n = *nodes_[node];
  try {
    n.on_receive_checkpoint(cert, now_);
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::NonMonotoneCheckpoint) {
      TraceRecord& r = trace_.add(now_, RecordKind::p1_breach, node);
      r.a = cert.iteration;
      r.b = value_field(block_at_depth(universe_, Chain{cert.value}, cfg_.checkpoint_depth()));
      r.c = n.last_checkpoint().block;
    } else if (ex.code() != ErrorCode::BadCertificate && ex.code() != ErrorCode::ChainTooShort) {
      throw;
    }
  }
  sync_node(node);
}

void Simulation::sync_node(NodeId id) {
  Shadow& sh = shadow_[id];
  const NodeState& n = *nodes_[id];
  if (n.tip() != sh.tip) {
    std::uint32_t old_h = universe_.at(sh.tip).height;
    std::uint32_t new_h = n.height();
    TraceRecord& r = trace_.add(
        now_, new_h > old_h ? RecordKind::chain_adopt : RecordKind::chain_truncate, id);
    r.a = n.tip();
    r.b = sh.tip;
    r.c = new_h;
    auto it = holder_count_.find(sh.tip);
    if (it != holder_count_.end() && --it->second == 0) holder_count_.erase(it);
    ++holder_count_[n.tip()];
    sh.tip = n.tip();
  }
  const auto& hist = n.checkpoint_history();
  for (; sh.checkpoints < hist.size(); ++sh.checkpoints) {
    TraceRecord& r = trace_.add(now_, RecordKind::checkpoint_mark, id);
    r.a = hist[sh.checkpoints].iteration;
    r.b = hist[sh.checkpoints].block;
  }
  BlockId fin = n.fin_tip();
  BlockId ada = n.ada_tip();
  if (fin != sh.fin || ada != sh.ada) {
    TraceRecord& r = trace_.add(now_, RecordKind::confirm_change, id);
    r.a = fin;
    r.b = ada;
    sh.fin = fin;
    sh.ada = ada;
  }
}

void Simulation::mine_honest() {
  std::vector<NodeId> online;
  for (NodeId id : miner_ids_) {
    if (nodes_[id]->online()) online.push_back(id);
  }
  NodeId miner = kNoNode;
  if (!online.empty()) miner = online[rng_assign_() % online.size()];
  TraceRecord& op = trace_.add(now_, RecordKind::mining_opportunity, miner);
  op.d = 0;
  op.e = online.empty() ? 1 : 0;
  if (!online.empty()) {
    NodeState& n = *nodes_[miner];
    Block b = n.on_mine_opportunity(now_, universe_.next_id());
    universe_.append(b);
    TraceRecord& r = trace_.add(now_, RecordKind::block_mined, miner);
    r.a = b.id;
    r.b = b.parent;
    r.c = b.height;
    r.d = 0;
    n.on_receive_chain(b.id);
    sync_node(miner);
    Message m;
    m.kind = MsgKind::chain;
    m.origin = miner;
    m.tip = b.id;
    std::uint64_t id = new_message(std::move(m)).msg.id;
    adversary_->on_observe(messages_[id].msg);
    broadcast_honest(id, miner);
  }
  schedule_next_mining(EventType::mine_honest, (1.0 - cfg_.beta) * cfg_.lambda,
                       rng_honest_mining_);
}

void Simulation::mine_adversary() {
  TraceRecord& op = trace_.add(now_, RecordKind::mining_opportunity, kAdversary);
  op.d = 1;
  op.e = 0;
  in_adv_opportunity_ = true;
  adv_mined_ = false;
  adversary_->on_mine_opportunity();
  in_adv_opportunity_ = false;
  schedule_next_mining(EventType::mine_adversary, cfg_.beta * cfg_.lambda, rng_adv_mining_);
}

BlockId Simulation::mine(BlockId parent) {
  if (!in_adv_opportunity_ || adv_mined_) {
    throw Error(ErrorCode::ScenarioInvalid, "adversary mined without an opportunity");
  }
  adv_mined_ = true;
  Block b;
  b.id = universe_.next_id();
  b.parent = parent;
  b.mine_time = now_;
  b.miner = kAdversary;
  b.miner_kind = MinerKind::adversarial;
  const Block& stored = universe_.append(b);
  TraceRecord& r = trace_.add(now_, RecordKind::block_mined, kAdversary);
  r.a = stored.id;
  r.b = stored.parent;
  r.c = stored.height;
  r.d = 1;
  TraceRecord& w = trace_.add(now_, RecordKind::withhold, kAdversary);
  w.a = stored.id;
  return stored.id;
}

void Simulation::release_chain(BlockId tip, std::span<const NodeId> to) {
  TraceRecord& r = trace_.add(now_, RecordKind::release, kAdversary);
  r.a = tip;
  r.b = universe_.at(tip).height;
  r.c = common_prefix(Chain{tip}, Chain{public_tip()}, universe_).tip;
  Message m;
  m.kind = MsgKind::chain;
  m.origin = kAdversary;
  m.adversarial = true;
  m.tip = tip;
  std::uint64_t id = new_message(std::move(m)).msg.id;
  deliver_now(id, to);
}

void Simulation::send_vote(const Vote& v, std::span<const NodeId> to) {
  if (!is_byzantine(v.voter)) {
    throw Error(ErrorCode::ScenarioInvalid, "adversary vote from honest id");
  }
  TraceRecord& r = trace_.add(now_, RecordKind::vote_cast, v.voter);
  r.a = v.iteration;
  r.b = v.period;
  r.c = static_cast<std::int64_t>(v.kind);
  r.d = value_field(v.value);
  r.e = 1;
  auto key = std::make_tuple(v.voter, v.iteration, v.period, static_cast<std::uint8_t>(v.kind));
  auto it = byz_votes_.find(key);
  if (it == byz_votes_.end()) {
    byz_votes_.emplace(key, v.value);
  } else if (it->second != v.value) {
    TraceRecord& q = trace_.add(now_, RecordKind::equivocation, v.voter);
    q.a = v.iteration;
    q.b = v.period;
    q.c = static_cast<std::int64_t>(v.kind);
  }
  Message m;
  m.kind = MsgKind::vote;
  m.origin = v.voter;
  m.adversarial = true;
  m.vote = v;
  std::uint64_t id = new_message(std::move(m)).msg.id;
  deliver_now(id, to);
}

void Simulation::send_proposal(NodeId from, std::uint32_t iteration, std::uint32_t period,
                               Value v, std::span<const NodeId> to) {
  if (!is_byzantine(from)) {
    throw Error(ErrorCode::ScenarioInvalid, "adversary proposal from honest id");
  }
  TraceRecord& r = trace_.add(now_, RecordKind::proposal, from);
  r.a = iteration;
  r.b = period;
  r.d = value_field(v);
  r.e = 1;
  Message m;
  m.kind = MsgKind::proposal;
  m.origin = from;
  m.adversarial = true;
  m.iteration = iteration;
  m.period = period;
  m.value = v;
  std::uint64_t id = new_message(std::move(m)).msg.id;
  deliver_now(id, to);
}

void Simulation::wake_at(SimTime t, std::uint64_t token) {
  push(std::max(t, now_), EventType::adversary_wake, kNoNode, token);
}

NodeId Simulation::leader_for(std::uint32_t iteration, std::uint32_t period) {
  auto key = std::make_pair(iteration, period);
  auto it = leaders_.find(key);
  if (it != leaders_.end()) return it->second;
  std::vector<NodeId> online;
  for (NodeId id : honest_cp_ids_) {
    if (nodes_[id]->online()) online.push_back(id);
  }
  for (NodeId id : byz_ids_) online.push_back(id);
  if (online.empty()) return kNoNode;
  std::uint64_t h = splitmix64(cfg_.seed ^ splitmix64(0x6c656164ull + iteration) ^
                               splitmix64((static_cast<std::uint64_t>(period) << 32) | 0x7065u));
  NodeId leader = online[h % online.size()];
  leaders_.emplace(key, leader);
  TraceRecord& r = trace_.add(now_, RecordKind::leader, leader);
  r.a = iteration;
  r.b = period;
  r.e = is_byzantine(leader) ? 1 : 0;
  if (is_byzantine(leader)) adversary_->on_leader(iteration, period, leader);
  return leader;
}

std::uint32_t Simulation::holders(BlockId tip) const {
  auto it = holder_count_.find(tip);
  return it == holder_count_.end() ? 0 : it->second;
}

BlockId Simulation::public_tip() const {
  BlockId best = kGenesis;
  std::uint32_t best_h = 0;
  for (const auto& n : nodes_) {
    std::uint32_t h = n->height();
    if (h > best_h || (h == best_h && n->tip() < best)) {
      best = n->tip();
      best_h = h;
    }
  }
  return best;
}

BlockId Simulation::latest_checkpoint() const {
  const Checkpoint* best = &nodes_[0]->last_checkpoint();
  for (const auto& n : nodes_) {
    if (n->last_checkpoint().iteration > best->iteration) best = &n->last_checkpoint();
  }
  return best->block;
}

std::uint32_t Simulation::latest_checkpoint_iteration() const {
  std::uint32_t best = 0;
  for (const auto& n : nodes_) best = std::max(best, n->last_checkpoint().iteration);
  return best;
}

void Simulation::send_vote(NodeId from, const Vote& v) {
  TraceRecord& r = trace_.add(now_, RecordKind::vote_cast, from);
  r.a = v.iteration;
  r.b = v.period;
  r.c = static_cast<std::int64_t>(v.kind);
  r.d = value_field(v.value);
  r.e = 0;
  Message m;
  m.kind = MsgKind::vote;
  m.origin = from;
  m.vote = v;
  std::uint64_t id = new_message(std::move(m)).msg.id;
  adversary_->on_observe(messages_[id].msg);
  broadcast_honest(id, from);
}

void Simulation::send_proposal(NodeId from, std::uint32_t iteration, std::uint32_t period,
                               Value v) {
  TraceRecord& r = trace_.add(now_, RecordKind::proposal, from);
  r.a = iteration;
  r.b = period;
  r.d = value_field(v);
  r.e = 0;
  Message m;
  m.kind = MsgKind::proposal;
  m.origin = from;
  m.iteration = iteration;
  m.period = period;
  m.value = v;
  std::uint64_t id = new_message(std::move(m)).msg.id;
  adversary_->on_observe(messages_[id].msg);
  broadcast_honest(id, from);
}

void Simulation::schedule_step(NodeId node, SimTime at, std::uint64_t epoch, int step) {
  push(at, EventType::step, node, epoch, static_cast<std::uint32_t>(step));
}

void Simulation::schedule_iteration(NodeId node, SimTime at, std::uint32_t iteration) {
  push(at, EventType::iteration_start, node, 0, iteration);
}

void Simulation::on_halt(NodeId node, const Certificate& cert, SimTime now) {
  TraceRecord& r = trace_.add(now, RecordKind::iteration_halt, node);
  r.a = cert.iteration;
  r.b = cert.period;
  r.c = value_field(cert.value);
  try {
    r.d = block_at_depth(universe_, Chain{cert.value}, cfg_.checkpoint_depth());
  } catch (const Error&) {
    r.d = -1;
  }
  for (const Vote& v : cert.votes) r.list.push_back(v.voter);
  apply_certificate(node, cert);
  TraceRecord& b = trace_.add(now, RecordKind::certificate_broadcast, node);
  b.a = cert.iteration;
  b.c = value_field(cert.value);
  Message m;
  m.kind = MsgKind::certificate;
  m.origin = node;
  m.cert = std::make_shared<const Certificate>(cert);
  std::uint64_t id = new_message(std::move(m)).msg.id;
  adversary_->on_observe(messages_[id].msg);
  broadcast_honest(id, node);
}

void Simulation::on_period_start(NodeId node, std::uint32_t iteration, std::uint32_t period,
                                 Value st, Value vi, SimTime now) {
  TraceRecord& r = trace_.add(now, RecordKind::period_start, node);
  r.a = iteration;
  r.b = period;
  r.c = value_field(st);
  r.d = value_field(vi);
}

void Simulation::on_next_quorum(NodeId node, std::uint32_t iteration, std::uint32_t period,
                                Value v, SimTime now) {
  TraceRecord& r = trace_.add(now, RecordKind::next_quorum, node);
  r.a = iteration;
  r.b = period;
  r.d = value_field(v);
}

void Simulation::set_online(NodeId id, bool on) {
  NodeState& n = *nodes_[id];
  if (n.online() == on) return;
  n.set_online(on);
  trace_.add(now_, on ? RecordKind::online : RecordKind::offline, id);
  if (!on) return;
  std::vector<std::uint64_t> inbox;
  inbox.swap(pending_[id]);
  for (std::uint64_t msg : inbox) handle_delivery(id, msg, true);
  if (ba_[id]) ba_[id]->resume(now_);
}

void Simulation::churn() {
  const auto& part = cfg_.participation;
  auto reshuffle = [&](const std::vector<NodeId>& pool_in) {
    std::vector<NodeId> pool;
    for (NodeId id : pool_in) {
      if (!scheduled_online_[id]) pool.push_back(id);
    }
    if (pool.empty()) return;
    const auto n = static_cast<std::uint32_t>(pool.size());
    auto lo = static_cast<std::uint32_t>(std::ceil(part.miner_floor * n));
    lo = std::max<std::uint32_t>(lo, 1);
    std::uint32_t count = lo + static_cast<std::uint32_t>(rng_churn_() % (n - lo + 1));
    for (std::uint32_t i = n - 1; i > 0; --i) {
      std::uint32_t j = static_cast<std::uint32_t>(rng_churn_() % (i + 1));
      std::swap(pool[i], pool[j]);
    }
    for (std::uint32_t i = 0; i < n; ++i) set_online(pool[i], i < count);
  };
  reshuffle(miner_ids_);
  if (part.churn_checkpointers) {
    std::vector<NodeId> cps = honest_cp_ids_;
    if (part.online_checkpointers >= 0) cps.resize(static_cast<std::size_t>(part.online_checkpointers));
    reshuffle(cps);
  }
  SimTime next = now_ + part.churn_epoch * cfg_.delta;
  if (next < horizon_) push(next, EventType::churn);
}

Trace run_scenario(const ScenarioConfig& cfg) {
  Simulation sim(cfg);
  return sim.run();
}

}  // namespace clc
