#include "clc/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include "clc/ba_types.hpp"
#include "clc/error.hpp"

namespace clc {

namespace {

constexpr double kEps = 1e-9;

BlockId as_block(std::int64_t v) { return v < 0 ? kNoBlock : static_cast<BlockId>(v); }

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

}  // namespace

TraceIndex index_trace(const Trace& trace) {
  TraceIndex ix;
  ix.trace = &trace;
  ix.cfg = config_from_json(trace.config);
  ix.tree = BlockTree::with_genesis();
  ix.n_honest = ix.cfg.n_honest();
  ix.adversarial.push_back(0);
  for (const TraceRecord& r : trace.records) {
    if (r.kind != RecordKind::block_mined) continue;
    Block b;
    b.id = static_cast<BlockId>(r.a);
    b.parent = static_cast<BlockId>(r.b);
    b.mine_time = r.time;
    b.miner = r.node;
    b.miner_kind = r.d ? MinerKind::adversarial : MinerKind::honest;
    ix.tree.append(b);
    if (ix.adversarial.size() <= b.id) ix.adversarial.resize(b.id + 1, 0);
    ix.adversarial[b.id] = r.d ? 1 : 0;
  }
  return ix;
}

// ---- slot statistics ----

std::uint64_t slot_of(SimTime t, SimTime delta) {
  if (t <= 0.0) return 1;
  auto i = static_cast<std::uint64_t>(std::ceil(t / delta));
  return std::max<std::uint64_t>(i, 1);
}

std::vector<SlotStats> classify_slots(const std::vector<std::uint32_t>& honest,
                                      const std::vector<std::uint32_t>& adversarial) {
  const std::size_t n = std::max(honest.size(), adversarial.size());
  auto h = [&](std::size_t i) { return i < honest.size() ? honest[i] : 0u; };
  auto a = [&](std::size_t i) { return i < adversarial.size() ? adversarial[i] : 0u; };
  std::vector<SlotStats> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    SlotStats& s = out[i];
    s.slot = i + 1;
    s.honest = h(i);
    s.adversarial = a(i);
    bool loner = h(i) == 1 && (i == 0 || h(i - 1) == 0) && h(i + 1) == 0;
    s.y = loner ? 1 : 0;
    s.z = s.adversarial + s.honest - s.y;
  }
  return out;
}

std::vector<SlotStats> compute_yz(const Trace& trace, SimTime delta) {
  ScenarioConfig cfg = config_from_json(trace.config);
  auto slots = static_cast<std::size_t>(std::ceil(cfg.horizon() / delta - kEps));
  std::vector<std::uint32_t> honest(slots, 0), adv(slots, 0);
  for (const TraceRecord& r : trace.records) {
    if (r.kind != RecordKind::block_mined) continue;
    std::uint64_t i = slot_of(r.time, delta) - 1;
    if (i >= slots) {
      honest.resize(i + 1, 0);
      adv.resize(i + 1, 0);
      slots = i + 1;
    }
    (r.d ? adv : honest)[i] += 1;
  }
  return classify_slots(honest, adv);
}

YBar expected_ybar(double beta, double lambda, double delta) {
  YBar r;
  double h = (1.0 - beta) * lambda * delta;
  r.ybar = h * std::exp(-3.0 * h);
  r.zbar = lambda * delta - r.ybar;
  r.regime_warning = lambda * delta >= 1.0;
  return r;
}

TypicalResult check_typical(const std::vector<double>& y, const std::vector<double>& z,
                            double ey, double ez, const TypicalParams& p) {
  // For fixed t2 each condition |S(t2) - S(t1) - m(t2 - t1)| <= b(t2 - t1)
  // only depends on the extremes of S(t1) - m t1 and S(t1) + ... over the
  // admissible t1, so one pass with running extremes is exact.
  TypicalResult res;
  const std::size_t T = std::min(y.size(), z.size());
  if (p.tau == 0 || T < p.tau) return res;
  const double eps = p.epsilon;
  struct Cond {
    double mean, bound;
  };
  const Cond conds[3] = {{ey, eps * ey}, {ez, eps * ey}, {ey + ez, eps * (ey + ez)}};
  std::vector<double> py(T + 1, 0.0), pz(T + 1, 0.0);
  for (std::size_t i = 0; i < T; ++i) {
    py[i + 1] = py[i] + y[i];
    pz[i + 1] = pz[i] + z[i];
  }
  auto sum = [&](int c, std::size_t t) {
    return c == 0 ? py[t] : c == 1 ? pz[t] : py[t] + pz[t];
  };
  // Condition: S(t2)-S(t1) <= (m+b)(t2-t1) and S(t2)-S(t1) >= (m-b)(t2-t1).
  // Upper: S(t2)-(m+b)t2 <= min_t1 [S(t1)-(m+b)t1]. Lower: S(t2)-(m-b)t2 >= max_t1 [...].
  for (int c = 0; c < 3; ++c) {
    const double hi = conds[c].mean + conds[c].bound;
    const double lo = conds[c].mean - conds[c].bound;
    double min_u = 0.0, max_l = 0.0;
    std::size_t arg_u = 0, arg_l = 0;
    for (std::size_t t2 = p.tau; t2 <= T; ++t2) {
      std::size_t t1 = t2 - p.tau;
      double u = sum(c, t1) - hi * static_cast<double>(t1);
      double l = sum(c, t1) - lo * static_cast<double>(t1);
      if (t1 == 0 || u < min_u) {
        min_u = u;
        arg_u = t1;
      }
      if (t1 == 0 || l > max_l) {
        max_l = l;
        arg_l = t1;
      }
      double s2 = sum(c, t2);
      double tol = 1e-9 * (1.0 + std::abs(s2));
      if (s2 - hi * static_cast<double>(t2) > min_u + tol) {
        if (res.typical || t2 < res.t2) res = {false, c + 1, arg_u, t2};
        break;
      }
      if (s2 - lo * static_cast<double>(t2) < max_l - tol) {
        if (res.typical || t2 < res.t2) res = {false, c + 1, arg_l, t2};
        break;
      }
    }
  }
  return res;
}

TypicalResult check_typical(const std::vector<SlotStats>& stats, double ey, double ez,
                            const TypicalParams& p) {
  std::vector<double> y(stats.size()), z(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    y[i] = stats[i].y;
    z[i] = stats[i].z;
  }
  return check_typical(y, z, ey, ez, p);
}

// ---- chain properties ----

std::vector<TipChange> tip_changes(const TraceIndex& ix) {
  std::vector<TipChange> out;
  std::vector<BlockId> tip(ix.n_honest, ix.tree.root());
  std::vector<std::uint8_t> online(ix.n_honest, 1);
  const auto& recs = ix.trace->records;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const TraceRecord& r = recs[i];
    if (!ix.is_honest(r.node)) continue;
    switch (r.kind) {
      case RecordKind::chain_adopt:
      case RecordKind::chain_truncate:
        tip[r.node] = static_cast<BlockId>(r.a);
        if (online[r.node]) out.push_back({r.time, r.node, tip[r.node], i});
        break;
      case RecordKind::offline:
        online[r.node] = 0;
        out.push_back({r.time, r.node, kNoBlock, i});
        break;
      case RecordKind::online:
        online[r.node] = 1;
        out.push_back({r.time, r.node, tip[r.node], i});
        break;
      default:
        break;
    }
  }
  return out;
}

std::vector<PrefixViolation> check_common_prefix(const BlockTree& tree, std::uint32_t n_nodes,
                                                 const std::vector<TipChange>& changes,
                                                 std::uint32_t k) {
  std::vector<PrefixViolation> out;
  const BlockId root = tree.root();
  std::vector<BlockId> cur(n_nodes, root);
  std::map<BlockId, std::uint32_t> alive;
  if (n_nodes > 0) alive[root] = n_nodes;
  // Leaves of the set of all k-truncations seen so far.
  std::vector<BlockId> leaves{root};

  std::size_t i = 0;
  while (i < changes.size()) {
    const SimTime s = changes[i].time;
    std::map<NodeId, BlockId> last;
    for (; i < changes.size() && changes[i].time == s; ++i) last[changes[i].node] = changes[i].tip;
    std::vector<BlockId> fresh;
    for (auto [node, tip] : last) {
      if (node < 0 || static_cast<std::uint32_t>(node) >= n_nodes) continue;
      BlockId& c = cur[node];
      if (c == tip) continue;
      if (c != kNoBlock) {
        auto it = alive.find(c);
        if (--it->second == 0) alive.erase(it);
      }
      c = tip;
      if (tip == kNoBlock) continue;
      ++alive[tip];
      fresh.push_back(tip);
    }
    std::vector<BlockId> truncs;
    for (BlockId h : fresh) {
      BlockId p = drop_last(tree, Chain{h}, k).tip;
      truncs.push_back(p);
      bool covered = std::any_of(leaves.begin(), leaves.end(),
                                 [&](BlockId l) { return is_descendant(tree, p, l); });
      if (covered) continue;
      std::erase_if(leaves, [&](BlockId l) { return is_descendant(tree, l, p); });
      leaves.push_back(p);
    }
    bool found = false;
    PrefixViolation v{s, kNoBlock, kNoBlock};
    for (BlockId h : fresh) {
      for (BlockId l : leaves) {
        if (!is_descendant(tree, l, h)) {
          v.earlier = l;
          v.later = h;
          found = true;
          break;
        }
      }
      if (found) break;
    }
    if (!found) {
      for (BlockId p : truncs) {
        for (const auto& [tip, cnt] : alive) {
          if (!is_descendant(tree, p, tip)) {
            v.earlier = p;
            v.later = tip;
            found = true;
            break;
          }
        }
        if (found) break;
      }
    }
    if (found) out.push_back(v);
  }
  return out;
}

std::vector<PrefixViolation> check_common_prefix(const TraceIndex& ix, std::uint32_t k) {
  return check_common_prefix(ix.tree, ix.n_honest, tip_changes(ix), k);
}

std::vector<QualityViolation> check_chain_quality(const BlockTree& tree,
                                                  const std::vector<TipChange>& changes,
                                                  std::uint32_t k, SimTime s) {
  std::vector<QualityViolation> out;
  if (k == 0) return out;
  // Parents always have smaller ids, so one forward pass fills the memo.
  const std::size_t n = tree.size();
  std::vector<std::uint32_t> run(n, 0), best(n, 0);
  for (BlockId b = 0; b < n; ++b) {
    if (!tree.contains(b)) continue;
    const Block& blk = tree.at(b);
    bool counts = blk.miner_kind == MinerKind::adversarial && blk.mine_time > s;
    std::uint32_t pr = 0, pb = 0;
    if (b != tree.root()) {
      pr = run[blk.parent];
      pb = best[blk.parent];
    }
    run[b] = counts ? pr + 1 : 0;
    best[b] = std::max(pb, run[b]);
  }
  for (std::size_t i = 0; i < changes.size(); ++i) {
    const TipChange& c = changes[i];
    if (c.tip == kNoBlock) continue;
    if (best[c.tip] >= k) out.push_back({c.time, c.node, c.tip, i});
  }
  return out;
}

std::vector<QualityViolation> check_chain_quality(const TraceIndex& ix, std::uint32_t k,
                                                  SimTime s) {
  return check_chain_quality(ix.tree, tip_changes(ix), k, s);
}

std::vector<Violation> check_rule_safety(const TraceIndex& ix, Rule rule) {
  std::vector<Violation> out;
  std::vector<BlockId> prev(ix.n_honest, ix.tree.root());
  const char* name = rule == Rule::fin ? "fin-safety" : "ada-safety";
  for (const TraceRecord& r : ix.trace->records) {
    if (r.kind != RecordKind::confirm_change || !ix.is_honest(r.node)) continue;
    BlockId now = as_block(rule == Rule::fin ? r.a : r.b);
    BlockId& old = prev[r.node];
    if (now == old) continue;
    if (!is_descendant(ix.tree, old, now)) {
      out.push_back({name, r.time, r.node,
                     fmt("confirmed %u replaced by %u (not a descendant)", old, now)});
    }
    old = now;
  }
  return out;
}

LivenessResult check_rule_liveness(const TraceIndex& ix, Rule rule, double c, double c_prime,
                                   SimTime from) {
  LivenessResult res;
  if (c <= 0.0) return res;
  const double end = ix.cfg.horizon();
  if (from >= end) return res;
  const std::size_t n = ix.tree.size();
  std::vector<std::uint32_t> honest_count(n, 0);
  for (BlockId b = 1; b < n; ++b) {
    if (!ix.tree.contains(b)) continue;
    const Block& blk = ix.tree.at(b);
    honest_count[b] = honest_count[blk.parent] + (blk.miner_kind == MinerKind::honest ? 1 : 0);
  }
  // Nodes that go offline at some point are excluded; an offline node does not
  // hear anything and its confirmed chain stalls by design.
  std::vector<std::uint8_t> ever_offline(ix.n_honest, 0);
  std::vector<std::vector<std::pair<SimTime, BlockId>>> series(ix.n_honest);
  for (const TraceRecord& r : ix.trace->records) {
    if (!ix.is_honest(r.node)) continue;
    if (r.kind == RecordKind::offline) ever_offline[r.node] = 1;
    if (r.kind == RecordKind::confirm_change) {
      series[r.node].push_back({r.time, as_block(rule == Rule::fin ? r.a : r.b)});
    }
  }
  for (NodeId node = 0; node < static_cast<NodeId>(ix.n_honest); ++node) {
    if (ever_offline[node]) continue;
    const auto& ser = series[node];
    std::size_t j = 0;
    double f = 0.0;
    for (; j < ser.size() && ser[j].first <= from; ++j) f = honest_count[ser[j].second];
    double peak = f - c * from;
    SimTime peak_t = from;
    auto consider = [&](SimTime s) {
      double g = f - c * s;
      double deficit = peak - g;
      if (deficit > res.worst_deficit) {
        res.worst_deficit = deficit;
        res.worst_r = peak_t;
        res.worst_s = s;
        res.worst_node = node;
      }
    };
    for (; j < ser.size() && ser[j].first <= end; ++j) {
      consider(ser[j].first);
      f = honest_count[ser[j].second];
      double g = f - c * ser[j].first;
      if (g > peak) {
        peak = g;
        peak_t = ser[j].first;
      }
    }
    consider(end);
  }
  // new >= floor(c(s-r) - c') for integer counts is c(s-r) - new < c' + 1.
  res.live = res.worst_deficit < c_prime + 1.0;
  return res;
}

std::vector<Violation> check_nesting(const TraceIndex& ix, std::uint32_t k) {
  std::vector<Violation> out;
  std::vector<BlockId> tip(ix.n_honest, ix.tree.root()), fin(ix.n_honest, ix.tree.root());
  for (const TraceRecord& r : ix.trace->records) {
    if (!ix.is_honest(r.node)) continue;
    if (r.kind == RecordKind::chain_adopt || r.kind == RecordKind::chain_truncate) {
      tip[r.node] = static_cast<BlockId>(r.a);
    } else if (r.kind == RecordKind::checkpoint_mark) {
      fin[r.node] = static_cast<BlockId>(r.b);
    } else {
      continue;
    }
    BlockId ada = drop_last(ix.tree, Chain{tip[r.node]}, k).tip;
    if (!is_descendant(ix.tree, fin[r.node], ada)) {
      out.push_back({"nesting", r.time, r.node,
                     fmt("checkpoint %u not in ada chain ending %u", fin[r.node], ada)});
    }
  }
  return out;
}

std::vector<Violation> check_cp0(const TraceIndex& ix) {
  std::vector<Violation> out;
  const auto& recs = ix.trace->records;
  // Earliest time each cert vote was cast.
  std::map<std::tuple<NodeId, std::int64_t, std::int64_t, std::int64_t>, SimTime> cert_votes;
  struct Halt {
    std::int64_t value, block;
    SimTime time;
    NodeId node;
  };
  std::map<std::int64_t, Halt> first;
  const std::uint32_t quorum = ix.cfg.quorum();
  for (const TraceRecord& r : recs) {
    if (r.kind == RecordKind::vote_cast && r.c == static_cast<std::int64_t>(VoteKind::cert)) {
      cert_votes.try_emplace({r.node, r.a, r.b, r.d}, r.time);
    } else if (r.kind == RecordKind::p1_breach && ix.is_honest(r.node)) {
      out.push_back({"cp0", r.time, r.node,
                     fmt("iteration %lld checkpoint %lld does not extend %lld",
                         static_cast<long long>(r.a), static_cast<long long>(r.b),
                         static_cast<long long>(r.c))});
    } else if (r.kind == RecordKind::iteration_halt && ix.is_honest_checkpointer(r.node)) {
      std::set<std::int64_t> voters(r.list.begin(), r.list.end());
      if (voters.size() < quorum || voters.size() != r.list.size()) {
        out.push_back({"cp0", r.time, r.node,
                       fmt("certificate for iteration %lld has %zu distinct voters",
                           static_cast<long long>(r.a), voters.size())});
      }
      for (std::int64_t v : r.list) {
        auto it = cert_votes.find({static_cast<NodeId>(v), r.a, r.b, r.c});
        if (it == cert_votes.end() || it->second > r.time + kEps) {
          out.push_back({"cp0", r.time, r.node,
                         fmt("certificate vote of %lld for value %lld in iteration %lld "
                             "period %lld was never cast",
                             static_cast<long long>(v), static_cast<long long>(r.c),
                             static_cast<long long>(r.a), static_cast<long long>(r.b))});
          break;
        }
      }
      if (r.d < 0) {
        out.push_back({"cp0", r.time, r.node,
                       fmt("iteration %lld value %lld has no checkpoint at depth",
                           static_cast<long long>(r.a), static_cast<long long>(r.c))});
      }
      auto [it, inserted] = first.try_emplace(r.a, Halt{r.c, r.d, r.time, r.node});
      if (!inserted && (it->second.value != r.c || it->second.block != r.d)) {
        out.push_back({"cp0", r.time, r.node,
                       fmt("iteration %lld: node %d halted on %lld, node %d on %lld",
                           static_cast<long long>(r.a), it->second.node,
                           static_cast<long long>(it->second.value), r.node,
                           static_cast<long long>(r.c))});
      }
    }
  }
  BlockId prev = ix.tree.root();
  std::int64_t prev_iter = 0;
  for (const auto& [iter, h] : first) {
    if (h.block < 0) continue;
    auto b = static_cast<BlockId>(h.block);
    if (!is_descendant(ix.tree, prev, b)) {
      out.push_back({"p1", h.time, h.node,
                     fmt("iteration %lld checkpoint %u does not extend iteration %lld "
                         "checkpoint %u",
                         static_cast<long long>(iter), b, static_cast<long long>(prev_iter),
                         prev)});
    }
    prev = b;
    prev_iter = iter;
  }
  return out;
}

std::vector<Violation> check_vote_multiplicity(const TraceIndex& ix) {
  std::vector<Violation> out;
  std::map<std::tuple<NodeId, std::int64_t, std::int64_t, std::int64_t>, int> count;
  for (const TraceRecord& r : ix.trace->records) {
    if (r.kind != RecordKind::vote_cast || !ix.is_honest(r.node)) continue;
    if (r.c == static_cast<std::int64_t>(VoteKind::next)) continue;
    if (++count[{r.node, r.a, r.b, r.c}] == 2) {
      out.push_back({"vote-multiplicity", r.time, r.node,
                     fmt("second %s vote in iteration %lld period %lld",
                         r.c == 0 ? "soft" : "cert", static_cast<long long>(r.a),
                         static_cast<long long>(r.b))});
    }
  }
  return out;
}

std::vector<Violation> check_next_quorum_structure(const TraceIndex& ix) {
  std::vector<Violation> out;
  const std::uint32_t quorum = ix.cfg.quorum();
  using Key = std::pair<std::int64_t, std::int64_t>;
  std::map<Key, std::map<std::int64_t, std::set<NodeId>>> next;
  std::map<Key, SimTime> last_time;
  for (const TraceRecord& r : ix.trace->records) {
    if (r.kind != RecordKind::vote_cast || r.c != static_cast<std::int64_t>(VoteKind::next)) {
      continue;
    }
    next[{r.a, r.b}][r.d].insert(r.node);
    last_time[{r.a, r.b}] = r.time;
  }
  for (const auto& [key, by_value] : next) {
    std::vector<std::int64_t> q;
    for (const auto& [v, voters] : by_value) {
      if (voters.size() >= quorum) q.push_back(v);
    }
    bool ok = q.size() <= 1 || (q.size() == 2 && (q[0] == -1 || q[1] == -1));
    if (!ok) {
      out.push_back({"next-quorum-structure", last_time[key], kNoNode,
                     fmt("iteration %lld period %lld has %zu next-vote quorums",
                         static_cast<long long>(key.first),
                         static_cast<long long>(key.second), q.size())});
    }
  }
  return out;
}

std::vector<Violation> check_deadlock(const TraceIndex& ix) {
  std::vector<Violation> out;
  const auto& recs = ix.trace->records;
  // A next-vote quorum for period q moves the node to q+1 at the same instant
  // (or it halts there).
  std::set<std::tuple<NodeId, std::int64_t, std::int64_t, SimTime>> starts;
  std::set<std::pair<NodeId, SimTime>> halts;
  for (const TraceRecord& r : recs) {
    if (r.kind == RecordKind::period_start) starts.insert({r.node, r.a, r.b, r.time});
    if (r.kind == RecordKind::iteration_halt) halts.insert({r.node, r.time});
  }
  for (const TraceRecord& r : recs) {
    if (r.kind != RecordKind::next_quorum || !ix.is_honest_checkpointer(r.node)) continue;
    if (!starts.count({r.node, r.a, r.b + 1, r.time}) && !halts.count({r.node, r.time})) {
      out.push_back({"deadlock", r.time, r.node,
                     fmt("next quorum for period %lld without advancing",
                         static_cast<long long>(r.b))});
    }
  }
  if (ix.cfg.flush <= 0.0) return out;
  const double horizon = ix.cfg.horizon();
  std::vector<std::uint8_t> online(ix.n_honest, 1), progressed(ix.n_honest, 0);
  for (const TraceRecord& r : recs) {
    if (!ix.is_honest(r.node)) continue;
    if (r.kind == RecordKind::online) online[r.node] = 1;
    if (r.kind == RecordKind::offline) online[r.node] = 0;
    if ((r.kind == RecordKind::period_start || r.kind == RecordKind::iteration_halt) &&
        r.time > horizon) {
      progressed[r.node] = 1;
    }
  }
  for (NodeId id = static_cast<NodeId>(ix.cfg.n_miners); id < static_cast<NodeId>(ix.n_honest);
       ++id) {
    if (online[id] && !progressed[id]) {
      out.push_back({"deadlock", horizon, id, "no period change or halt after the horizon"});
    }
  }
  return out;
}

// ---- checkpoint measurements ----

std::vector<CheckpointInfo> measure_recency(const TraceIndex& ix) {
  std::map<std::uint32_t, CheckpointInfo> first;
  for (const TraceRecord& r : ix.trace->records) {
    if (r.kind != RecordKind::checkpoint_mark || !ix.is_honest(r.node) || r.a == 0) continue;
    auto it = first.find(static_cast<std::uint32_t>(r.a));
    if (it == first.end()) {
      CheckpointInfo c;
      c.iteration = static_cast<std::uint32_t>(r.a);
      c.block = static_cast<BlockId>(r.b);
      c.appear = r.time;
      first.emplace(c.iteration, c);
    }
  }
  // Holding intervals [s, e) of honest tips, keyed by tip height.
  struct Interval {
    BlockId tip;
    SimTime s, e;
  };
  std::unordered_map<std::uint32_t, std::vector<Interval>> by_height;
  const double inf = std::numeric_limits<double>::infinity();
  {
    std::vector<BlockId> cur(ix.n_honest, ix.tree.root());
    std::vector<SimTime> since(ix.n_honest, 0.0);
    for (const TipChange& c : tip_changes(ix)) {
      BlockId old = cur[c.node];
      if (old != kNoBlock && since[c.node] < c.time) {
        by_height[ix.tree.at(old).height].push_back({old, since[c.node], c.time});
      }
      cur[c.node] = c.tip;
      since[c.node] = c.time;
    }
    for (NodeId id = 0; id < static_cast<NodeId>(ix.n_honest); ++id) {
      if (cur[id] != kNoBlock) by_height[ix.tree.at(cur[id]).height].push_back({cur[id], since[id], inf});
    }
  }
  const std::uint32_t depth = ix.cfg.checkpoint_depth();
  std::vector<CheckpointInfo> out;
  for (auto& [iter, c] : first) {
    const std::uint32_t h = ix.tree.at(c.block).height + depth;
    double best = -inf;
    auto it = by_height.find(h);
    if (it != by_height.end()) {
      for (const Interval& iv : it->second) {
        if (iv.s > c.appear || !is_descendant(ix.tree, c.block, iv.tip)) continue;
        best = std::max(best, std::min(iv.e, c.appear));
      }
    }
    c.recency = best == -inf ? inf : c.appear - best;
    out.push_back(c);
  }
  return out;
}

Cadence measure_cadence(const TraceIndex& ix) {
  Cadence cad;
  cad.checkpoints = measure_recency(ix);
  for (std::size_t i = 1; i < cad.checkpoints.size(); ++i) {
    if (cad.checkpoints[i].iteration == cad.checkpoints[i - 1].iteration + 1) {
      cad.gaps.push_back(cad.checkpoints[i].appear - cad.checkpoints[i - 1].appear);
    }
  }
  using PKey = std::tuple<NodeId, std::uint32_t, std::uint32_t>;
  std::map<PKey, SimTime> start;
  std::map<std::pair<std::uint32_t, std::uint32_t>, bool> leader_byz;
  std::map<std::uint32_t, IterationInfo> iters;
  std::map<std::pair<NodeId, std::uint32_t>, std::uint32_t> current_period;
  for (const TraceRecord& r : ix.trace->records) {
    auto iter = static_cast<std::uint32_t>(r.a);
    auto period = static_cast<std::uint32_t>(r.b);
    if (r.kind == RecordKind::leader) {
      leader_byz.try_emplace({iter, period}, r.e != 0);
    } else if (r.kind == RecordKind::period_start && ix.is_honest_checkpointer(r.node)) {
      start.try_emplace({r.node, iter, period}, r.time);
      current_period[{r.node, iter}] = period;
    } else if (r.kind == RecordKind::iteration_halt && ix.is_honest_checkpointer(r.node)) {
      IterationInfo& it = iters[iter];
      if (it.halts == 0) {
        it.iteration = iter;
        it.deciding_period = period;
        it.first_halt = r.time;
      }
      it.deciding_period = std::min(it.deciding_period, period);
      it.last_halt = std::max(it.last_halt, r.time);
      it.halts += 1;
      auto cp = current_period.find({r.node, iter});
      if (cp != current_period.end()) {
        auto s = start.find({r.node, iter, cp->second});
        if (s != start.end()) it.max_halt_latency = std::max(it.max_halt_latency, r.time - s->second);
      }
    }
  }
  for (auto& [iter, it] : iters) {
    auto lb = leader_byz.find({iter, 1});
    it.first_leader_byzantine = lb != leader_byz.end() && lb->second;
    cad.iterations.push_back(it);
  }
  for (const auto& [key, byz] : leader_byz) {
    cad.leader_periods += 1;
    if (!byz) continue;
    cad.byzantine_leader_periods += 1;
    for (NodeId id = static_cast<NodeId>(ix.cfg.n_miners); id < static_cast<NodeId>(ix.n_honest);
         ++id) {
      auto a = start.find({id, key.first, key.second});
      auto b = start.find({id, key.first, key.second + 1});
      if (a != start.end() && b != start.end()) cad.malicious_advance.push_back(b->second - a->second);
    }
  }
  return cad;
}

// ---- audits ----

std::vector<Violation> audit_deliveries(const TraceIndex& ix) {
  std::vector<Violation> out;
  const double delta = ix.cfg.delta;
  const double gst = ix.cfg.gst_time();
  std::set<std::pair<NodeId, SimTime>> online_at;
  for (const TraceRecord& r : ix.trace->records) {
    if (r.kind == RecordKind::online) online_at.insert({r.node, r.time});
  }
  for (const TraceRecord& r : ix.trace->records) {
    if (r.kind != RecordKind::delivery) continue;
    const double lat = r.time - r.x;
    if (lat < -kEps) {
      out.push_back({"audit-delivery", r.time, r.node, fmt("delivered before sent (%.6g)", r.x)});
      continue;
    }
    if (r.d) {
      if (!online_at.count({r.node, r.time})) {
        out.push_back({"audit-delivery", r.time, r.node, "deferred delivery while not coming online"});
      }
      continue;
    }
    const auto sender = static_cast<NodeId>(r.b);
    if (!ix.is_honest(sender)) continue;
    bool ok = r.x + kEps >= gst ? lat <= delta + kEps : r.time <= gst + delta + kEps;
    if (!ok) {
      out.push_back({"audit-delivery", r.time, r.node,
                     fmt("message %lld from %d sent at %.6g exceeds the delay bound",
                         static_cast<long long>(r.a), sender, r.x)});
    }
  }
  return out;
}

std::vector<Violation> audit_capability(const TraceIndex& ix) {
  std::vector<Violation> out;
  const auto first_byz = static_cast<NodeId>(ix.n_honest);
  const auto end_byz = static_cast<NodeId>(ix.cfg.n_miners + ix.cfg.n_checkpointers);
  auto byzantine = [&](NodeId id) { return id >= first_byz && id < end_byz; };
  SimTime adv_op = -1.0;
  bool adv_used = true;
  std::map<NodeId, SimTime> honest_op;
  std::map<std::pair<std::int64_t, std::int64_t>, NodeId> leaders;
  for (const TraceRecord& r : ix.trace->records) {
    switch (r.kind) {
      case RecordKind::mining_opportunity:
        if (r.d) {
          adv_op = r.time;
          adv_used = false;
        } else if (!r.e) {
          honest_op[r.node] = r.time;
        }
        break;
      case RecordKind::block_mined:
        if (r.d) {
          if (r.node != kAdversary || adv_used || adv_op != r.time) {
            out.push_back({"audit-capability", r.time, r.node,
                           fmt("adversarial block %lld without an opportunity",
                               static_cast<long long>(r.a))});
          }
          adv_used = true;
        } else {
          auto it = honest_op.find(r.node);
          if (!ix.is_honest(r.node) || it == honest_op.end() || it->second != r.time) {
            out.push_back({"audit-capability", r.time, r.node,
                           fmt("honest block %lld without an opportunity",
                               static_cast<long long>(r.a))});
          } else {
            honest_op.erase(it);
          }
        }
        break;
      case RecordKind::leader:
        leaders.try_emplace({r.a, r.b}, r.node);
        break;
      case RecordKind::vote_cast:
      case RecordKind::proposal: {
        bool ok = r.e ? byzantine(r.node) : ix.is_honest_checkpointer(r.node);
        if (ok && r.kind == RecordKind::proposal && !r.e) {
          auto it = leaders.find({r.a, r.b});
          ok = it != leaders.end() && it->second == r.node;
        }
        if (!ok) {
          out.push_back({"audit-capability", r.time, r.node,
                         fmt("%s from an unauthorised id", to_string(r.kind).data())});
        }
        break;
      }
      case RecordKind::withhold:
      case RecordKind::release:
        if (r.node != kAdversary) {
          out.push_back({"audit-capability", r.time, r.node, "withhold/release by a non-adversary"});
        }
        break;
      default:
        break;
    }
  }
  return out;
}

std::vector<Violation> audit_confirmations(const TraceIndex& ix) {
  std::vector<Violation> out;
  const BlockId root = ix.tree.root();
  const std::uint32_t kp = ix.cfg.k_prime;
  struct St {
    BlockId tip, cp, fin, ada;
    SimTime changed = 0.0;
  };
  std::vector<St> st(ix.n_honest, St{root, root, root, root, 0.0});
  auto derived_fin = [](const St& s) { return s.cp; };
  auto derived_ada = [&](const St& s) { return drop_last(ix.tree, Chain{s.tip}, kp).tip; };
  auto mismatch = [&](const St& s) { return derived_fin(s) != s.fin || derived_ada(s) != s.ada; };
  for (const TraceRecord& r : ix.trace->records) {
    if (!ix.is_honest(r.node)) continue;
    St& s = st[r.node];
    if (r.time > s.changed && mismatch(s)) {
      out.push_back({"audit-confirm", r.time, r.node, "confirmation change was not recorded"});
      s.fin = derived_fin(s);
      s.ada = derived_ada(s);
    }
    switch (r.kind) {
      case RecordKind::chain_adopt:
      case RecordKind::chain_truncate:
        s.tip = static_cast<BlockId>(r.a);
        s.changed = r.time;
        break;
      case RecordKind::checkpoint_mark:
        s.cp = static_cast<BlockId>(r.b);
        s.changed = r.time;
        break;
      case RecordKind::confirm_change:
        s.fin = as_block(r.a);
        s.ada = as_block(r.b);
        if (mismatch(s)) {
          out.push_back({"audit-confirm", r.time, r.node,
                         fmt("recorded (%u, %u) but derived (%u, %u)", s.fin, s.ada,
                             derived_fin(s), derived_ada(s))});
        }
        break;
      default:
        break;
    }
  }
  for (NodeId id = 0; id < static_cast<NodeId>(ix.n_honest); ++id) {
    if (mismatch(st[id])) {
      out.push_back({"audit-confirm", st[id].changed, id, "final confirmation not recorded"});
    }
  }
  return out;
}

std::vector<Violation> audit_heights(const TraceIndex& ix) {
  std::vector<Violation> out;
  for (const TraceRecord& r : ix.trace->records) {
    if (r.kind == RecordKind::block_mined || r.kind == RecordKind::chain_adopt ||
        r.kind == RecordKind::chain_truncate) {
      std::int64_t h = ix.tree.at(static_cast<BlockId>(r.a)).height;
      if (h != r.c) {
        out.push_back({"audit-heights", r.time, r.node,
                       fmt("block %lld recorded at height %lld, replayed %lld",
                           static_cast<long long>(r.a), static_cast<long long>(r.c),
                           static_cast<long long>(h))});
      }
    }
    if (r.kind == RecordKind::chain_adopt || r.kind == RecordKind::chain_truncate) {
      bool grew = ix.tree.at(static_cast<BlockId>(r.a)).height >
                  ix.tree.at(static_cast<BlockId>(r.b)).height;
      if (grew != (r.kind == RecordKind::chain_adopt)) {
        out.push_back({"audit-heights", r.time, r.node, "adopt/truncate kind disagrees with heights"});
      }
    }
  }
  return out;
}

// ---- report ----

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

const std::vector<std::string>& checker_names() {
  static const std::vector<std::string> names = {
      "cp0",           "fin-safety",     "ada-safety",        "common-prefix",
      "chain-quality", "nesting",        "fin-liveness",      "ada-liveness",
      "cadence",       "typical",        "vote-multiplicity", "next-quorum-structure",
      "deadlock",      "audit-delivery", "audit-capability",  "audit-confirm",
      "audit-heights",
  };
  return names;
}

namespace {

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::json result(bool pass, std::size_t count, nlohmann::json witnesses) {
  return {{"pass", pass}, {"violations", count}, {"witnesses", std::move(witnesses)}};
}

nlohmann::json witnesses(const std::vector<Violation>& v) {
  nlohmann::json w = nlohmann::json::array();
  for (std::size_t i = 0; i < v.size() && i < 5; ++i) {
    w.push_back({{"property", v[i].property},
                 {"time", v[i].time},
                 {"node", v[i].node},
                 {"detail", v[i].witness}});
  }
  return w;
}

}  // namespace

Report analyze(const Trace& trace) {
  Report rep;
  TraceIndex ix = index_trace(trace);
  const ScenarioConfig& cfg = ix.cfg;
  std::set<std::string> enabled(cfg.checkers.enabled.begin(), cfg.checkers.enabled.end());
  auto on = [&](const std::string& n) { return enabled.empty() || enabled.count(n) > 0; };
  nlohmann::json checks = nlohmann::json::object();
  nlohmann::json stats = nlohmann::json::object();

  auto add = [&](const std::string& name, const std::vector<Violation>& v) {
    checks[name] = result(v.empty(), v.size(), witnesses(v));
  };

  if (on("cp0")) add("cp0", check_cp0(ix));
  if (on("fin-safety")) add("fin-safety", check_rule_safety(ix, Rule::fin));
  if (on("ada-safety")) add("ada-safety", check_rule_safety(ix, Rule::ada));
  const double from = cfg.analysis.c_gst * cfg.gst_time() + cfg.analysis.offset * cfg.delta;
  std::vector<PrefixViolation> cpv;
  if (on("common-prefix")) {
    cpv = check_common_prefix(ix, cfg.k_prime);
    nlohmann::json w = nlohmann::json::array();
    std::size_t after = 0;
    for (const PrefixViolation& p : cpv) {
      if (p.time >= from) ++after;
      if (w.size() < 5) w.push_back({{"time", p.time}, {"earlier", p.earlier}, {"later", p.later}});
    }
    checks["common-prefix"] = result(cpv.empty(), cpv.size(), w);
    checks["common-prefix"]["violationsAfterStart"] = after;
  }
  if (on("chain-quality")) {
    std::uint32_t k = cfg.analysis.quality_k.value_or(cfg.k);
    auto q = check_chain_quality(ix, k, cfg.analysis.quality_s * cfg.delta);
    nlohmann::json w = nlohmann::json::array();
    for (std::size_t i = 0; i < q.size() && i < 5; ++i) {
      w.push_back({{"time", q[i].time}, {"node", q[i].node}, {"tip", q[i].tip}});
    }
    checks["chain-quality"] = result(q.empty(), q.size(), w);
  }
  if (on("nesting")) add("nesting", check_nesting(ix, cfg.k));
  if (on("fin-liveness") || on("cadence")) {
    Cadence cad = measure_cadence(ix);
    const double e = cfg.e_delta() * cfg.delta;
    std::vector<double> periods;
    for (const auto& it : cad.iterations) {
      if (it.iteration >= 2) periods.push_back(it.deciding_period);
    }
    double p95 = periods.empty() ? 1.0 : quantile(periods, 0.95);
    std::vector<Violation> gap_v, live_v;
    std::size_t count_after = 0;
    for (std::size_t i = 0; i < cad.checkpoints.size(); ++i) {
      const auto& c = cad.checkpoints[i];
      if (c.appear >= from && c.appear <= cfg.horizon()) ++count_after;
      if (i == 0) continue;
      const auto& p = cad.checkpoints[i - 1];
      double gap = c.appear - p.appear;
      if (gap + kEps < e) {
        gap_v.push_back({"cadence", c.appear, kNoNode, fmt("gap %.6g below e", gap)});
      }
      if (p.appear >= from && gap > e + 10.0 * cfg.delta * p95 + kEps) {
        live_v.push_back({"fin-liveness", c.appear, kNoNode,
                          fmt("gap %.6g exceeds e + 10Δ·%.3g", gap, p95)});
      }
    }
    double h = cfg.horizon();
    double need = from < h ? std::floor((h - from) / (e + 20.0 * cfg.delta)) - 1.0 : 0.0;
    if (static_cast<double>(count_after) < need) {
      live_v.push_back({"fin-liveness", h, kNoNode,
                        fmt("%zu checkpoints after %.6g, expected at least %.0f", count_after,
                            from, need)});
    }
    if (on("fin-liveness")) add("fin-liveness", live_v);
    if (on("cadence")) add("cadence", gap_v);
    nlohmann::json cs;
    cs["checkpoints"] = cad.checkpoints.size();
    cs["checkpointsAfterStart"] = count_after;
    cs["livenessStart"] = from;
    cs["gapMin"] = json_number(cad.gaps.empty() ? NAN : *std::min_element(cad.gaps.begin(), cad.gaps.end()));
    cs["gapMax"] = json_number(cad.gaps.empty() ? NAN : *std::max_element(cad.gaps.begin(), cad.gaps.end()));
    double sum = 0.0;
    for (double p : periods) sum += p;
    cs["meanPeriods"] = json_number(periods.empty() ? NAN : sum / static_cast<double>(periods.size()));
    cs["p95Periods"] = p95;
    double spread = 0.0;
    for (const auto& it : cad.iterations) {
      if (it.iteration >= 2) spread = std::max(spread, it.last_halt - it.first_halt);
    }
    cs["maxHaltSpread"] = spread;
    cs["leaderPeriods"] = cad.leader_periods;
    cs["byzantineLeaderPeriods"] = cad.byzantine_leader_periods;
    std::vector<double> rec;
    for (const auto& c : cad.checkpoints) {
      if (c.appear >= cfg.gst_time()) rec.push_back(c.recency);
    }
    cs["recencyP50"] = json_number(quantile(rec, 0.5));
    cs["recencyMax"] = json_number(rec.empty() ? NAN : *std::max_element(rec.begin(), rec.end()));
    stats["checkpoints"] = cs;
  }
  if (on("ada-liveness")) {
    LivenessResult l = check_rule_liveness(ix, Rule::ada, cfg.analysis.liveness_c,
                                           cfg.analysis.liveness_c_prime, from);
    std::vector<Violation> v;
    if (!l.live) {
      v.push_back({"ada-liveness", l.worst_s, l.worst_node,
                   fmt("deficit %.3f over [%.6g, %.6g]", l.worst_deficit, l.worst_r, l.worst_s)});
    }
    add("ada-liveness", v);
    checks["ada-liveness"]["worstDeficit"] = l.worst_deficit;
  }
  {
    auto slots = compute_yz(trace, cfg.delta);
    YBar yb = expected_ybar(cfg.beta, cfg.lambda, cfg.delta);
    double ys = 0.0, zs = 0.0;
    for (const auto& s : slots) {
      ys += s.y;
      zs += s.z;
    }
    double n = slots.empty() ? 1.0 : static_cast<double>(slots.size());
    stats["slots"] = {{"count", slots.size()}, {"meanY", ys / n},   {"meanZ", zs / n},
                      {"ybar", yb.ybar},       {"zbar", yb.zbar},    {"regimeWarning", yb.regime_warning}};
    if (on("typical")) {
      TypicalParams tp{cfg.analysis.typical_epsilon, cfg.analysis.typical_tau};
      TypicalResult t = check_typical(slots, yb.ybar, yb.zbar, tp);
      nlohmann::json w = nlohmann::json::array();
      if (!t.typical) w.push_back({{"condition", t.condition}, {"t1", t.t1}, {"t2", t.t2}});
      checks["typical"] = result(t.typical, t.typical ? 0 : 1, w);
    }
    if (!cpv.empty()) {
      // Window statistics preceding the first common-prefix violation.
      std::uint64_t end = std::min<std::uint64_t>(slot_of(cpv.front().time, cfg.delta), slots.size());
      std::uint64_t begin = end > cfg.analysis.typical_tau ? end - cfg.analysis.typical_tau : 0;
      double wy = 0.0, wz = 0.0;
      for (std::uint64_t i = begin; i < end; ++i) {
        wy += slots[i].y;
        wz += slots[i].z;
      }
      stats["firstPrefixViolationWindow"] = {{"fromSlot", begin}, {"toSlot", end}, {"Y", wy}, {"Z", wz}};
    }
  }
  if (on("vote-multiplicity")) add("vote-multiplicity", check_vote_multiplicity(ix));
  if (on("next-quorum-structure")) add("next-quorum-structure", check_next_quorum_structure(ix));
  if (on("deadlock")) add("deadlock", check_deadlock(ix));
  if (on("audit-delivery")) add("audit-delivery", audit_deliveries(ix));
  if (on("audit-capability")) add("audit-capability", audit_capability(ix));
  if (on("audit-confirm")) add("audit-confirm", audit_confirmations(ix));
  if (on("audit-heights")) add("audit-heights", audit_heights(ix));

  for (const std::string& name : cfg.checkers.must_pass) {
    if (!checks.contains(name) || !checks[name]["pass"].get<bool>()) rep.must_pass_ok = false;
  }
  for (const auto& [name, c] : checks.items()) {
    if (name.rfind("audit-", 0) == 0 && !c["pass"].get<bool>()) rep.audits_ok = false;
  }
  rep.json = {{"scenario", cfg.name},
              {"seed", trace.seed},
              {"records", trace.records.size()},
              {"digest", fmt("%016llx", static_cast<unsigned long long>(trace_digest(trace)))},
              {"mustPass", cfg.checkers.must_pass},
              {"mustPassOk", rep.must_pass_ok},
              {"auditsOk", rep.audits_ok},
              {"checkers", checks},
              {"stats", stats}};
  return rep;
}

}  // namespace clc
