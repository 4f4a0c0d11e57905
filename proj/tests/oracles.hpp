#pragma once

// Brute-force reference implementations used to cross-check the analytics.

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "clc/analytics.hpp"

namespace oracle {

using namespace clc;

inline std::vector<BlockId> path(const BlockTree& t, BlockId b) {
  std::vector<BlockId> p;
  for (BlockId x = b; x != kNoBlock; x = t.at(x).parent) p.push_back(x);
  std::reverse(p.begin(), p.end());
  return p;
}

// Chain of `b` minus its last k blocks is a prefix of the chain of `c`.
inline bool truncated_prefix(const BlockTree& t, BlockId b, std::uint32_t k, BlockId c) {
  auto pb = path(t, b), pc = path(t, c);
  std::size_t keep = pb.size() > k ? pb.size() - k : 1;
  if (keep > pc.size()) return false;
  return std::equal(pb.begin(), pb.begin() + static_cast<long>(keep), pc.begin());
}

struct Holding {
  BlockId tip;
  SimTime s, e;
};

// Holdings [s, e) per node; changes at one instant collapse to the last one.
inline std::vector<Holding> holdings(const BlockTree& t, std::uint32_t n,
                                     const std::vector<TipChange>& changes) {
  std::vector<Holding> out;
  std::vector<BlockId> cur(n, t.root());
  std::vector<SimTime> since(n, 0.0);
  std::size_t i = 0;
  while (i < changes.size()) {
    SimTime s = changes[i].time;
    std::vector<BlockId> next = cur;
    for (; i < changes.size() && changes[i].time == s; ++i) next[changes[i].node] = changes[i].tip;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (next[v] == cur[v]) continue;
      if (cur[v] != kNoBlock && since[v] < s) out.push_back({cur[v], since[v], s});
      cur[v] = next[v];
      since[v] = s;
    }
  }
  for (std::uint32_t v = 0; v < n; ++v) {
    if (cur[v] != kNoBlock) out.push_back({cur[v], since[v], 1e300});
  }
  return out;
}

// Instants at which some pair of overlapping-or-ordered holdings violates
// the k-common prefix property.
inline std::set<SimTime> common_prefix_times(const BlockTree& t, std::uint32_t n,
                                             const std::vector<TipChange>& changes,
                                             std::uint32_t k) {
  auto h = holdings(t, n, changes);
  std::set<SimTime> out;
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (std::size_t j = 0; j < h.size(); ++j) {
      if (i == j || !(h[i].s < h[j].e)) continue;
      if (!truncated_prefix(t, h[i].tip, k, h[j].tip)) out.insert(std::max(h[i].s, h[j].s));
    }
  }
  return out;
}

inline std::set<std::size_t> chain_quality_changes(const BlockTree& t,
                                                   const std::vector<TipChange>& changes,
                                                   std::uint32_t k, SimTime s) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < changes.size(); ++i) {
    if (changes[i].tip == kNoBlock) continue;
    std::uint32_t run = 0, best = 0;
    for (BlockId b : path(t, changes[i].tip)) {
      const Block& blk = t.at(b);
      run = blk.miner_kind == MinerKind::adversarial && blk.mine_time > s ? run + 1 : 0;
      best = std::max(best, run);
    }
    if (k > 0 && best >= k) out.insert(i);
  }
  return out;
}

struct Typical {
  bool typical = true;
  int condition = 0;
  std::uint64_t t2 = 0;
};

inline Typical typical(const std::vector<double>& y, const std::vector<double>& z, double ey,
                       double ez, double eps, std::uint64_t tau) {
  const std::size_t T = y.size();
  for (std::uint64_t t2 = tau; t2 <= T; ++t2) {
    for (int c = 1; c <= 3; ++c) {
      for (std::uint64_t t1 = 0; t1 + tau <= t2; ++t1) {
        double Y = 0, Z = 0;
        for (std::uint64_t i = t1; i < t2; ++i) {
          Y += y[i];
          Z += z[i];
        }
        double L = static_cast<double>(t2 - t1);
        bool ok = c == 1   ? std::abs(Y - ey * L) <= eps * ey * L + 1e-9
                  : c == 2 ? std::abs(Z - ez * L) <= eps * ey * L + 1e-9
                           : std::abs(Y + Z - (ey + ez) * L) <= eps * (ey + ez) * L + 1e-9;
        if (!ok) return {false, c, t2};
      }
    }
  }
  return {};
}

// Random tree and random honest tip changes (kNoBlock = offline).
struct MicroTrace {
  BlockTree tree;
  std::uint32_t nodes = 0;
  std::vector<TipChange> changes;
};

inline MicroTrace micro_trace(std::mt19937_64& rng, std::size_t events) {
  MicroTrace m;
  m.tree = BlockTree::with_genesis();
  m.nodes = 2 + static_cast<std::uint32_t>(rng() % 4);
  const BlockId blocks = 10 + static_cast<BlockId>(rng() % 40);
  for (BlockId id = 1; id < blocks; ++id) {
    Block b;
    b.id = id;
    BlockId lo = id > 4 ? id - 4 : 0;
    b.parent = lo + static_cast<BlockId>(rng() % (id - lo));
    b.mine_time = static_cast<double>(id);
    b.miner_kind = rng() % 3 == 0 ? MinerKind::honest : MinerKind::adversarial;
    m.tree.append(b);
  }
  SimTime t = 0.0;
  for (std::size_t i = 0; i < events; ++i) {
    if (rng() % 3 != 0) t += 1.0;  // repeated instants are common
    auto node = static_cast<NodeId>(rng() % m.nodes);
    BlockId tip = rng() % 10 == 0 ? kNoBlock : static_cast<BlockId>(rng() % blocks);
    m.changes.push_back({t, node, tip, i});
  }
  return m;
}

}  // namespace oracle
