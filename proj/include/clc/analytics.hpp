#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clc/block_tree.hpp"
#include "clc/config.hpp"
#include "clc/trace.hpp"

namespace clc {

struct Violation {
  std::string property;
  SimTime time = 0.0;
  NodeId node = kNoNode;
  std::string witness;
};

// Trace plus the structures every checker needs: the replayed block tree and
// the per-node tip history.
struct TraceIndex {
  const Trace* trace = nullptr;
  ScenarioConfig cfg;
  BlockTree tree;
  std::uint32_t n_honest = 0;
  std::vector<std::uint8_t> adversarial;  // per block id

  bool is_honest(NodeId id) const { return id >= 0 && id < static_cast<NodeId>(n_honest); }
  bool is_honest_checkpointer(NodeId id) const {
    return is_honest(id) && id >= static_cast<NodeId>(cfg.n_miners);
  }
};

TraceIndex index_trace(const Trace& trace);

// ---- slot statistics ----

struct SlotStats {
  std::uint64_t slot = 0;  // 1-based; slot i covers ((i-1)Δ, iΔ]
  std::uint32_t honest = 0;
  std::uint32_t adversarial = 0;
  std::uint32_t y = 0;
  std::uint32_t z = 0;
};

// Slot of time t: the i with (i-1)Δ < t <= iΔ.
std::uint64_t slot_of(SimTime t, SimTime delta);

// From per-slot honest and adversarial block counts.
std::vector<SlotStats> classify_slots(const std::vector<std::uint32_t>& honest,
                                      const std::vector<std::uint32_t>& adversarial);
std::vector<SlotStats> compute_yz(const Trace& trace, SimTime delta);

struct YBar {
  double ybar = 0.0;
  double zbar = 0.0;
  bool regime_warning = false;  // λΔ >= 1
};
YBar expected_ybar(double beta, double lambda, double delta);

struct TypicalParams {
  double epsilon = 0.2;
  std::uint64_t tau = 500;
};

struct TypicalResult {
  bool typical = true;
  int condition = 0;  // 1..3, first failing inequality
  std::uint64_t t1 = 0, t2 = 0;
};

// Expected per-slot means are supplied by the caller (usually expected_ybar).
// Windows are Y[t1,t2] = sum over slots t1+1..t2 with t2 - t1 >= tau.
TypicalResult check_typical(const std::vector<double>& y, const std::vector<double>& z,
                            double ey, double ez, const TypicalParams& p);
TypicalResult check_typical(const std::vector<SlotStats>& stats, double ey, double ez,
                            const TypicalParams& p);

// ---- chain properties ----

// Honest tip changes in trace order. Going offline is a change to kNoBlock
// (nothing held); coming online re-announces the current tip.
struct TipChange {
  SimTime time = 0.0;
  NodeId node = kNoNode;
  BlockId tip = kGenesis;
  std::size_t record = 0;
};
std::vector<TipChange> tip_changes(const TraceIndex& ix);

struct PrefixViolation {
  SimTime time = 0.0;
  BlockId earlier = kNoBlock;  // chain whose k-truncation is not a prefix
  BlockId later = kNoBlock;    // of this chain
};

// Violations of the k-common prefix property, one per instant at which a
// new violating pair of honest chains first appears.
std::vector<PrefixViolation> check_common_prefix(const TraceIndex& ix, std::uint32_t k);
std::vector<PrefixViolation> check_common_prefix(const BlockTree& tree, std::uint32_t n_nodes,
                                                 const std::vector<TipChange>& changes,
                                                 std::uint32_t k);

struct QualityViolation {
  SimTime time = 0.0;
  NodeId node = kNoNode;
  BlockId tip = kNoBlock;
  std::size_t change = 0;  // index into the tip change list
};

// Adopted honest chains holding k consecutive adversarial blocks mined after s.
std::vector<QualityViolation> check_chain_quality(const BlockTree& tree,
                                                  const std::vector<TipChange>& changes,
                                                  std::uint32_t k, SimTime s);
std::vector<QualityViolation> check_chain_quality(const TraceIndex& ix, std::uint32_t k,
                                                  SimTime s);

enum class Rule { fin, ada };
std::vector<Violation> check_rule_safety(const TraceIndex& ix, Rule rule);

struct LivenessResult {
  bool live = true;
  double worst_deficit = 0.0;  // max over windows of c(s-r) - new blocks
  SimTime worst_r = 0.0, worst_s = 0.0;
  NodeId worst_node = kNoNode;
};
LivenessResult check_rule_liveness(const TraceIndex& ix, Rule rule, double c, double c_prime,
                                   SimTime from);

// confirmFin ⊆ confirmAda evaluated with k' = k.
std::vector<Violation> check_nesting(const TraceIndex& ix, std::uint32_t k);

std::vector<Violation> check_cp0(const TraceIndex& ix);
std::vector<Violation> check_vote_multiplicity(const TraceIndex& ix);
std::vector<Violation> check_next_quorum_structure(const TraceIndex& ix);
std::vector<Violation> check_deadlock(const TraceIndex& ix);

// ---- checkpoint measurements ----

struct CheckpointInfo {
  std::uint32_t iteration = 0;
  BlockId block = kNoBlock;
  SimTime appear = 0.0;
  double recency = std::numeric_limits<double>::infinity();  // in time units
};
std::vector<CheckpointInfo> measure_recency(const TraceIndex& ix);

struct IterationInfo {
  std::uint32_t iteration = 0;
  std::uint32_t deciding_period = 0;
  bool first_leader_byzantine = false;
  SimTime first_halt = 0.0;
  SimTime last_halt = 0.0;
  double max_halt_latency = 0.0;  // halt minus own start of the deciding period
  std::uint32_t halts = 0;
};

struct Cadence {
  std::vector<CheckpointInfo> checkpoints;
  std::vector<double> gaps;  // between consecutive appearances
  std::vector<IterationInfo> iterations;
  std::vector<double> malicious_advance;  // per node and byzantine-leader period
  std::uint32_t leader_periods = 0;
  std::uint32_t byzantine_leader_periods = 0;
};
Cadence measure_cadence(const TraceIndex& ix);

// ---- audits ----

std::vector<Violation> audit_deliveries(const TraceIndex& ix);
std::vector<Violation> audit_capability(const TraceIndex& ix);
std::vector<Violation> audit_confirmations(const TraceIndex& ix);
std::vector<Violation> audit_heights(const TraceIndex& ix);

// ---- report ----

// All checker names accepted in checkers.enabled / checkers.mustPass.
const std::vector<std::string>& checker_names();

struct Report {
  nlohmann::json json;
  bool must_pass_ok = true;
  bool audits_ok = true;
};

Report analyze(const Trace& trace);

double quantile(std::vector<double> v, double q);

}  // namespace clc
