#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "clc/types.hpp"

namespace clc {

inline constexpr int kTraceSchemaVersion = 1;

enum class RecordKind : std::uint8_t {
  block_mined,
  chain_adopt,
  chain_truncate,
  checkpoint_mark,
  confirm_change,
  vote_cast,
  proposal,
  leader,
  period_start,
  next_quorum,
  iteration_halt,
  certificate_broadcast,
  delivery,
  mining_opportunity,
  online,
  offline,
  withhold,
  release,
  equivocation,
  p1_breach,
  kCount,
};

std::string_view to_string(RecordKind k);
RecordKind record_kind_from(std::string_view s);

// Generic record. The meaning of a..e, x and list depends on the kind; the
// field names used on the wire are listed in trace.cpp.
//
//   block_mined       node=miner a=block b=parent c=height d=adversarial
//   chain_adopt       a=new tip b=old tip c=new height
//   chain_truncate    same as chain_adopt, emitted when the height does not grow
//   checkpoint_mark   a=iteration b=block
//   confirm_change    a=fin tip b=ada tip
//   vote_cast         node=voter a=iteration b=period c=kind d=value(-1 = ⊥) e=byzantine
//   proposal          node=proposer a=iteration b=period d=value e=byzantine
//   leader            node=leader a=iteration b=period e=byzantine
//   period_start      a=iteration b=period c=st d=vi
//   next_quorum       a=iteration b=quorum period d=value
//   iteration_halt    a=iteration b=period c=value d=checkpoint block list=voters
//   certificate_broadcast a=iteration c=value
//   delivery          node=recipient a=message b=sender (relay) c=message kind d=deferred
//                     x=send time
//   mining_opportunity node=miner d=adversarial e=dropped
//   online/offline    node
//   withhold          a=block
//   release           a=tip b=height c=fork base
//   equivocation      node=voter a=iteration b=period c=kind
//   p1_breach         a=iteration b=block c=previous checkpoint
struct TraceRecord {
  SimTime time = 0.0;
  std::uint64_t seq = 0;
  NodeId node = kNoNode;
  RecordKind kind = RecordKind::block_mined;
  std::int64_t a = 0, b = 0, c = 0, d = 0, e = 0;
  double x = 0.0;
  std::vector<std::int64_t> list;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct Trace {
  nlohmann::json config;  // full scenario config as run
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;

  // Appends with the next sequence number.
  TraceRecord& add(SimTime time, RecordKind kind, NodeId node);
};

// JSONL: header line, one line per record, footer with count and digest.
void write_trace(std::ostream& out, const Trace& trace);
std::string trace_to_string(const Trace& trace);
Trace read_trace(std::istream& in);
Trace read_trace_file(const std::string& path);
void write_trace_file(const std::string& path, const Trace& trace);

std::string record_to_line(const TraceRecord& r);
TraceRecord record_from_json(const nlohmann::json& j);

// FNV-1a over the serialized record lines.
std::uint64_t trace_digest(const Trace& trace);

}  // namespace clc
