#include "clc/trace.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "clc/error.hpp"

namespace clc {
namespace {

struct KindInfo {
  const char* name;
  // wire names for a, b, c, d, e, x, list; nullptr = unused
  std::array<const char*, 7> fields;
};

constexpr std::array<KindInfo, static_cast<std::size_t>(RecordKind::kCount)> kKinds = {{
    {"block-mined", {"block", "parent", "height", "adversarial", nullptr, nullptr, nullptr}},
    {"chain-adopt", {"tip", "old", "height", nullptr, nullptr, nullptr, nullptr}},
    {"chain-truncate", {"tip", "old", "height", nullptr, nullptr, nullptr, nullptr}},
    {"checkpoint-mark", {"iteration", "block", nullptr, nullptr, nullptr, nullptr, nullptr}},
    {"confirm-set-change", {"fin", "ada", nullptr, nullptr, nullptr, nullptr, nullptr}},
    {"vote-cast", {"iteration", "period", "vote", "value", "byzantine", nullptr, nullptr}},
    {"proposal", {"iteration", "period", nullptr, "value", "byzantine", nullptr, nullptr}},
    {"leader", {"iteration", "period", nullptr, nullptr, "byzantine", nullptr, nullptr}},
    {"period-start", {"iteration", "period", "st", "vi", nullptr, nullptr, nullptr}},
    {"next-quorum", {"iteration", "period", nullptr, "value", nullptr, nullptr, nullptr}},
    {"iteration-halt", {"iteration", "period", "value", "checkpoint", nullptr, nullptr, "voters"}},
    {"certificate-broadcast", {"iteration", nullptr, "value", nullptr, nullptr, nullptr, nullptr}},
    {"delivery", {"msg", "sender", "msgKind", "deferred", nullptr, "sent", nullptr}},
    {"mining-opportunity", {nullptr, nullptr, nullptr, "adversarial", "dropped", nullptr, nullptr}},
    {"online", {nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr}},
    {"offline", {nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr}},
    {"withhold", {"block", nullptr, nullptr, nullptr, nullptr, nullptr, nullptr}},
    {"release", {"tip", "height", "base", nullptr, nullptr, nullptr, nullptr}},
    {"equivocation", {"iteration", "period", "vote", nullptr, nullptr, nullptr, nullptr}},
    {"p1-breach", {"iteration", "block", "previous", nullptr, nullptr, nullptr, nullptr}},
}};

const KindInfo& info(RecordKind k) { return kKinds.at(static_cast<std::size_t>(k)); }

void append_double(std::string& s, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  s += buf;
}

void append_int(std::string& s, std::int64_t v) { s += std::to_string(v); }

void fnv(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string_view to_string(RecordKind k) { return info(k).name; }

RecordKind record_kind_from(std::string_view s) {
  for (std::size_t i = 0; i < kKinds.size(); ++i) {
    if (s == kKinds[i].name) return static_cast<RecordKind>(i);
  }
  throw Error(ErrorCode::TraceFormat, "unknown record kind " + std::string(s));
}

TraceRecord& Trace::add(SimTime time, RecordKind kind, NodeId node) {
  TraceRecord& r = records.emplace_back();
  r.time = time;
  r.seq = records.size() - 1;
  r.kind = kind;
  r.node = node;
  return r;
}

std::string record_to_line(const TraceRecord& r) {
  std::string s;
  s.reserve(128);
  s += "{\"t\":";
  append_double(s, r.time);
  s += ",\"seq\":";
  append_int(s, static_cast<std::int64_t>(r.seq));
  s += ",\"kind\":\"";
  s += info(r.kind).name;
  s += '"';
  if (r.node != kNoNode) {
    s += ",\"node\":";
    append_int(s, r.node);
  }
  const auto& f = info(r.kind).fields;
  const std::int64_t ints[5] = {r.a, r.b, r.c, r.d, r.e};
  for (int i = 0; i < 5; ++i) {
    if (!f[i]) continue;
    s += ",\"";
    s += f[i];
    s += "\":";
    append_int(s, ints[i]);
  }
  if (f[5]) {
    s += ",\"";
    s += f[5];
    s += "\":";
    append_double(s, r.x);
  }
  if (f[6]) {
    s += ",\"";
    s += f[6];
    s += "\":[";
    for (std::size_t i = 0; i < r.list.size(); ++i) {
      if (i) s += ',';
      append_int(s, r.list[i]);
    }
    s += ']';
  }
  s += '}';
  return s;
}

TraceRecord record_from_json(const nlohmann::json& j) {
  try {
    TraceRecord r;
    r.time = j.at("t").get<double>();
    r.seq = j.at("seq").get<std::uint64_t>();
    r.kind = record_kind_from(j.at("kind").get<std::string>());
    r.node = j.contains("node") ? j["node"].get<NodeId>() : kNoNode;
    const auto& f = info(r.kind).fields;
    std::int64_t* ints[5] = {&r.a, &r.b, &r.c, &r.d, &r.e};
    for (int i = 0; i < 5; ++i) {
      if (f[i]) *ints[i] = j.at(f[i]).get<std::int64_t>();
    }
    if (f[5]) r.x = j.at(f[5]).get<double>();
    if (f[6]) r.list = j.at(f[6]).get<std::vector<std::int64_t>>();
    return r;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::TraceFormat, ex.what());
  }
}

std::uint64_t trace_digest(const Trace& trace) {
  std::uint64_t h = 1469598103934665603ull;
  for (const TraceRecord& r : trace.records) {
    fnv(h, &r.time, sizeof r.time);
    fnv(h, &r.seq, sizeof r.seq);
    fnv(h, &r.node, sizeof r.node);
    fnv(h, &r.kind, sizeof r.kind);
    const std::int64_t ints[5] = {r.a, r.b, r.c, r.d, r.e};
    fnv(h, ints, sizeof ints);
    fnv(h, &r.x, sizeof r.x);
    for (std::int64_t v : r.list) fnv(h, &v, sizeof v);
  }
  return h;
}

void write_trace(std::ostream& out, const Trace& trace) {
  nlohmann::json header = {{"kind", "header"},
                           {"schemaVersion", kTraceSchemaVersion},
                           {"seed", trace.seed},
                           {"config", trace.config}};
  out << header.dump() << '\n';
  for (const TraceRecord& r : trace.records) out << record_to_line(r) << '\n';
  nlohmann::json footer = {{"kind", "end"},
                           {"records", trace.records.size()},
                           {"digest", hex64(trace_digest(trace))}};
  out << footer.dump() << '\n';
}

std::string trace_to_string(const Trace& trace) {
  std::ostringstream os;
  write_trace(os, trace);
  return os.str();
}

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string line;
  bool have_header = false;
  bool have_footer = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (have_footer) {
      throw Error(ErrorCode::TraceFormat, "data after footer at line " + std::to_string(lineno));
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::TruncatedTrace, "unparsable line " + std::to_string(lineno));
    }
    std::string kind = j.value("kind", "");
    if (!have_header) {
      if (kind != "header") throw Error(ErrorCode::TraceFormat, "missing header");
      if (j.value("schemaVersion", 0) != kTraceSchemaVersion) {
        throw Error(ErrorCode::TraceFormat, "unsupported schema version");
      }
      trace.seed = j.at("seed").get<std::uint64_t>();
      trace.config = j.at("config");
      have_header = true;
      continue;
    }
    if (kind == "end") {
      if (j.at("records").get<std::size_t>() != trace.records.size()) {
        throw Error(ErrorCode::TruncatedTrace, "record count mismatch");
      }
      if (j.at("digest").get<std::string>() != hex64(trace_digest(trace))) {
        throw Error(ErrorCode::TraceFormat, "digest mismatch");
      }
      have_footer = true;
      continue;
    }
    trace.records.push_back(record_from_json(j));
  }
  if (!have_header) throw Error(ErrorCode::TruncatedTrace, "empty trace");
  if (!have_footer) throw Error(ErrorCode::TruncatedTrace, "missing footer");
  return trace;
}

Trace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_trace(in);
}

void write_trace_file(const std::string& path, const Trace& trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  write_trace(out, trace);
  if (!out) throw Error(ErrorCode::IoError, "write failed " + path);
}

}  // namespace clc
