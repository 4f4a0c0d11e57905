#include "clc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "clc/error.hpp"

namespace clc {
namespace {

using nlohmann::json;

// Reads fields of one JSON object, remembering which keys were consumed so
// leftovers can be reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      fail(key, "wrong type");
    }
  }

  template <typename T>
  void get(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      fail(key, "wrong type");
    }
  }

  void get_enum(const char* key, std::string& out, std::initializer_list<const char*> allowed) {
    get(key, out);
    for (const char* a : allowed) {
      if (out == a) return;
    }
    fail(key, "unsupported value '" + out + "'");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const char* key) const { return j_.at(key); }
  std::string sub(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(it.key(), "unknown field");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    std::string p = path_;
    if (!key.empty()) p = p.empty() ? key : p + "." + key;
    throw Error(ErrorCode::ConfigError, (p.empty() ? "<root>" : p) + ": " + msg);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

VoteKind vote_kind_from(const std::string& s, const Reader& r) {
  if (s == "soft") return VoteKind::soft;
  if (s == "cert") return VoteKind::cert;
  if (s == "next") return VoteKind::next;
  r.fail("kind", "unknown vote kind '" + s + "'");
}

const char* vote_kind_name(VoteKind k) {
  switch (k) {
    case VoteKind::soft: return "soft";
    case VoteKind::cert: return "cert";
    case VoteKind::next: return "next";
  }
  return "soft";
}

}  // namespace

double ScenarioConfig::d_recency_delta() const {
  if (d_recency) return *d_recency;
  return 8.0 * std::ceil(std::sqrt(static_cast<double>(kappa_sim)));
}

double ScenarioConfig::e_delta() const {
  if (e) return *e;
  return 10.0 * d_recency_delta();
}

std::uint32_t ScenarioConfig::checkpoint_depth() const {
  if (variant.enforce_p3 || !variant.checkpoint_depth_override) return k;
  return *variant.checkpoint_depth_override;
}

ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig c;
  Reader r(j, "");
  r.get("schemaVersion", c.schema_version);
  if (c.schema_version != kConfigSchemaVersion) r.fail("schemaVersion", "unsupported version");
  r.get("name", c.name);
  r.get("description", c.description);
  r.get("inModel", c.in_model);
  r.get("durationDelta", c.duration);
  r.get("flushDelta", c.flush);
  r.get("delta", c.delta);
  r.get("lambda", c.lambda);
  r.get("beta", c.beta);
  r.get("nMiners", c.n_miners);
  r.get("nCheckpointers", c.n_checkpointers);
  r.get("byzantineCheckpointers", c.byzantine_checkpointers);
  r.get("k", c.k);
  r.get("kPrime", c.k_prime);
  r.get("kappaSim", c.kappa_sim);
  r.get("e", c.e);
  r.get("dRecency", c.d_recency);
  r.get("seed", c.seed);

  if (r.has("network")) {
    Reader n(r.at("network"), "network");
    n.get_enum("mode", c.network.mode, {"M1", "M2"});
    n.get("gst", c.network.gst);
    n.get_enum("delay", c.network.delay, {"max", "uniform"});
    n.get_enum("preGst", c.network.pre_gst, {"maximal", "uniform", "partition"});
    n.get("partitionFraction", c.network.partition_fraction);
    n.finish();
  }
  if (r.has("participation")) {
    Reader p(r.at("participation"), "participation");
    p.get_enum("mode", c.participation.mode, {"U1", "U2"});
    p.get("minerFloor", c.participation.miner_floor);
    p.get("churnEpoch", c.participation.churn_epoch);
    p.get("churnCheckpointers", c.participation.churn_checkpointers);
    p.get("onlineCheckpointers", c.participation.online_checkpointers);
    if (p.has("schedule")) {
      const json& s = p.at("schedule");
      if (!s.is_array()) p.fail("schedule", "expected an array");
      for (std::size_t i = 0; i < s.size(); ++i) {
        Reader e(s[i], "participation.schedule[" + std::to_string(i) + "]");
        OnlineInterval iv;
        e.get("node", iv.node);
        e.get("from", iv.from);
        e.get("to", iv.to);
        e.finish();
        c.participation.schedule.push_back(iv);
      }
    }
    p.finish();
  }
  if (r.has("adversary")) {
    Reader a(r.at("adversary"), "adversary");
    a.get_enum("strategy", c.adversary.strategy,
               {"none", "private-chain", "balance", "grandpa-rollback"});
    a.get_enum("checkpointers", c.adversary.checkpointers, {"silent", "equivocate", "scripted"});
    a.get_enum("tieBreak", c.adversary.tie_break, {"incumbent", "adversarial"});
    a.get("forkDepth", c.adversary.fork_depth);
    a.get("giveUpDeficit", c.adversary.give_up_deficit);
    if (a.has("script")) {
      const json& s = a.at("script");
      if (!s.is_array()) a.fail("script", "expected an array");
      for (std::size_t i = 0; i < s.size(); ++i) {
        Reader v(s[i], "adversary.script[" + std::to_string(i) + "]");
        Vote vote;
        std::string kind = "soft";
        std::int64_t value = -1;
        double at = 0.0;
        v.get("kind", kind);
        vote.kind = vote_kind_from(kind, v);
        v.get("value", value);
        vote.value = value < 0 ? kBottom : static_cast<Value>(value);
        v.get("iteration", vote.iteration);
        v.get("period", vote.period);
        v.get("voter", vote.voter);
        v.get("at", at);
        v.finish();
        c.adversary.script.push_back(vote);
        c.adversary.script_times.push_back(at);
      }
    }
    a.finish();
  }
  if (r.has("variant")) {
    Reader v(r.at("variant"), "variant");
    v.get("enforceP2", c.variant.enforce_p2);
    v.get("enforceP3", c.variant.enforce_p3);
    v.get("checkpointDepthOverride", c.variant.checkpoint_depth_override);
    v.finish();
  }
  if (r.has("checkers")) {
    Reader k(r.at("checkers"), "checkers");
    k.get("enabled", c.checkers.enabled);
    k.get("mustPass", c.checkers.must_pass);
    k.finish();
  }
  if (r.has("analysis")) {
    Reader a(r.at("analysis"), "analysis");
    a.get("cGst", c.analysis.c_gst);
    a.get("offset", c.analysis.offset);
    a.get("typicalEpsilon", c.analysis.typical_epsilon);
    a.get("typicalTau", c.analysis.typical_tau);
    a.get("qualityS", c.analysis.quality_s);
    a.get("qualityK", c.analysis.quality_k);
    a.get("livenessC", c.analysis.liveness_c);
    a.get("livenessCPrime", c.analysis.liveness_c_prime);
    a.finish();
  }
  if (r.has("output")) {
    Reader o(r.at("output"), "output");
    o.get("dir", c.output.dir);
    o.get("trace", c.output.trace);
    o.get("csv", c.output.csv);
    o.get("deliveries", c.output.deliveries);
    o.finish();
  }
  r.finish();
  validate(c);
  return c;
}

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["schemaVersion"] = c.schema_version;
  j["name"] = c.name;
  j["description"] = c.description;
  j["inModel"] = c.in_model;
  j["durationDelta"] = c.duration;
  j["flushDelta"] = c.flush;
  j["delta"] = c.delta;
  j["lambda"] = c.lambda;
  j["beta"] = c.beta;
  j["nMiners"] = c.n_miners;
  j["nCheckpointers"] = c.n_checkpointers;
  j["byzantineCheckpointers"] = c.byzantine_checkpointers;
  j["k"] = c.k;
  j["kPrime"] = c.k_prime;
  j["kappaSim"] = c.kappa_sim;
  if (c.e) j["e"] = *c.e;
  if (c.d_recency) j["dRecency"] = *c.d_recency;
  j["seed"] = c.seed;
  j["network"] = {{"mode", c.network.mode},
                  {"gst", c.network.gst},
                  {"delay", c.network.delay},
                  {"preGst", c.network.pre_gst},
                  {"partitionFraction", c.network.partition_fraction}};
  json sched = json::array();
  for (const auto& iv : c.participation.schedule) {
    sched.push_back({{"node", iv.node}, {"from", iv.from}, {"to", iv.to}});
  }
  j["participation"] = {{"mode", c.participation.mode},
                        {"minerFloor", c.participation.miner_floor},
                        {"churnEpoch", c.participation.churn_epoch},
                        {"churnCheckpointers", c.participation.churn_checkpointers},
                        {"onlineCheckpointers", c.participation.online_checkpointers},
                        {"schedule", sched}};
  json script = json::array();
  for (std::size_t i = 0; i < c.adversary.script.size(); ++i) {
    const Vote& v = c.adversary.script[i];
    script.push_back({{"kind", vote_kind_name(v.kind)},
                      {"value", v.value == kBottom ? std::int64_t{-1} : std::int64_t{v.value}},
                      {"iteration", v.iteration},
                      {"period", v.period},
                      {"voter", v.voter},
                      {"at", c.adversary.script_times.at(i)}});
  }
  j["adversary"] = {{"strategy", c.adversary.strategy},
                    {"checkpointers", c.adversary.checkpointers},
                    {"tieBreak", c.adversary.tie_break},
                    {"forkDepth", c.adversary.fork_depth},
                    {"giveUpDeficit", c.adversary.give_up_deficit},
                    {"script", script}};
  j["variant"] = {{"enforceP2", c.variant.enforce_p2}, {"enforceP3", c.variant.enforce_p3}};
  if (c.variant.checkpoint_depth_override) {
    j["variant"]["checkpointDepthOverride"] = *c.variant.checkpoint_depth_override;
  }
  j["checkers"] = {{"enabled", c.checkers.enabled}, {"mustPass", c.checkers.must_pass}};
  j["analysis"] = {{"cGst", c.analysis.c_gst},
                   {"offset", c.analysis.offset},
                   {"typicalEpsilon", c.analysis.typical_epsilon},
                   {"typicalTau", c.analysis.typical_tau},
                   {"qualityS", c.analysis.quality_s},
                   {"livenessC", c.analysis.liveness_c},
                   {"livenessCPrime", c.analysis.liveness_c_prime}};
  if (c.analysis.quality_k) j["analysis"]["qualityK"] = *c.analysis.quality_k;
  j["output"] = {{"dir", c.output.dir},
                 {"trace", c.output.trace},
                 {"csv", c.output.csv},
                 {"deliveries", c.output.deliveries}};
  return j;
}

json read_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::ConfigError, path + ": " + ex.what());
  }
}

ScenarioConfig load_config(const std::string& path) {
  return config_from_json(read_config_json(path));
}

void apply_override(json& doc, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::ConfigError, "override must be path=value: " + assignment);
  }
  std::string path = assignment.substr(0, eq);
  std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* cur = &doc;
  std::size_t start = 0;
  for (;;) {
    auto dot = path.find('.', start);
    std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw Error(ErrorCode::ConfigError, "bad override path " + path);
    if (!cur->is_object()) {
      throw Error(ErrorCode::ConfigError, "override path " + path + " crosses a non-object");
    }
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    cur = &(*cur)[key];
    if (cur->is_null()) *cur = json::object();
    start = dot + 1;
  }
}

std::vector<std::string> validate(const ScenarioConfig& c) {
  std::vector<std::string> warnings;
  auto bad = [](const std::string& m) { throw Error(ErrorCode::ScenarioInvalid, m); };
  if (!(c.delta > 0)) bad("delta must be positive");
  if (!(c.lambda > 0)) bad("lambda must be positive");
  if (c.beta < 0 || c.beta >= 1) bad("beta must lie in [0, 1)");
  if (c.duration < 0 || c.flush < 0) bad("durations must be non-negative");
  if (c.n_miners < 1) bad("nMiners must be at least 1");
  if (c.n_checkpointers < 1) bad("nCheckpointers must be at least 1");
  if (c.byzantine_checkpointers > c.n_checkpointers) bad("more byzantine than checkpointers");
  if (c.honest_checkpointers() < 1) bad("need at least one honest checkpointer");
  if (c.k < 1) bad("k must be at least 1");
  if (c.k_prime < 1) bad("kPrime must be at least 1");
  if (c.in_model && c.byzantine_checkpointers > c.t()) {
    bad("byzantineCheckpointers exceeds t; tag the scenario inModel=false");
  }
  if (c.e_delta() < 10.0 * c.d_recency_delta()) bad("e must be at least 10 * dRecency");
  if (c.network.mode == "M1" && c.network.gst < 0) bad("gst must be non-negative");
  if (c.network.partition_fraction <= 0 || c.network.partition_fraction >= 1) {
    bad("partitionFraction must lie in (0, 1)");
  }
  if (c.participation.miner_floor < 0 || c.participation.miner_floor > 1) {
    bad("minerFloor must lie in [0, 1]");
  }
  if (!(c.participation.churn_epoch > 0)) bad("churnEpoch must be positive");
  if (c.participation.online_checkpointers > static_cast<int>(c.honest_checkpointers())) {
    bad("onlineCheckpointers exceeds the honest checkpointer count");
  }
  std::uint32_t n_nodes = c.n_miners + c.n_checkpointers;
  for (const auto& iv : c.participation.schedule) {
    if (iv.node < 0 || static_cast<std::uint32_t>(iv.node) >= n_nodes) bad("schedule node out of range");
    if (iv.to < iv.from) bad("schedule interval ends before it starts");
  }
  if (c.adversary.script.size() != c.adversary.script_times.size()) bad("script timing mismatch");
  if (c.adversary.checkpointers == "scripted") {
    for (const Vote& v : c.adversary.script) {
      auto first_byz = static_cast<NodeId>(c.n_miners + c.honest_checkpointers());
      if (v.voter < first_byz || v.voter >= static_cast<NodeId>(n_nodes)) {
        bad("scripted vote from a non-byzantine voter");
      }
    }
  }
  if (c.lambda * c.delta >= 1.0) warnings.push_back("RegimeWarning: lambda*delta >= 1");
  return warnings;
}

}  // namespace clc
