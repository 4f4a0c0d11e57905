#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clc/ba_types.hpp"

namespace clc {

inline constexpr int kConfigSchemaVersion = 1;

struct NetworkConfig {
  std::string mode = "M2";            // M1 | M2
  double gst = 0.0;                   // M1 only
  std::string delay = "max";          // after GST: max | uniform
  std::string pre_gst = "maximal";    // maximal | uniform | partition
  double partition_fraction = 0.5;    // share of honest nodes in group A

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct OnlineInterval {
  NodeId node = 0;
  double from = 0.0;
  double to = 0.0;

  friend bool operator==(const OnlineInterval&, const OnlineInterval&) = default;
};

struct ParticipationConfig {
  std::string mode = "U1";            // U1 | U2
  double miner_floor = 0.25;          // U2 churn: minimum online share of honest miners
  double churn_epoch = 100.0;         // in Δ
  bool churn_checkpointers = false;
  // U2: number of honest checkpointers kept online; -1 = all.
  int online_checkpointers = -1;
  std::vector<OnlineInterval> schedule;  // explicit per-node intervals

  friend bool operator==(const ParticipationConfig&, const ParticipationConfig&) = default;
};

struct AdversaryConfig {
  std::string strategy = "none";  // none | private-chain | balance | grandpa-rollback
  std::string checkpointers = "silent";  // silent | equivocate | scripted
  std::string tie_break = "incumbent";   // incumbent | adversarial
  // private-chain: fork this many blocks below the public tip (0 = k'+1) and
  // abandon the fork once the public chain leads by more than
  // give_up_deficit blocks (0 = twice the fork depth).
  std::uint32_t fork_depth = 0;
  std::uint32_t give_up_deficit = 0;
  std::vector<Vote> script;  // scripted byzantine votes, sent at `script_times`
  std::vector<double> script_times;

  friend bool operator==(const AdversaryConfig&, const AdversaryConfig&) = default;
};

struct VariantConfig {
  bool enforce_p2 = true;
  bool enforce_p3 = true;
  std::optional<std::uint32_t> checkpoint_depth_override;

  friend bool operator==(const VariantConfig&, const VariantConfig&) = default;
};

struct CheckerConfig {
  std::vector<std::string> enabled;    // empty = all
  std::vector<std::string> must_pass;

  friend bool operator==(const CheckerConfig&, const CheckerConfig&) = default;
};

struct AnalysisConfig {
  double c_gst = 4.0;                 // liveness starts at c_gst * gst + offset
  double offset = 400.0;              // in Δ
  double typical_epsilon = 0.2;
  std::uint32_t typical_tau = 500;
  double quality_s = 0.0;
  std::optional<std::uint32_t> quality_k;  // default k
  double liveness_c = 0.0;            // Π_ada liveness rate (blocks per Δ); 0 = skip
  double liveness_c_prime = 0.0;

  friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

struct OutputConfig {
  std::string dir;                    // empty: $CLC_OUTPUT_DIR or ./out
  bool trace = true;
  bool csv = true;
  bool deliveries = true;             // record delivery events in the trace

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ScenarioConfig {
  int schema_version = kConfigSchemaVersion;
  std::string name = "unnamed";
  std::string description;
  bool in_model = true;

  double duration = 5000.0;  // horizon, in Δ
  double flush = 0.0;        // extra time after the horizon with mining stopped, in Δ
  double delta = 1.0;
  double lambda = 0.1;       // mining rate per unit time
  double beta = 0.0;

  std::uint32_t n_miners = 50;
  std::uint32_t n_checkpointers = 10;
  std::uint32_t byzantine_checkpointers = 3;
  std::uint32_t k = 12;
  std::uint32_t k_prime = 12;
  std::uint32_t kappa_sim = 16;
  std::optional<double> e;          // in Δ; default 10 * d_recency
  std::optional<double> d_recency;  // in Δ; default 8 * ceil(sqrt(kappa_sim))

  NetworkConfig network;
  ParticipationConfig participation;
  AdversaryConfig adversary;
  VariantConfig variant;
  std::uint64_t seed = 1;
  CheckerConfig checkers;
  AnalysisConfig analysis;
  OutputConfig output;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;

  // Derived quantities.
  std::uint32_t t() const { return (n_checkpointers - 1) / 3; }
  std::uint32_t quorum() const { return 2 * t() + 1; }
  std::uint32_t honest_checkpointers() const { return n_checkpointers - byzantine_checkpointers; }
  std::uint32_t n_honest() const { return n_miners + honest_checkpointers(); }
  double d_recency_delta() const;
  double e_delta() const;
  // Depth of the checkpoint in the agreed chain.
  std::uint32_t checkpoint_depth() const;
  bool is_m1() const { return network.mode == "M1"; }
  double gst_time() const { return is_m1() ? network.gst * delta : 0.0; }
  double horizon() const { return duration * delta; }
};

// Parses and validates. Unknown keys and bad values raise ConfigError naming
// the field path; cross-field violations raise ScenarioInvalid.
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& c);
nlohmann::json read_config_json(const std::string& path);
ScenarioConfig load_config(const std::string& path);

// Applies `path.to.field=value` onto a JSON config document. The value is
// parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Cross-field checks. Returns warnings; throws ScenarioInvalid on errors.
std::vector<std::string> validate(const ScenarioConfig& c);

}  // namespace clc
