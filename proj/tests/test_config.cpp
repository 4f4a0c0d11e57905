#include <doctest.h>

#include "clc/config.hpp"
#include "clc/error.hpp"

using namespace clc;
using nlohmann::json;

namespace {

std::string error_of(const json& j) {
  try {
    config_from_json(j);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults and derived quantities") {
  ScenarioConfig c = config_from_json(json::object());
  CHECK(c.t() == 3);
  CHECK(c.quorum() == 7);
  CHECK(c.honest_checkpointers() == 7);
  CHECK(c.n_honest() == 57);
  CHECK(c.d_recency_delta() == doctest::Approx(32.0));
  CHECK(c.e_delta() == doctest::Approx(320.0));
  CHECK(c.checkpoint_depth() == 12);
  CHECK(c.gst_time() == 0.0);
  CHECK(validate(c).empty());
}

TEST_CASE("round trip through json") {
  json j = {{"name", "x"},
            {"beta", 0.3},
            {"kPrime", 4},
            {"network", {{"mode", "M1"}, {"gst", 200}, {"preGst", "partition"}}},
            {"participation",
             {{"mode", "U2"}, {"schedule", {{{"node", 3}, {"from", 10}, {"to", 20}}}}}},
            {"adversary",
             {{"strategy", "private-chain"},
              {"checkpointers", "scripted"},
              {"script",
               {{{"kind", "cert"}, {"value", 5}, {"iteration", 1}, {"period", 1},
                 {"voter", 58}, {"at", 3.5}}}}}},
            {"variant", {{"enforceP3", false}, {"checkpointDepthOverride", 0}}},
            {"analysis", {{"qualityK", 6}}},
            {"checkers", {{"mustPass", {"cp0"}}}}};
  ScenarioConfig a = config_from_json(j);
  ScenarioConfig b = config_from_json(config_to_json(a));
  CHECK(a == b);
  CHECK(a.checkpoint_depth() == 0);
  CHECK(a.gst_time() == 200.0);
  CHECK(a.adversary.script_times == std::vector<double>{3.5});
}

TEST_CASE("unknown fields and bad values name the path") {
  CHECK(error_of({{"nMiner", 5}}) == "ConfigError: nMiner: unknown field");
  CHECK(error_of({{"network", {{"mode", "M3"}}}}).find("network.mode") != std::string::npos);
  CHECK(error_of({{"beta", "high"}}).find("beta: wrong type") != std::string::npos);
}

TEST_CASE("cross-field validation") {
  CHECK(error_of({{"byzantineCheckpointers", 4}}).rfind("ScenarioInvalid", 0) == 0);
  CHECK(error_of({{"byzantineCheckpointers", 4}, {"inModel", false}}).empty());
  CHECK(error_of({{"e", 100}}).rfind("ScenarioInvalid", 0) == 0);
  ScenarioConfig c = config_from_json({{"lambda", 1.5}});
  auto w = validate(c);
  REQUIRE(w.size() == 1);
  CHECK(w[0].rfind("RegimeWarning", 0) == 0);
  json scripted = {{"adversary",
                    {{"checkpointers", "scripted"},
                     {"script",
                      {{{"kind", "soft"}, {"value", 1}, {"iteration", 1}, {"period", 1},
                        {"voter", 51}, {"at", 0}}}}}}};
  CHECK(error_of(scripted).find("non-byzantine") != std::string::npos);
}

TEST_CASE("dotted overrides") {
  json doc = {{"network", {{"mode", "M2"}}}};
  apply_override(doc, "network.gst=150");
  apply_override(doc, "network.mode=M1");
  apply_override(doc, "checkers.mustPass=[\"cp0\"]");
  CHECK(doc["network"]["gst"] == 150);
  CHECK(doc["network"]["mode"] == "M1");
  CHECK(doc["checkers"]["mustPass"][0] == "cp0");
  CHECK_THROWS_AS(apply_override(doc, "novalue"), Error);
  CHECK_THROWS_AS(apply_override(doc, "network.mode.x=1"), Error);
}
