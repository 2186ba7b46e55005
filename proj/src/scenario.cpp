#include "vkn/scenario.hpp"

#include "vkn/engine.hpp"

namespace vkn::sim {

Scenario default_scenario() {
  Scenario scn;
  scn.nodes = {
      {"V_ego", "ego_zone", false},
      {"relay", "ego_zone", true},
      {"server_A", "A", true},
      {"server_B", "B", true},
      {"server_C", "C", true},
  };
  scn.links = {
      {"V_ego", "relay", 20, 125000},
      {"relay", "server_A", 20, 125000},
      {"relay", "server_B", 20, 125000},
      {"relay", "server_C", 20, 125000},
  };
  scn.models = {{kComfortModelId, 65536, 0, 128}};
  scn.bytecodes = {
      {"V_ego", kComfortModelId},
      {"server_A", kComfortModelId},
      {"server_B", kComfortModelId},
      {"server_C", kComfortModelId},
  };

  const TimeInterval day{0, 600000};
  auto place = [&](const char* server, const char* area, const char* traffic,
                   const char* visibility, const char* two_wheelers) {
    scn.items.push_back({server, parse_semantic_name("Road.Traffic"), std::string(traffic),
                         RegionId{area}, day, 2048, 3});
    scn.items.push_back({server, parse_semantic_name("Road.Visibility"), std::string(visibility),
                         RegionId{area}, day, 2048, 3});
    scn.items.push_back({server, parse_semantic_name("TwoWheelers.Concentration"),
                         std::string(two_wheelers), RegionId{area}, day, 2048, 3});
  };
  place("server_A", "A", "FLUID", "CLEAR", "MEDIUM");  // -> FAIR
  place("server_B", "B", "FLUID", "CLEAR", "LOW");     // -> GOOD
  place("server_C", "C", "FLUID", "CLEAR", "HIGH");    // -> POOR

  scn.requester = "V_ego";
  scn.queries = {
      {kComfortModelId, RegionId{"A"}, 0},
      {kComfortModelId, RegionId{"B"}, 0},
      {kComfortModelId, RegionId{"C"}, 0},
  };
  scn.horizon_ms = 600000;
  return scn;
}

}  // namespace vkn::sim
