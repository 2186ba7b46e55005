#pragma once
// The reference comfort-based rerouting setup: a vehicle two hops away from
// three candidate areas, each with an area server holding fresh road inputs
// and the comfort bytecode.

#include "vkn/netsim.hpp"

namespace vkn::sim {

// Areas A/B/C placed so the comfort model yields FAIR/GOOD/POOR; the comfort
// bytecode sits on every area server and on the requesting vehicle.
Scenario default_scenario();

}  // namespace vkn::sim
