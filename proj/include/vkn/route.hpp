#pragma once
// Comfort-based itinerary choice: rank candidate areas by the comfort sample
// obtained for each and pick the best one.

#include <map>
#include <optional>
#include <string>

#include "vkn/semantic.hpp"

namespace vkn {

// GOOD > FAIR > POOR > UNAVAILABLE (missing sample). Returns a rank where
// smaller is better; UNAVAILABLE ranks last.
int comfort_rank(const std::optional<std::string>& comfort);

struct RouteDecision {
  // region -> comfort symbol, nullopt when no sample could be obtained
  std::map<std::string, std::optional<std::string>> area_comfort;
  std::string chosen;
  bool no_comfort_data = false;  // set when every area came back unavailable

  bool operator==(const RouteDecision&) const = default;
};

// Picks the maximal-comfort region, ties broken by lexicographically smallest
// region id. Throws EmptyInput for an empty map; non-comfort symbols throw.
RouteDecision decide_route(const std::map<std::string, std::optional<std::string>>& samples);

// Convenience overload extracting the comfort value from sample items.
RouteDecision decide_route_items(const std::map<std::string, std::optional<ContentItem>>& samples);

}  // namespace vkn
