#include "vkn/route.hpp"

#include "vkn/errors.hpp"

namespace vkn {

int comfort_rank(const std::optional<std::string>& comfort) {
  if (!comfort) return 3;
  if (*comfort == "GOOD") return 0;
  if (*comfort == "FAIR") return 1;
  if (*comfort == "POOR") return 2;
  throw VknError("'" + *comfort + "' is not a comfort level");
}

RouteDecision decide_route(const std::map<std::string, std::optional<std::string>>& samples) {
  if (samples.empty()) throw EmptyInput("decide_route needs at least one region");
  RouteDecision decision;
  decision.area_comfort = samples;
  const std::string* best = nullptr;
  int best_rank = 4;
  for (const auto& [region, comfort] : samples) {  // map order = lexicographic tie-break
    int rank = comfort_rank(comfort);
    if (!best || rank < best_rank) {
      best = &region;
      best_rank = rank;
    }
  }
  decision.chosen = *best;
  decision.no_comfort_data = best_rank == 3;
  return decision;
}

RouteDecision decide_route_items(const std::map<std::string, std::optional<ContentItem>>& samples) {
  std::map<std::string, std::optional<std::string>> values;
  for (const auto& [region, item] : samples) {
    if (item) {
      values[region] = std::get<std::string>(item->value);
    } else {
      values[region] = std::nullopt;
    }
  }
  return decide_route(values);
}

}  // namespace vkn
