#include <random>

#include "doctest.h"
#include "vkn/route.hpp"

using namespace vkn;

TEST_CASE("route decision picks the best comfort") {
  RouteDecision d = decide_route({{"A", "FAIR"}, {"B", "GOOD"}, {"C", "POOR"}});
  CHECK(d.chosen == "B");
  CHECK_FALSE(d.no_comfort_data);
}

TEST_CASE("ties break toward the lexicographically first region") {
  CHECK(decide_route({{"A", "GOOD"}, {"B", "GOOD"}}).chosen == "A");
  CHECK(decide_route({{"B", "POOR"}, {"C", "POOR"}, {"A", "POOR"}}).chosen == "A");
}

TEST_CASE("unavailable areas rank last") {
  RouteDecision d = decide_route({{"A", std::nullopt}, {"B", "POOR"}});
  CHECK(d.chosen == "B");
  CHECK_FALSE(d.no_comfort_data);

  d = decide_route({{"A", std::nullopt}, {"B", std::nullopt}, {"C", std::nullopt}});
  CHECK(d.chosen == "A");
  CHECK(d.no_comfort_data);
}

TEST_CASE("degenerate inputs") {
  CHECK_THROWS_AS(decide_route({}), EmptyInput);
  CHECK_THROWS_AS(decide_route({{"A", "SPLENDID"}}), VknError);
}

TEST_CASE("improving the chosen area never moves the choice away") {
  std::mt19937 rng(7600);
  const std::vector<std::optional<std::string>> levels = {std::nullopt, "POOR", "FAIR", "GOOD"};
  for (int round = 0; round < 300; ++round) {
    std::map<std::string, std::optional<std::string>> samples;
    for (const char* region : {"A", "B", "C", "D"})
      samples[region] = levels[rng() % levels.size()];
    RouteDecision before = decide_route(samples);
    int rank = comfort_rank(samples[before.chosen]);
    if (rank == 0) continue;  // already GOOD
    samples[before.chosen] = levels[static_cast<std::size_t>(4 - rank)];
    RouteDecision after = decide_route(samples);
    CHECK(after.chosen == before.chosen);
  }
}
