#include <random>
#include <sstream>

#include "doctest.h"
#include "vkn/netsim.hpp"
#include "vkn/scenario.hpp"

using namespace vkn;
using namespace vkn::sim;

namespace {

// Arithmetic oracles computed straight from the size model, independent of
// the simulator's own accounting.
std::uint64_t oracle_info_emitted_per_area(const Scenario& scn, std::size_t n_inputs,
                                           std::uint64_t item_size) {
  std::uint64_t h = scn.wire.header_bytes, r = scn.wire.request_bytes;
  return n_inputs * (h + r) + n_inputs * (h + item_size);
}

std::uint64_t oracle_vkn_emitted_per_area(const Scenario& scn, std::uint64_t sample_size) {
  std::uint64_t h = scn.wire.header_bytes, r = scn.wire.request_bytes;
  return (h + r) + (h + sample_size);
}

// Round-trip transit along a uniform path, hop by hop.
std::int64_t oracle_round_trip(const Scenario& scn, int hops, std::uint64_t req_size,
                               std::uint64_t resp_size) {
  const Link& l = scn.links.front();
  return hops * (transit_time(req_size, l) + transit_time(resp_size, l));
}

Scenario line_scenario(int hops) {
  // requester -- r1 -- ... -- server_X, every node its own region's server
  Scenario scn;
  scn.nodes.push_back({"V_ego", "ego_zone", true});
  std::string prev = "V_ego";
  for (int i = 1; i < hops; ++i) {
    std::string id = "r" + std::to_string(i);
    scn.nodes.push_back({id, "transit_" + std::to_string(i), true});
    scn.links.push_back({prev, id, 20, 125000});
    prev = id;
  }
  scn.nodes.push_back({"server_X", "X", true});
  scn.links.push_back({prev, "server_X", 20, 125000});
  scn.models = {{kComfortModelId, 65536, 0, 128}};
  scn.bytecodes = {{"V_ego", kComfortModelId}, {"server_X", kComfortModelId}};
  for (const char* spec : {"Road.Traffic FLUID", "Road.Visibility CLEAR",
                           "TwoWheelers.Concentration LOW"}) {
    std::istringstream in(spec);
    std::string name, value;
    in >> name >> value;
    scn.items.push_back({"server_X", parse_semantic_name(name), value, RegionId{"X"},
                         {0, 600000}, 2048, 3});
  }
  scn.requester = "V_ego";
  scn.queries = {{kComfortModelId, RegionId{"X"}, 0}};
  scn.horizon_ms = 600000;
  return scn;
}

}  // namespace

TEST_CASE("transit time arithmetic") {
  CHECK(transit_time(2080, {"a", "b", 20, 125000}) == 37);  // 20 + ceil(16.64)
  CHECK(transit_time(125000, {"a", "b", 0, 125000}) == 1000);
  CHECK(transit_time(96, {"a", "b", 20, 125000}) == 21);
  CHECK(transit_time(1, {"a", "b", 0, 125000}) == 1);  // ceil rounds up
}

TEST_CASE("topology validation") {
  SemanticRegistry reg = default_registry();
  std::vector<NodeSpec> nodes = {{"a", "R1", true}, {"b", "R2", true}};
  CHECK_NOTHROW(Topology::build(reg, nodes, {{"a", "b", 10, 1000}}));

  CHECK_THROWS_AS(Topology::build(reg, {{"a", "R1", true}, {"a", "R2", true}},
                                  {{"a", "a", 10, 1000}}),
                  TopologyError);
  CHECK_THROWS_AS(Topology::build(reg, nodes, {{"a", "c", 10, 1000}}), TopologyError);
  CHECK_THROWS_AS(Topology::build(reg, nodes, {}), TopologyError);  // disconnected
  CHECK_THROWS_AS(Topology::build(reg, {{"a", "R1", true}, {"b", "R1", true}},
                                  {{"a", "b", 10, 1000}}),
                  TopologyError);  // two servers in one region
  CHECK_THROWS_AS(Topology::build(reg, {{"a", "R1", false}, {"b", "R2", true}},
                                  {{"a", "b", 10, 1000}}),
                  TopologyError);  // region without a server
}

TEST_CASE("routes take shortest paths with lexicographic tie-break") {
  SemanticRegistry reg = default_registry();
  // diamond: a - {m, z} - b, both two-hop routes equal length
  std::vector<NodeSpec> nodes = {
      {"a", "Ra", true}, {"m", "Rm", true}, {"z", "Rz", true}, {"b", "Rb", true}};
  std::vector<Link> links = {
      {"a", "m", 10, 1000}, {"a", "z", 10, 1000}, {"m", "b", 10, 1000}, {"z", "b", 10, 1000}};
  Topology topo = Topology::build(reg, nodes, links);
  CHECK(topo.hop_count("a", "b") == 2);
  CHECK(topo.next_hop("a", "b") == "m");  // m < z
  CHECK(topo.next_hop("a", "m") == "m");
  CHECK(topo.resolve(Address::region("Rb")) == "b");
}

TEST_CASE("scenario config round-trips") {
  Scenario scn = default_scenario();
  CHECK(parse_scenario(serialize_scenario(scn)) == scn);
}

TEST_CASE("checked-in scenario file equals the built-in default") {
  Scenario file = load_scenario_file(std::string(VKN_DATA_DIR) + "/scenarios/comfort_rerouting.cfg");
  CHECK(file == default_scenario());
}

TEST_CASE("scenario parse errors carry line numbers") {
  auto message_of = [](const std::string& text) {
    try {
      parse_scenario(text);
    } catch (const ScenarioError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message_of("node\n").find("line 1") != std::string::npos);
  CHECK(message_of("node a R\nfrobnicate x\n").find("line 2") != std::string::npos);
  CHECK_THROWS_AS(parse_scenario("node a R server\n"), ScenarioError);  // no requester/queries
}

TEST_CASE("overrides touch the advertised keys and only them") {
  Scenario scn = default_scenario();
  apply_override(scn, "sample_size_bytes", "999");
  CHECK(scn.models[0].sample_size_bytes == 999);
  apply_override(scn, "item_size_bytes", "100");
  for (const auto& item : scn.items) CHECK(item.size_bytes == 100);
  apply_override(scn, "header_bytes", "16");
  CHECK(scn.wire.header_bytes == 16);
  apply_override(scn, "link_latency_ms", "5");
  for (const auto& link : scn.links) CHECK(link.latency_ms == 5);
  CHECK_THROWS_AS(apply_override(scn, "no_such_key", "1"), ScenarioError);
  CHECK_THROWS_AS(apply_override(scn, "sample_size_bytes", "bogus"), ScenarioError);
}

TEST_CASE("default scenario metrics equal the arithmetic oracle") {
  Scenario scn = default_scenario();
  Topology topo = build_topology(scn, default_registry());

  RunMetrics info = run_strategy_info_centric(topo, scn);
  RunMetrics vkn = run_strategy_vkn(topo, scn);

  const std::uint64_t info_area = oracle_info_emitted_per_area(scn, 3, 2048);
  const std::uint64_t vkn_area = oracle_vkn_emitted_per_area(scn, 128);
  REQUIRE(info.per_query.size() == 3);
  REQUIRE(vkn.per_query.size() == 3);
  for (const auto& q : info.per_query) {
    CHECK(q.emitted_bytes == info_area);
    CHECK(q.link_bytes == info_area * 2);  // two hops per route
    CHECK_FALSE(q.fell_back);
  }
  for (const auto& q : vkn.per_query) {
    CHECK(q.emitted_bytes == vkn_area);
    CHECK(q.link_bytes == vkn_area * 2);
    CHECK_FALSE(q.fell_back);
  }
  CHECK(info.emitted_bytes == 3 * info_area);
  CHECK(vkn.emitted_bytes == 3 * vkn_area);
  CHECK(info.total_bytes == 3 * info_area * 2);
  CHECK(vkn.total_bytes == 3 * vkn_area * 2);
  CHECK(vkn.total_bytes < info.total_bytes);

  // delays: request out and response back over 2 hops, compute 0
  const std::int64_t info_delay =
      oracle_round_trip(scn, 2, scn.wire.header_bytes + scn.wire.request_bytes,
                        scn.wire.header_bytes + 2048);
  const std::int64_t vkn_delay =
      oracle_round_trip(scn, 2, scn.wire.header_bytes + scn.wire.request_bytes,
                        scn.wire.header_bytes + 128);
  for (const auto& q : info.per_query) CHECK(q.delay_ms == info_delay);
  for (const auto& q : vkn.per_query) CHECK(q.delay_ms == vkn_delay);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(vkn.per_query[i].delay_ms < info.per_query[i].delay_ms);

  // comfort values follow the placed inputs
  CHECK(*info.per_query[0].comfort == "FAIR");
  CHECK(*info.per_query[1].comfort == "GOOD");
  CHECK(*info.per_query[2].comfort == "POOR");
}

TEST_CASE("delay decomposition holds on 1, 2 and 3 hop paths") {
  for (int hops : {1, 2, 3}) {
    Scenario scn = line_scenario(hops);
    Topology topo = build_topology(scn, default_registry());
    RunMetrics vkn = run_strategy_vkn(topo, scn);
    RunMetrics info = run_strategy_info_centric(topo, scn);

    const std::int64_t vkn_expect =
        oracle_round_trip(scn, hops, scn.wire.header_bytes + scn.wire.request_bytes,
                          scn.wire.header_bytes + 128);
    const std::int64_t info_expect =
        oracle_round_trip(scn, hops, scn.wire.header_bytes + scn.wire.request_bytes,
                          scn.wire.header_bytes + 2048);
    CHECK(vkn.per_query[0].delay_ms == vkn_expect);
    CHECK(info.per_query[0].delay_ms == info_expect);
  }
}

TEST_CASE("compute time lands on the executing node's side of the delay") {
  Scenario scn = line_scenario(2);
  scn.models[0].compute_ms = 500;
  Topology topo = build_topology(scn, default_registry());
  const std::int64_t base_vkn =
      oracle_round_trip(scn, 2, 96, 32 + 128);
  const std::int64_t base_info =
      oracle_round_trip(scn, 2, 96, 32 + 2048);
  RunMetrics vkn = run_strategy_vkn(topo, scn);
  RunMetrics info = run_strategy_info_centric(topo, scn);
  CHECK(vkn.per_query[0].delay_ms == base_vkn + 500);   // remote compute
  CHECK(info.per_query[0].delay_ms == base_info + 500); // local compute
}

TEST_CASE("bytecode download happens once and is accounted as setup") {
  Scenario scn = default_scenario();
  // strip the requester's bytecode so step 0 (download) is needed
  scn.bytecodes = {{"server_A", kComfortModelId},
                   {"server_B", kComfortModelId},
                   {"server_C", kComfortModelId}};
  Topology topo = build_topology(scn, default_registry());
  RunMetrics info = run_strategy_info_centric(topo, scn);

  const std::uint64_t h = scn.wire.header_bytes, r = scn.wire.request_bytes;
  CHECK(info.setup_bytes == (h + r) + (h + 65536));
  CHECK(info.setup_delay_ms > 0);
  // per-area traffic unchanged by the setup phase
  for (const auto& q : info.per_query)
    CHECK(q.emitted_bytes == oracle_info_emitted_per_area(scn, 3, 2048));
  CHECK(info.emitted_bytes == info.setup_bytes + 3 * oracle_info_emitted_per_area(scn, 3, 2048));

  // vkn needs no local bytecode at all
  RunMetrics vkn = run_strategy_vkn(topo, scn);
  CHECK(vkn.setup_bytes == 0);
  CHECK(decision_of(vkn) == decision_of(info));
}

TEST_CASE("fallback covers an area whose server lost the bytecode") {
  Scenario scn = default_scenario();
  scn.bytecodes = {{"V_ego", kComfortModelId},
                   {"server_A", kComfortModelId},
                   {"server_C", kComfortModelId}};  // B has none
  Topology topo = build_topology(scn, default_registry());
  RunMetrics vkn = run_strategy_vkn(topo, scn);

  const std::uint64_t h = scn.wire.header_bytes, r = scn.wire.request_bytes;
  REQUIRE(vkn.per_query.size() == 3);
  CHECK_FALSE(vkn.per_query[0].fell_back);
  CHECK(vkn.per_query[1].fell_back);
  CHECK_FALSE(vkn.per_query[2].fell_back);

  // area B pays the failed delegation round trip plus the info-centric flow
  const std::uint64_t failed_round_trip = (h + r) + (h + r);  // CREATE_REQ + ERROR
  CHECK(vkn.per_query[1].emitted_bytes ==
        failed_round_trip + oracle_info_emitted_per_area(scn, 3, 2048));
  CHECK(*vkn.per_query[1].comfort == "GOOD");

  // and the route decision still lands on B
  RouteDecision decision = decision_of(vkn);
  CHECK(decision.chosen == "B");
  CHECK_FALSE(decision.no_comfort_data);
}

TEST_CASE("delegation forwards inside the region when only a vehicle holds the bytecode") {
  Scenario scn = default_scenario();
  scn.nodes.push_back({"car_B", "B", false});
  scn.links.push_back({"server_B", "car_B", 20, 125000});
  // server_B loses its bytecode; car_B carries it instead
  scn.bytecodes = {{"V_ego", kComfortModelId},
                   {"server_A", kComfortModelId},
                   {"car_B", kComfortModelId},
                   {"server_C", kComfortModelId}};
  // car_B also holds the inputs, the server's store would miss them
  std::erase_if(scn.items, [](const ItemPlacement& item) { return item.region.id == "B"; });
  for (const char* spec : {"Road.Traffic FLUID", "Road.Visibility CLEAR",
                           "TwoWheelers.Concentration LOW"}) {
    std::istringstream in(spec);
    std::string name, value;
    in >> name >> value;
    scn.items.push_back({"car_B", parse_semantic_name(name), value, RegionId{"B"}, {0, 600000},
                         2048, 3});
  }
  Topology topo = build_topology(scn, default_registry());
  RunMetrics vkn = run_strategy_vkn(topo, scn);

  const auto& b = vkn.per_query[1];
  CHECK_FALSE(b.fell_back);
  CHECK(*b.comfort == "GOOD");
  // REQ (2 hops) + forward (1 hop) + RESP back over 3 hops
  const std::uint64_t h = scn.wire.header_bytes, r = scn.wire.request_bytes;
  CHECK(b.emitted_bytes == 2 * (h + r) + (h + 128));
  CHECK(b.link_bytes == 2 * (h + r) + (h + r) + 3 * (h + 128));
  // other areas unaffected
  CHECK(vkn.per_query[0].emitted_bytes == (h + r) + (h + 128));
  CHECK(decision_of(vkn).chosen == "B");
}

TEST_CASE("fallback downloads the bytecode first when the requester lacks it") {
  Scenario scn = default_scenario();
  scn.bytecodes = {{"server_A", kComfortModelId}, {"server_C", kComfortModelId}};  // B and V_ego: none
  Topology topo = build_topology(scn, default_registry());
  RunMetrics vkn = run_strategy_vkn(topo, scn);

  const std::uint64_t h = scn.wire.header_bytes, r = scn.wire.request_bytes;
  CHECK(vkn.per_query[1].fell_back);
  CHECK(*vkn.per_query[1].comfort == "GOOD");
  // one download, from the nearest holder (server_A and server_C tie at 2 hops, lex wins)
  CHECK(vkn.setup_bytes == (h + r) + (h + 65536));
  CHECK(vkn.setup_delay_ms > 0);
  bool saw_provider = false;
  for (const auto& line : vkn.trace)
    saw_provider |= line.find("server_A→relay BYTECODE_RESP") != std::string::npos;
  CHECK(saw_provider);

  // a configured provider overrides the nearest-holder choice
  Scenario pinned = scn;
  pinned.bytecode_provider = "server_C";
  Topology topo2 = build_topology(pinned, default_registry());
  RunMetrics vkn2 = run_strategy_vkn(topo2, pinned);
  bool saw_pinned = false;
  for (const auto& line : vkn2.trace)
    saw_pinned |= line.find("server_C→relay BYTECODE_RESP") != std::string::npos;
  CHECK(saw_pinned);
  CHECK(decision_of(vkn2) == decision_of(vkn));
}

TEST_CASE("missing area items are a scenario error naming the item") {
  Scenario scn = default_scenario();
  std::erase_if(scn.items, [](const ItemPlacement& item) {
    return item.region.id == "A" && item.name == parse_semantic_name("Road.Visibility");
  });
  Topology topo = build_topology(scn, default_registry());
  try {
    run_strategy_info_centric(topo, scn);
    FAIL("expected ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(std::string(e.what()).find("Road.Visibility") != std::string::npos);
  }
}

TEST_CASE("strategies agree on comfort values for random placements") {
  std::mt19937 rng(7500);
  const char* tw[] = {"HIGH", "MEDIUM", "LOW"};
  const char* vis[] = {"CLEAR", "OBSTRUCTED"};
  const char* tr[] = {"FLUID", "CONGESTED"};
  for (int round = 0; round < 25; ++round) {
    Scenario scn = default_scenario();
    scn.items.clear();
    std::map<std::string, std::string> expected;
    for (const auto& [server, area] : std::vector<std::pair<std::string, std::string>>{
             {"server_A", "A"}, {"server_B", "B"}, {"server_C", "C"}}) {
      const char* w = tw[rng() % 3];
      const char* v = vis[rng() % 2];
      const char* t = tr[rng() % 2];
      scn.items.push_back({server, parse_semantic_name("Road.Traffic"), std::string(t),
                           RegionId{area}, {0, 600000}, 2048, 3});
      scn.items.push_back({server, parse_semantic_name("Road.Visibility"), std::string(v),
                           RegionId{area}, {0, 600000}, 2048, 3});
      scn.items.push_back({server, parse_semantic_name("TwoWheelers.Concentration"),
                           std::string(w), RegionId{area}, {0, 600000}, 2048, 3});
      expected[area] = comfort_eval(w, v, t);
    }
    ComparisonReport report = run_comparison(scn, default_registry());
    CHECK(report.decisions_agree);
    for (std::size_t i = 0; i < report.info_centric.per_query.size(); ++i) {
      const auto& info_q = report.info_centric.per_query[i];
      const auto& vkn_q = report.vkn.per_query[i];
      CHECK(info_q.comfort == vkn_q.comfort);
      CHECK(*info_q.comfort == expected[info_q.area]);
    }
  }
}

TEST_CASE("byte dominance follows the size relation in both directions") {
  std::mt19937 rng(7501);
  std::uniform_int_distribution<std::uint64_t> item_size(64, 4096), small_sample(16, 190),
      huge_sample(7000, 100000), header(8, 64), request(32, 128);
  int dominant = 0, reversed = 0;
  while (dominant < 30 || reversed < 30) {
    bool want_dominant = dominant < 30;
    Scenario scn = default_scenario();
    scn.wire.header_bytes = static_cast<std::uint32_t>(header(rng));
    scn.wire.request_bytes = static_cast<std::uint32_t>(request(rng));
    std::uint64_t item = item_size(rng);
    for (auto& placement : scn.items) placement.size_bytes = item;
    scn.models[0].sample_size_bytes = want_dominant ? small_sample(rng) : huge_sample(rng);

    std::uint64_t info_area = oracle_info_emitted_per_area(scn, 3, item);
    std::uint64_t vkn_area = oracle_vkn_emitted_per_area(scn, scn.models[0].sample_size_bytes);
    if (want_dominant ? vkn_area >= info_area : vkn_area <= info_area) continue;

    ComparisonReport report = run_comparison(scn, default_registry());
    if (want_dominant) {
      CHECK(report.vkn.total_bytes < report.info_centric.total_bytes);
      ++dominant;
    } else {
      CHECK(report.vkn.total_bytes > report.info_centric.total_bytes);
      ++reversed;
    }
  }
}

TEST_CASE("a sample sized like the inputs plus overheads cancels the savings") {
  Scenario scn = default_scenario();
  const std::uint64_t h = scn.wire.header_bytes, r = scn.wire.request_bytes;
  const std::uint64_t item = scn.items.front().size_bytes;
  // vkn_area == info_area exactly when sample = 4h + 2r + 3*item
  const std::uint64_t breakeven = 4 * h + 2 * r + 3 * item;

  apply_override(scn, "sample_size_bytes", std::to_string(breakeven));
  ComparisonReport flat = run_comparison(scn, default_registry());
  for (const auto& d : flat.deltas) CHECK(d.emitted_bytes_saved == 0);

  apply_override(scn, "sample_size_bytes", std::to_string(breakeven + 1));
  ComparisonReport heavy = run_comparison(scn, default_registry());
  for (const auto& d : heavy.deltas) CHECK(d.emitted_bytes_saved == -1);
}

TEST_CASE("identical runs are byte-identical") {
  Scenario scn = default_scenario();
  ComparisonReport a = run_comparison(scn, default_registry());
  ComparisonReport b = run_comparison(scn, default_registry());
  CHECK(render_report_text(a) == render_report_text(b));
  CHECK(render_report_json(a) == render_report_json(b));
  CHECK(a.info_centric.trace == b.info_centric.trace);
  CHECK(a.vkn.trace == b.vkn.trace);
}

TEST_CASE("conservation: link totals equal emitted bytes times the hops traversed") {
  Scenario scn = default_scenario();
  ComparisonReport report = run_comparison(scn, default_registry());
  for (const RunMetrics* m : {&report.info_centric, &report.vkn}) {
    std::uint64_t link_sum = 0;
    for (const auto& [key, bytes] : m->per_link_bytes) link_sum += bytes;
    CHECK(link_sum == m->total_bytes);
    // every route in the default scenario is exactly 2 hops
    CHECK(m->total_bytes == 2 * m->emitted_bytes);
    std::uint64_t kind_sum = 0;
    for (const auto& [kind, bytes] : m->per_kind_bytes) kind_sum += bytes;
    CHECK(kind_sum == m->emitted_bytes);
  }
}

TEST_CASE("a short horizon leaves queries unavailable instead of failing") {
  Scenario scn = default_scenario();
  scn.horizon_ms = 10;  // not even one hop
  Topology topo = build_topology(scn, default_registry());
  RunMetrics vkn = run_strategy_vkn(topo, scn);
  for (const auto& q : vkn.per_query) {
    CHECK_FALSE(q.comfort.has_value());
    CHECK(q.delay_ms == -1);
  }
  RouteDecision decision = decision_of(vkn);
  CHECK(decision.no_comfort_data);
  CHECK(decision.chosen == "A");
}

TEST_CASE("trace lines are per hop with the wire format") {
  Scenario scn = default_scenario();
  Topology topo = build_topology(scn, default_registry());
  RunMetrics vkn = run_strategy_vkn(topo, scn);
  REQUIRE(!vkn.trace.empty());
  CHECK(vkn.trace[0] == "t=21 V_ego→relay CREATE_REQ 96B");
  // 6 messages x 2 hops
  CHECK(vkn.trace.size() == 12);
}
