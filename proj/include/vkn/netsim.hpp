#pragma once
// Deterministic discrete-event simulation of the vehicular network. Static
// topology, store-and-forward links, static shortest-path routes and the two
// retrieval strategies: information-centric (fetch the inputs, compute
// locally) and knowledge-centric (delegate creation, fetch the sample).

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vkn/route.hpp"
#include "vkn/vkql.hpp"

namespace vkn::sim {

struct Link {
  std::string a;
  std::string b;
  std::int64_t latency_ms = 20;
  std::uint64_t bandwidth_Bps = 125000;

  bool operator==(const Link&) const = default;
};

// latency + full-message serialization: latency_ms + ceil(size * 1000 / bw).
std::int64_t transit_time(std::uint64_t size_bytes, const Link& link);

struct NodeSpec {
  std::string id;
  std::string region;
  bool is_server = false;

  bool operator==(const NodeSpec&) const = default;
};

// The network: node states, symmetric links and hop-count shortest routes
// (ties broken toward the lexicographically smallest neighbor id).
class Topology : public DirectoryView {
 public:
  static Topology build(const SemanticRegistry& registry, const std::vector<NodeSpec>& specs,
                        std::vector<Link> links);

  Topology(const Topology&) = default;
  Topology& operator=(const Topology&) = default;
  Topology(Topology&&) = default;
  Topology& operator=(Topology&&) = default;

  NodeRole& node(const std::string& id);
  const NodeRole& node(const std::string& id) const;
  bool has_node(const std::string& id) const;
  std::vector<NodeRole>& nodes() { return nodes_; }
  const std::vector<NodeRole>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }

  const Link& link_between(const std::string& a, const std::string& b) const;
  // Next node on the route from -> to; throws TopologyError when from == to.
  const std::string& next_hop(const std::string& from, const std::string& to) const;
  int hop_count(const std::string& from, const std::string& to) const;

  // Region-addressed destinations resolve to the region's area server.
  std::string resolve(const Address& dst) const;
  std::string area_server(const RegionId& region) const;

  // DirectoryView
  std::vector<std::string> nodes_in_region(const RegionId& region) const override;
  bool node_has_bytecode(const std::string& node_id, const std::string& model_id) const override;

 private:
  Topology() = default;
  void index();

  std::vector<NodeRole> nodes_;
  std::vector<Link> links_;
  std::map<std::string, std::size_t> node_index_;
  std::map<std::pair<std::string, std::string>, std::size_t> link_index_;
  std::map<std::string, std::vector<std::string>> neighbors_;  // sorted
  std::map<std::pair<std::string, std::string>, std::string> next_hop_;
  std::map<std::pair<std::string, std::string>, int> distance_;
};

struct ItemPlacement {
  std::string node_id;
  SemanticName name;
  Value value;
  RegionId region;
  TimeInterval validity;
  std::uint64_t size_bytes = 2048;
  int layer = 3;

  bool operator==(const ItemPlacement&) const = default;
};

struct BytecodePlacement {
  std::string node_id;
  std::string model_id;

  bool operator==(const BytecodePlacement&) const = default;
};

struct Query {
  std::string model_id;
  RegionId area;
  std::int64_t at_ms = 0;

  bool operator==(const Query&) const = default;
};

struct Scenario {
  std::vector<NodeSpec> nodes;
  std::vector<Link> links;
  std::vector<ModelParams> models;
  std::vector<BytecodePlacement> bytecodes;
  std::vector<ItemPlacement> items;
  std::vector<Query> queries;
  std::string requester;
  std::string bytecode_provider;  // optional; empty picks the nearest holder
  WireConfig wire;
  std::int64_t horizon_ms = 3600000;

  bool operator==(const Scenario&) const = default;
};

// Line-oriented scenario config; see the README for the key set. '#' starts
// a comment anywhere.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario_file(const std::string& path);
std::string serialize_scenario(const Scenario& scenario);

// Applies `key=value` to scenario constants. Known keys: header_bytes,
// request_bytes, sample_size_bytes, bytecode_size_bytes, compute_ms,
// item_size_bytes, link_latency_ms, link_bandwidth_Bps, horizon_ms.
// Unknown keys raise ScenarioError.
void apply_override(Scenario& scenario, const std::string& key, const std::string& value);

// Instantiates node states: every node learns all model descriptions and the
// scenario model constants; bytecodes and items land where placed.
Topology build_topology(const Scenario& scenario, const SemanticRegistry& registry);

struct QueryMetrics {
  std::string area;
  std::uint64_t emitted_bytes = 0;  // each message counted once
  std::uint64_t link_bytes = 0;     // each message counted per traversed link
  std::int64_t delay_ms = -1;       // emission -> comfort available at requester
  std::uint64_t messages = 0;
  std::optional<std::string> comfort;
  bool fell_back = false;
};

struct RunMetrics {
  std::string strategy;
  std::uint64_t total_bytes = 0;    // sum of per_link_bytes
  std::uint64_t emitted_bytes = 0;  // sum of message sizes, hop-independent
  std::uint64_t message_count = 0;
  std::uint64_t setup_bytes = 0;    // bytecode download phase, when one happens
  std::int64_t setup_delay_ms = 0;
  std::map<std::string, std::uint64_t> per_link_bytes;  // "a<->b"
  std::map<std::string, std::uint64_t> per_kind_bytes;  // emitted, by message kind
  std::vector<QueryMetrics> per_query;
  std::vector<std::string> trace;  // one line per hop delivery
};

RunMetrics run_strategy_info_centric(const Topology& topology, const Scenario& scenario);
RunMetrics run_strategy_vkn(const Topology& topology, const Scenario& scenario);

struct AreaDelta {
  std::string area;
  std::int64_t emitted_bytes_saved = 0;  // info-centric minus vkn
  std::int64_t link_bytes_saved = 0;
  std::int64_t delay_saved_ms = 0;
};

struct ComparisonReport {
  RunMetrics info_centric;
  RunMetrics vkn;
  std::vector<AreaDelta> deltas;
  RouteDecision info_decision;
  RouteDecision vkn_decision;
  bool decisions_agree = false;
};

// Runs both strategies against identical initial state.
ComparisonReport run_comparison(const Topology& topology, const Scenario& scenario);
ComparisonReport run_comparison(const Scenario& scenario, const SemanticRegistry& registry);

std::string render_metrics_text(const RunMetrics& metrics);
std::string render_report_text(const ComparisonReport& report);
std::string render_metrics_json(const RunMetrics& metrics);  // stable key order
std::string render_report_json(const ComparisonReport& report);

RouteDecision decision_of(const RunMetrics& metrics);

}  // namespace vkn::sim
