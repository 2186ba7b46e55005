#include "vkn/netsim.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include "json.hpp"

namespace vkn::sim {

std::int64_t transit_time(std::uint64_t size_bytes, const Link& link) {
  std::uint64_t serialization = (size_bytes * 1000 + link.bandwidth_Bps - 1) / link.bandwidth_Bps;
  return link.latency_ms + static_cast<std::int64_t>(serialization);
}

// ---- topology ----

Topology Topology::build(const SemanticRegistry& registry, const std::vector<NodeSpec>& specs,
                         std::vector<Link> links) {
  Topology topo;
  if (specs.empty()) throw TopologyError("no nodes");
  std::map<std::string, int> servers_per_region;
  for (const auto& spec : specs) {
    if (spec.id.empty()) throw TopologyError("node with empty id");
    if (spec.region.empty()) throw TopologyError("node '" + spec.id + "' has empty region");
    if (topo.node_index_.count(spec.id)) throw TopologyError("duplicate node id '" + spec.id + "'");
    topo.node_index_[spec.id] = topo.nodes_.size();
    NodeRole node;
    node.node_id = spec.id;
    node.region = RegionId{spec.region};
    node.is_area_server = spec.is_server;
    node.ldm = LdmStore(registry);
    topo.nodes_.push_back(std::move(node));
    servers_per_region[spec.region] += spec.is_server ? 1 : 0;
  }
  for (const auto& [region, count] : servers_per_region) {
    if (count != 1)
      throw TopologyError("region '" + region + "' has " + std::to_string(count) +
                          " area servers, expected exactly 1");
  }
  std::set<std::pair<std::string, std::string>> seen_pairs;
  for (const auto& link : links) {
    if (!topo.node_index_.count(link.a) || !topo.node_index_.count(link.b))
      throw TopologyError("link references unknown node: " + link.a + " <-> " + link.b);
    if (link.a == link.b) throw TopologyError("self-link on '" + link.a + "'");
    if (link.bandwidth_Bps == 0) throw TopologyError("zero bandwidth link");
    if (link.latency_ms < 0) throw TopologyError("negative latency link");
    auto key = std::minmax(link.a, link.b);
    if (!seen_pairs.insert(key).second)
      throw TopologyError("duplicate link " + link.a + " <-> " + link.b);
  }
  topo.links_ = std::move(links);
  topo.index();
  return topo;
}

void Topology::index() {
  link_index_.clear();
  neighbors_.clear();
  next_hop_.clear();
  distance_.clear();
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    link_index_[{l.a, l.b}] = i;
    link_index_[{l.b, l.a}] = i;
    neighbors_[l.a].push_back(l.b);
    neighbors_[l.b].push_back(l.a);
  }
  for (auto& [id, ns] : neighbors_) std::sort(ns.begin(), ns.end());

  // All-pairs hop counts by BFS from every node.
  for (const auto& src : nodes_) {
    std::map<std::string, int> dist;
    dist[src.node_id] = 0;
    std::deque<std::string> frontier{src.node_id};
    while (!frontier.empty()) {
      std::string at = frontier.front();
      frontier.pop_front();
      for (const auto& n : neighbors_[at]) {
        if (dist.count(n)) continue;
        dist[n] = dist[at] + 1;
        frontier.push_back(n);
      }
    }
    if (dist.size() != nodes_.size()) throw TopologyError("graph is not connected");
    for (const auto& [id, d] : dist) distance_[{src.node_id, id}] = d;
  }
  // Next hop: the lexicographically smallest neighbor on a shortest path.
  for (const auto& from : nodes_) {
    for (const auto& to : nodes_) {
      if (from.node_id == to.node_id) continue;
      int d = distance_.at({from.node_id, to.node_id});
      for (const auto& n : neighbors_[from.node_id]) {
        if (distance_.at({n, to.node_id}) == d - 1) {
          next_hop_[{from.node_id, to.node_id}] = n;
          break;
        }
      }
    }
  }
}

NodeRole& Topology::node(const std::string& id) {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) throw TopologyError("unknown node '" + id + "'");
  return nodes_[it->second];
}

const NodeRole& Topology::node(const std::string& id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) throw TopologyError("unknown node '" + id + "'");
  return nodes_[it->second];
}

bool Topology::has_node(const std::string& id) const { return node_index_.count(id) != 0; }

const Link& Topology::link_between(const std::string& a, const std::string& b) const {
  auto it = link_index_.find({a, b});
  if (it == link_index_.end()) throw TopologyError("no link " + a + " <-> " + b);
  return links_[it->second];
}

const std::string& Topology::next_hop(const std::string& from, const std::string& to) const {
  auto it = next_hop_.find({from, to});
  if (it == next_hop_.end()) throw TopologyError("no route " + from + " -> " + to);
  return it->second;
}

int Topology::hop_count(const std::string& from, const std::string& to) const {
  auto it = distance_.find({from, to});
  if (it == distance_.end()) throw TopologyError("no route " + from + " -> " + to);
  return it->second;
}

std::string Topology::area_server(const RegionId& region) const {
  for (const auto& n : nodes_) {
    if (n.region == region && n.is_area_server) return n.node_id;
  }
  throw TopologyError("region '" + region.id + "' has no area server");
}

std::string Topology::resolve(const Address& dst) const {
  if (dst.is_region) return area_server(RegionId{dst.id});
  if (!has_node(dst.id)) throw TopologyError("unknown node '" + dst.id + "'");
  return dst.id;
}

std::vector<std::string> Topology::nodes_in_region(const RegionId& region) const {
  std::vector<std::string> out;
  for (const auto& n : nodes_) {
    if (n.region == region) out.push_back(n.node_id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Topology::node_has_bytecode(const std::string& node_id, const std::string& model_id) const {
  return node(node_id).kb.has_bytecode(model_id);
}

// ---- scenario config ----

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::int64_t parse_int(const std::string& tok, int lineno, const char* what) {
  try {
    std::size_t used = 0;
    std::int64_t v = std::stoll(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ScenarioError("line " + std::to_string(lineno) + ": " + what + " '" + tok +
                        "' is not an integer");
  }
}

std::uint64_t parse_positive(const std::string& tok, int lineno, const char* what) {
  std::int64_t v = parse_int(tok, lineno, what);
  if (v < 1)
    throw ScenarioError("line " + std::to_string(lineno) + ": " + what + " must be positive");
  return static_cast<std::uint64_t>(v);
}

Value parse_value(const std::string& tok) {
  try {
    std::size_t used = 0;
    double d = std::stod(tok, &used);
    if (used == tok.size()) return d;
  } catch (const std::exception&) {
  }
  return tok;  // symbol literal
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Scenario scn;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::vector<std::string> toks = tokenize(raw);
    if (toks.empty()) continue;
    const std::string& kw = toks[0];
    auto expect = [&](std::size_t lo, std::size_t hi, const char* usage) {
      if (toks.size() - 1 < lo || toks.size() - 1 > hi)
        throw ScenarioError("line " + std::to_string(lineno) + ": expected '" + usage + "'");
    };
    if (kw == "node") {
      expect(2, 3, "node <id> <region> [server]");
      bool server = toks.size() == 4;
      if (server && toks[3] != "server")
        throw ScenarioError("line " + std::to_string(lineno) + ": unexpected '" + toks[3] + "'");
      scn.nodes.push_back({toks[1], toks[2], server});
    } else if (kw == "link") {
      expect(4, 4, "link <a> <b> <latency_ms> <bandwidth_Bps>");
      Link l;
      l.a = toks[1];
      l.b = toks[2];
      l.latency_ms = parse_int(toks[3], lineno, "latency_ms");
      if (l.latency_ms < 0)
        throw ScenarioError("line " + std::to_string(lineno) + ": latency must be >= 0");
      l.bandwidth_Bps = parse_positive(toks[4], lineno, "bandwidth_Bps");
      scn.links.push_back(std::move(l));
    } else if (kw == "model") {
      expect(4, 4, "model <id> <bytecode_bytes> <compute_ms> <sample_bytes>");
      ModelParams p;
      p.model_id = toks[1];
      p.bytecode_size_bytes = parse_positive(toks[2], lineno, "bytecode_bytes");
      p.compute_ms = parse_int(toks[3], lineno, "compute_ms");
      if (p.compute_ms < 0)
        throw ScenarioError("line " + std::to_string(lineno) + ": compute_ms must be >= 0");
      p.sample_size_bytes = parse_positive(toks[4], lineno, "sample_bytes");
      scn.models.push_back(std::move(p));
    } else if (kw == "bytecode") {
      expect(2, 2, "bytecode <node_id> <model_id>");
      scn.bytecodes.push_back({toks[1], toks[2]});
    } else if (kw == "item") {
      expect(7, 8, "item <node> <name> <value> <region> <start_ms> <end_ms> <size_bytes> [layer]");
      ItemPlacement item;
      item.node_id = toks[1];
      try {
        item.name = parse_semantic_name(toks[2]);
      } catch (const MalformedName& e) {
        throw ScenarioError("line " + std::to_string(lineno) + ": " + e.what());
      }
      item.value = parse_value(toks[3]);
      item.region = RegionId{toks[4]};
      item.validity.start_ms = parse_int(toks[5], lineno, "start_ms");
      item.validity.end_ms = parse_int(toks[6], lineno, "end_ms");
      item.size_bytes = parse_positive(toks[7], lineno, "size_bytes");
      item.layer = toks.size() == 9 ? static_cast<int>(parse_int(toks[8], lineno, "layer")) : 3;
      scn.items.push_back(std::move(item));
    } else if (kw == "requester") {
      expect(1, 1, "requester <node_id>");
      scn.requester = toks[1];
    } else if (kw == "bytecode_provider") {
      expect(1, 1, "bytecode_provider <node_id>");
      scn.bytecode_provider = toks[1];
    } else if (kw == "query") {
      expect(2, 3, "query <model_id> <region> [at_ms]");
      Query q;
      q.model_id = toks[1];
      q.area = RegionId{toks[2]};
      q.at_ms = toks.size() == 4 ? parse_int(toks[3], lineno, "at_ms") : 0;
      scn.queries.push_back(std::move(q));
    } else if (kw == "set") {
      expect(2, 2, "set <header_bytes|request_bytes> <n>");
      if (toks[1] == "header_bytes") {
        scn.wire.header_bytes = static_cast<std::uint32_t>(parse_positive(toks[2], lineno, "header_bytes"));
      } else if (toks[1] == "request_bytes") {
        scn.wire.request_bytes = static_cast<std::uint32_t>(parse_positive(toks[2], lineno, "request_bytes"));
      } else {
        throw ScenarioError("line " + std::to_string(lineno) + ": unknown constant '" + toks[1] +
                            "'");
      }
    } else if (kw == "horizon_ms") {
      expect(1, 1, "horizon_ms <n>");
      scn.horizon_ms = static_cast<std::int64_t>(parse_positive(toks[1], lineno, "horizon_ms"));
    } else {
      throw ScenarioError("line " + std::to_string(lineno) + ": unknown directive '" + kw + "'");
    }
  }
  if (scn.requester.empty()) throw ScenarioError("no requester declared");
  if (scn.queries.empty()) throw ScenarioError("no queries declared");
  return scn;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const ScenarioError& e) {
    throw ScenarioError(path + ": " + e.what());
  }
}

std::string serialize_scenario(const Scenario& scn) {
  std::ostringstream out;
  for (const auto& n : scn.nodes)
    out << "node " << n.id << ' ' << n.region << (n.is_server ? " server" : "") << '\n';
  for (const auto& l : scn.links)
    out << "link " << l.a << ' ' << l.b << ' ' << l.latency_ms << ' ' << l.bandwidth_Bps << '\n';
  for (const auto& m : scn.models)
    out << "model " << m.model_id << ' ' << m.bytecode_size_bytes << ' ' << m.compute_ms << ' '
        << m.sample_size_bytes << '\n';
  for (const auto& b : scn.bytecodes) out << "bytecode " << b.node_id << ' ' << b.model_id << '\n';
  for (const auto& i : scn.items)
    out << "item " << i.node_id << ' ' << i.name.str() << ' ' << value_to_string(i.value) << ' '
        << i.region.id << ' ' << i.validity.start_ms << ' ' << i.validity.end_ms << ' '
        << i.size_bytes << ' ' << i.layer << '\n';
  out << "set header_bytes " << scn.wire.header_bytes << '\n';
  out << "set request_bytes " << scn.wire.request_bytes << '\n';
  out << "requester " << scn.requester << '\n';
  if (!scn.bytecode_provider.empty()) out << "bytecode_provider " << scn.bytecode_provider << '\n';
  for (const auto& q : scn.queries)
    out << "query " << q.model_id << ' ' << q.area.id << ' ' << q.at_ms << '\n';
  out << "horizon_ms " << scn.horizon_ms << '\n';
  return out.str();
}

void apply_override(Scenario& scn, const std::string& key, const std::string& value) {
  auto as_positive = [&](const char* what) { return parse_positive(value, 0, what); };
  if (key == "header_bytes") {
    scn.wire.header_bytes = static_cast<std::uint32_t>(as_positive("header_bytes"));
  } else if (key == "request_bytes") {
    scn.wire.request_bytes = static_cast<std::uint32_t>(as_positive("request_bytes"));
  } else if (key == "sample_size_bytes") {
    auto v = as_positive("sample_size_bytes");
    for (auto& m : scn.models) m.sample_size_bytes = v;
  } else if (key == "bytecode_size_bytes") {
    auto v = as_positive("bytecode_size_bytes");
    for (auto& m : scn.models) m.bytecode_size_bytes = v;
  } else if (key == "compute_ms") {
    auto v = parse_int(value, 0, "compute_ms");
    if (v < 0) throw ScenarioError("compute_ms must be >= 0");
    for (auto& m : scn.models) m.compute_ms = v;
  } else if (key == "item_size_bytes") {
    auto v = as_positive("item_size_bytes");
    for (auto& i : scn.items) i.size_bytes = v;
  } else if (key == "link_latency_ms") {
    auto v = parse_int(value, 0, "link_latency_ms");
    if (v < 0) throw ScenarioError("link_latency_ms must be >= 0");
    for (auto& l : scn.links) l.latency_ms = v;
  } else if (key == "link_bandwidth_Bps") {
    auto v = as_positive("link_bandwidth_Bps");
    for (auto& l : scn.links) l.bandwidth_Bps = v;
  } else if (key == "horizon_ms") {
    scn.horizon_ms = static_cast<std::int64_t>(as_positive("horizon_ms"));
  } else {
    throw ScenarioError("unknown override key '" + key + "'");
  }
}

Topology build_topology(const Scenario& scn, const SemanticRegistry& registry) {
  Topology topo = Topology::build(registry, scn.nodes, scn.links);

  std::map<std::string, ModelParams> catalog;
  for (const auto& m : scn.models) {
    if (!catalog.emplace(m.model_id, m).second)
      throw ScenarioError("model '" + m.model_id + "' declared twice");
    if (!has_builtin_handler(m.model_id))
      throw ScenarioError("model '" + m.model_id + "' has no registered handler");
  }
  for (auto& node : topo.nodes()) {
    node.models = catalog;
    for (const auto& [id, params] : catalog)
      node.kb.register_description(builtin_description(id));
  }
  for (const auto& placement : scn.bytecodes) {
    auto it = catalog.find(placement.model_id);
    if (it == catalog.end())
      throw ScenarioError("bytecode placement references undeclared model '" +
                          placement.model_id + "'");
    if (!topo.has_node(placement.node_id))
      throw ScenarioError("bytecode placement references unknown node '" + placement.node_id +
                          "'");
    topo.node(placement.node_id).kb.install_bytecode(make_bytecode(it->second));
  }
  std::uint64_t item_counter = 0;
  for (const auto& placement : scn.items) {
    if (!topo.has_node(placement.node_id))
      throw ScenarioError("item placement references unknown node '" + placement.node_id + "'");
    ContentItem item =
        make_information(registry, "i" + std::to_string(++item_counter), placement.name,
                         placement.value, placement.region, placement.validity, placement.layer,
                         placement.size_bytes);
    topo.node(placement.node_id).ldm.insert(std::move(item));
  }
  if (!topo.has_node(scn.requester))
    throw ScenarioError("requester '" + scn.requester + "' is not a node");
  if (!scn.bytecode_provider.empty() && !topo.has_node(scn.bytecode_provider))
    throw ScenarioError("bytecode_provider '" + scn.bytecode_provider + "' is not a node");
  std::set<std::string> query_areas;
  for (const auto& q : scn.queries) {
    if (!catalog.count(q.model_id))
      throw ScenarioError("query references undeclared model '" + q.model_id + "'");
    topo.area_server(q.area);  // throws when the region has no server
    if (!query_areas.insert(q.area.id).second)
      throw ScenarioError("duplicate query for area '" + q.area.id + "'");
    if (q.at_ms < 0) throw ScenarioError("query at_ms must be >= 0");
  }
  return topo;
}

// ---- the event loop ----

namespace {

struct HopEvent {
  VkqlMessage msg;
  std::string from;
  std::string at;
  std::string target;
};

struct ComputeEvent {
  std::size_t query_idx;
};

struct Event {
  std::int64_t t = 0;
  std::uint64_t seq = 0;
  std::variant<HopEvent, ComputeEvent> payload;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.t, a.seq) > std::tie(b.t, b.seq);
  }
};

constexpr int kSetup = -1;

std::string link_key(const std::string& a, const std::string& b) {
  return a < b ? a + "<->" + b : b + "<->" + a;
}

class Simulation {
 public:
  Simulation(Topology& topo, const Scenario& scn, bool vkn_mode)
      : topo_(topo), scn_(scn), vkn_(vkn_mode) {
    metrics_.strategy = vkn_mode ? "vkn" : "info_centric";
  }

  RunMetrics run();

 private:
  struct QueryState {
    Query query;
    std::int64_t emit_ms = -1;
    bool done = false;
    bool fell_back = false;
    bool compute_scheduled = false;
    std::map<std::string, ContentItem> received;  // param id -> item (info flow)
    std::set<std::uint32_t> open_reqs;
  };

  void schedule(std::int64_t t, std::variant<HopEvent, ComputeEvent> payload) {
    queue_.push({t, seq_++, std::move(payload)});
  }

  // Books the message and puts its first hop on the wire.
  void emit(const std::string& from, VkqlMessage msg, std::int64_t t, int attribution) {
    metrics_.message_count += 1;
    metrics_.emitted_bytes += msg.size_bytes;
    metrics_.per_kind_bytes[to_string(msg.kind)] += msg.size_bytes;
    if (attribution == kSetup) {
      metrics_.setup_bytes += msg.size_bytes;
    } else {
      auto& q = queries_[attribution];
      q.emit_ms = q.emit_ms < 0 ? t : q.emit_ms;
      per_query_emitted_[attribution] += msg.size_bytes;
      per_query_messages_[attribution] += 1;
    }
    attribution_[msg.msg_id] = attribution;
    std::string target = topo_.resolve(msg.dst);
    if (target == from) {
      schedule(t, HopEvent{std::move(msg), from, from, target});
      return;
    }
    const std::string& next = topo_.next_hop(from, target);
    std::int64_t arrive = t + transit_time(msg.size_bytes, topo_.link_between(from, next));
    schedule(arrive, HopEvent{std::move(msg), from, next, target});
  }

  void open_request(std::uint32_t msg_id, std::size_t query_idx) {
    queries_[query_idx].open_reqs.insert(msg_id);
    open_owner_[msg_id] = query_idx;
  }

  std::size_t close_request(std::uint32_t req_id, const char* kind) {
    auto it = open_owner_.find(req_id);
    if (it == open_owner_.end())
      throw SimAuditError(std::string(kind) + " answers request " + std::to_string(req_id) +
                          " which is not open");
    std::size_t idx = it->second;
    open_owner_.erase(it);
    queries_[idx].open_reqs.erase(req_id);
    return idx;
  }

  std::string pick_provider(const std::string& model_id) const {
    if (!scn_.bytecode_provider.empty()) {
      if (!topo_.node_has_bytecode(scn_.bytecode_provider, model_id))
        throw ScenarioError("bytecode_provider '" + scn_.bytecode_provider +
                            "' does not hold bytecode for '" + model_id + "'");
      return scn_.bytecode_provider;
    }
    const std::string* best = nullptr;
    int best_hops = 0;
    for (const auto& node : topo_.nodes()) {
      if (node.node_id == scn_.requester) continue;
      if (!node.kb.has_bytecode(model_id)) continue;
      int hops = topo_.hop_count(scn_.requester, node.node_id);
      if (!best || hops < best_hops || (hops == best_hops && node.node_id < *best)) {
        best = &node.node_id;
        best_hops = hops;
      }
    }
    if (!best)
      throw ScenarioError("no node holds bytecode for '" + model_id + "'");
    return *best;
  }

  void start_setup(std::int64_t t) {
    if (setup_state_ != SetupState::running) setup_started_ms_ = t;
    setup_state_ = SetupState::running;
    const std::string& model = setup_models_.front();
    std::string provider = pick_provider(model);
    VkqlMessage req = make_message(ids_.alloc(), scn_.requester, Address::node(provider),
                                   BytecodeRequest{model, scn_.requester}, scn_.wire);
    setup_open_.insert(req.msg_id);
    emit(scn_.requester, std::move(req), t, kSetup);
  }

  void emit_query(std::size_t idx, std::int64_t t) {
    QueryState& state = queries_[idx];
    if (vkn_ && !state.fell_back) {
      CreateRequest body{state.query.model_id, state.query.area, t, scn_.requester, 0, {}};
      VkqlMessage req = make_message(ids_.alloc(), scn_.requester,
                                     Address::region(state.query.area.id), std::move(body),
                                     scn_.wire);
      open_request(req.msg_id, idx);
      emit(scn_.requester, std::move(req), t, static_cast<int>(idx));
      return;
    }
    const ModelDescription* desc =
        topo_.node(scn_.requester).kb.lookup_description(state.query.model_id);
    if (!desc) throw ScenarioError("requester has no description for " + state.query.model_id);
    for (const auto& binding : desc->inputs) {
      VkqlMessage req = make_message(
          ids_.alloc(), scn_.requester, Address::region(state.query.area.id),
          InfoRequest{binding.type_name, state.query.area, scn_.requester}, scn_.wire);
      open_request(req.msg_id, idx);
      emit(scn_.requester, std::move(req), t, static_cast<int>(idx));
    }
  }

  void requester_deliver(const VkqlMessage& msg, std::int64_t t);
  void finish_query(std::size_t idx, std::int64_t t, std::string comfort);
  void fall_back(std::size_t idx, std::int64_t t);
  void on_setup_complete(std::int64_t t);
  void process_hop(const HopEvent& hop, std::int64_t t);
  void process_compute(const ComputeEvent& ev, std::int64_t t);

  Topology& topo_;
  const Scenario& scn_;
  bool vkn_;
  RunMetrics metrics_;
  MsgIdSource ids_;
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::uint64_t seq_ = 0;
  std::vector<QueryState> queries_;
  std::map<std::uint32_t, int> attribution_;            // msg id -> query idx or kSetup
  std::map<std::uint32_t, std::size_t> open_owner_;     // open REQ id -> query idx
  std::map<std::size_t, std::uint64_t> per_query_emitted_;
  std::map<std::size_t, std::uint64_t> per_query_messages_;
  std::map<std::size_t, std::uint64_t> per_query_link_bytes_;

  enum class SetupState { idle, running, done };
  SetupState setup_state_ = SetupState::idle;
  std::deque<std::string> setup_models_;       // bytecodes still to download
  std::set<std::uint32_t> setup_open_;
  std::int64_t setup_started_ms_ = 0;
  std::vector<std::size_t> after_setup_;       // queries waiting for setup completion
  std::set<std::size_t> deferred_emit_;        // queries whose emission waits on a timer
  bool horizon_cut_ = false;
};

void Simulation::finish_query(std::size_t idx, std::int64_t t, std::string comfort) {
  QueryState& state = queries_[idx];
  state.done = true;
  QueryMetrics qm;
  qm.area = state.query.area.id;
  qm.delay_ms = t - state.emit_ms;
  qm.comfort = std::move(comfort);
  qm.fell_back = state.fell_back;
  metrics_.per_query[idx] = std::move(qm);
}

void Simulation::fall_back(std::size_t idx, std::int64_t t) {
  QueryState& state = queries_[idx];
  state.fell_back = true;
  const NodeRole& requester = topo_.node(scn_.requester);
  if (!requester.kb.has_bytecode(state.query.model_id)) {
    if (std::find(setup_models_.begin(), setup_models_.end(), state.query.model_id) ==
        setup_models_.end())
      setup_models_.push_back(state.query.model_id);
    after_setup_.push_back(idx);
    if (setup_state_ != SetupState::running) start_setup(t);
    return;
  }
  emit_query(idx, t);
}

void Simulation::on_setup_complete(std::int64_t t) {
  setup_state_ = SetupState::done;
  metrics_.setup_delay_ms = t - setup_started_ms_;
  for (std::size_t idx : after_setup_) {
    QueryState& state = queries_[idx];
    std::int64_t when = std::max(state.query.at_ms, t);
    if (when == t) {
      emit_query(idx, t);
    } else {
      // Defer to the query's own start time with an empty hop at the
      // requester so timing stays event-driven.
      schedule(when, ComputeEvent{idx});  // reused as "emit now" marker
      deferred_emit_.insert(idx);
    }
  }
  after_setup_.clear();
}

void Simulation::requester_deliver(const VkqlMessage& msg, std::int64_t t) {
  switch (msg.kind) {
    case MsgKind::bytecode_resp: {
      const auto& resp = std::get<BytecodeResponse>(msg.body);
      if (!setup_open_.erase(resp.req_id))
        throw SimAuditError("bytecode response answers request that is not open");
      NodeRole& requester = topo_.node(scn_.requester);
      requester.models[resp.params.model_id] = resp.params;
      requester.kb.register_description(builtin_description(resp.params.model_id));
      requester.kb.install_bytecode(make_bytecode(resp.params));
      setup_models_.pop_front();
      if (!setup_models_.empty()) {
        start_setup(t);
      } else {
        on_setup_complete(t);
      }
      return;
    }
    case MsgKind::info_resp: {
      const auto& resp = std::get<InfoResponse>(msg.body);
      std::size_t idx = close_request(resp.req_id, "INFO_RESP");
      QueryState& state = queries_[idx];
      NodeRole& requester = topo_.node(scn_.requester);
      const ModelDescription* desc = requester.kb.lookup_description(state.query.model_id);
      for (const auto& binding : desc->inputs) {
        if (binding.type_name == resp.item.name) state.received[binding.param_id] = resp.item;
      }
      if (state.received.size() == desc->inputs.size() && !state.compute_scheduled) {
        state.compute_scheduled = true;
        std::int64_t compute = requester.models.at(state.query.model_id).compute_ms;
        schedule(t + compute, ComputeEvent{idx});
      }
      return;
    }
    case MsgKind::create_resp: {
      const auto& resp = std::get<CreateResponse>(msg.body);
      std::size_t idx = close_request(resp.req_id, "CREATE_RESP");
      NodeRole& requester = topo_.node(scn_.requester);
      requester.ldm.insert(resp.sample);
      finish_query(idx, t, std::get<std::string>(resp.sample.value));
      return;
    }
    case MsgKind::error: {
      const auto& err = std::get<ErrorBody>(msg.body);
      if (setup_open_.count(err.req_id))
        throw ScenarioError("bytecode download failed: " + std::string(to_string(err.code)) +
                            " " + err.detail);
      std::size_t idx = close_request(err.req_id, "ERROR");
      if (err.code == ErrorCode::knowledge_unavailable && vkn_) {
        fall_back(idx, t);
        return;
      }
      throw ScenarioError("area " + queries_[idx].query.area.id + ": " +
                          to_string(err.code) + " " + err.detail);
    }
    default:
      throw SimAuditError(std::string("requester received unexpected ") + to_string(msg.kind));
  }
}

void Simulation::process_hop(const HopEvent& hop, std::int64_t t) {
  const VkqlMessage& msg = hop.msg;
  if (hop.from != hop.at) {
    metrics_.trace.push_back(trace_line(t, hop.from, hop.at, msg.kind, msg.size_bytes));
    std::uint64_t size = msg.size_bytes;
    metrics_.per_link_bytes[link_key(hop.from, hop.at)] += size;
    metrics_.total_bytes += size;
    int attribution = attribution_.at(msg.msg_id);
    if (attribution != kSetup) per_query_link_bytes_[attribution] += size;
  }
  if (hop.at != hop.target) {
    const std::string& next = topo_.next_hop(hop.at, hop.target);
    std::int64_t arrive = t + transit_time(msg.size_bytes, topo_.link_between(hop.at, next));
    schedule(arrive, HopEvent{msg, hop.at, next, hop.target});
    return;
  }
  if (hop.target == scn_.requester &&
      (msg.kind == MsgKind::describe_resp || msg.kind == MsgKind::bytecode_resp ||
       msg.kind == MsgKind::create_resp || msg.kind == MsgKind::info_resp ||
       msg.kind == MsgKind::error)) {
    requester_deliver(msg, t);
    return;
  }
  NodeRole& node = topo_.node(hop.target);
  std::vector<Emission> emissions = handle_message(node, msg, t, topo_, ids_, scn_.wire);
  int attribution = attribution_.at(msg.msg_id);
  for (auto& emission : emissions) {
    attribution_[emission.msg.msg_id] = attribution;
    if (attribution != kSetup) {
      per_query_emitted_[attribution] += emission.msg.size_bytes;
      per_query_messages_[attribution] += 1;
    } else {
      metrics_.setup_bytes += emission.msg.size_bytes;
    }
    metrics_.message_count += 1;
    metrics_.emitted_bytes += emission.msg.size_bytes;
    metrics_.per_kind_bytes[to_string(emission.msg.kind)] += emission.msg.size_bytes;
    std::string target = topo_.resolve(emission.msg.dst);
    std::int64_t t_emit = t + emission.delay_offset_ms;
    if (target == hop.target) {
      schedule(t_emit, HopEvent{std::move(emission.msg), target, target, target});
      continue;
    }
    const std::string& next = topo_.next_hop(hop.target, target);
    std::int64_t arrive =
        t_emit + transit_time(emission.msg.size_bytes, topo_.link_between(hop.target, next));
    schedule(arrive, HopEvent{std::move(emission.msg), hop.target, next, target});
  }
}

void Simulation::process_compute(const ComputeEvent& ev, std::int64_t t) {
  if (deferred_emit_.erase(ev.query_idx)) {
    emit_query(ev.query_idx, t);
    return;
  }
  QueryState& state = queries_[ev.query_idx];
  NodeRole& requester = topo_.node(scn_.requester);
  const ModelDescription* desc = requester.kb.lookup_description(state.query.model_id);
  const ModelBytecode* bytecode = requester.kb.bytecode(state.query.model_id);
  if (!bytecode) throw ScenarioError("requester lacks bytecode for " + state.query.model_id);
  for (const auto& [param, item] : state.received) {
    if (!requester.ldm.has_item(item.item_id)) requester.ldm.insert(item);
  }
  try {
    ContentItem sample =
        execute(requester.ldm.registry(), *desc, *bytecode, state.received, t,
                requester.models.at(state.query.model_id).sample_size_bytes);
    requester.ldm.insert(sample);
    finish_query(ev.query_idx, t, std::get<std::string>(sample.value));
  } catch (const VknError& e) {
    throw ScenarioError("local compute for area " + state.query.area.id + " failed: " + e.what());
  }
}

RunMetrics Simulation::run() {
  queries_.resize(scn_.queries.size());
  metrics_.per_query.resize(scn_.queries.size());
  for (std::size_t i = 0; i < scn_.queries.size(); ++i) {
    queries_[i].query = scn_.queries[i];
    metrics_.per_query[i].area = scn_.queries[i].area.id;
  }

  const NodeRole& requester = topo_.node(scn_.requester);
  if (!vkn_) {
    std::set<std::string> needed;
    for (const auto& q : scn_.queries) {
      if (!requester.kb.has_bytecode(q.model_id)) needed.insert(q.model_id);
    }
    for (const auto& m : needed) setup_models_.push_back(m);
  }
  if (!setup_models_.empty()) {
    for (std::size_t i = 0; i < queries_.size(); ++i) after_setup_.push_back(i);
    start_setup(0);
  } else {
    for (std::size_t i = 0; i < queries_.size(); ++i) {
      QueryState& state = queries_[i];
      if (state.query.at_ms == 0) {
        emit_query(i, 0);
      } else {
        schedule(state.query.at_ms, ComputeEvent{i});
        deferred_emit_.insert(i);
      }
    }
  }

  while (!queue_.empty()) {
    Event ev = queue_.top();
    queue_.pop();
    if (ev.t > scn_.horizon_ms) {
      horizon_cut_ = true;
      break;
    }
    if (std::holds_alternative<HopEvent>(ev.payload)) {
      process_hop(std::get<HopEvent>(ev.payload), ev.t);
    } else {
      process_compute(std::get<ComputeEvent>(ev.payload), ev.t);
    }
  }

  for (std::size_t i = 0; i < queries_.size(); ++i) {
    QueryMetrics& qm = metrics_.per_query[i];
    qm.emitted_bytes = per_query_emitted_[i];
    qm.link_bytes = per_query_link_bytes_[i];
    qm.messages = per_query_messages_[i];
    qm.fell_back = queries_[i].fell_back;
    if (!queries_[i].done) {
      if (!horizon_cut_)
        throw SimAuditError("query for area " + queries_[i].query.area.id +
                            " never completed although the event queue drained");
      qm.comfort = std::nullopt;
      qm.delay_ms = -1;
    }
  }
  if (!horizon_cut_ && !open_owner_.empty())
    throw SimAuditError("open requests without a terminal response remain");

  std::uint64_t link_sum = 0;
  for (const auto& [key, bytes] : metrics_.per_link_bytes) link_sum += bytes;
  if (link_sum != metrics_.total_bytes)
    throw SimAuditError("per-link byte counters disagree with the total");
  return metrics_;
}

}  // namespace

RunMetrics run_strategy_info_centric(const Topology& topology, const Scenario& scenario) {
  Topology copy = topology;
  Simulation sim(copy, scenario, false);
  return sim.run();
}

RunMetrics run_strategy_vkn(const Topology& topology, const Scenario& scenario) {
  Topology copy = topology;
  Simulation sim(copy, scenario, true);
  return sim.run();
}

RouteDecision decision_of(const RunMetrics& metrics) {
  std::map<std::string, std::optional<std::string>> samples;
  for (const auto& q : metrics.per_query) samples[q.area] = q.comfort;
  return decide_route(samples);
}

ComparisonReport run_comparison(const Topology& topology, const Scenario& scenario) {
  ComparisonReport report;
  report.info_centric = run_strategy_info_centric(topology, scenario);
  report.vkn = run_strategy_vkn(topology, scenario);
  for (std::size_t i = 0; i < report.info_centric.per_query.size(); ++i) {
    const QueryMetrics& info = report.info_centric.per_query[i];
    const QueryMetrics& vkn = report.vkn.per_query[i];
    AreaDelta delta;
    delta.area = info.area;
    delta.emitted_bytes_saved =
        static_cast<std::int64_t>(info.emitted_bytes) - static_cast<std::int64_t>(vkn.emitted_bytes);
    delta.link_bytes_saved =
        static_cast<std::int64_t>(info.link_bytes) - static_cast<std::int64_t>(vkn.link_bytes);
    delta.delay_saved_ms = info.delay_ms - vkn.delay_ms;
    report.deltas.push_back(delta);
  }
  report.info_decision = decision_of(report.info_centric);
  report.vkn_decision = decision_of(report.vkn);
  report.decisions_agree = report.info_decision == report.vkn_decision;
  return report;
}

ComparisonReport run_comparison(const Scenario& scenario, const SemanticRegistry& registry) {
  Topology topology = build_topology(scenario, registry);
  return run_comparison(topology, scenario);
}

// ---- rendering ----

namespace {

std::string comfort_or_dash(const std::optional<std::string>& comfort) {
  return comfort ? *comfort : "UNAVAILABLE";
}

nlohmann::ordered_json metrics_json(const RunMetrics& m) {
  nlohmann::ordered_json j;
  j["strategy"] = m.strategy;
  j["total_link_bytes"] = m.total_bytes;
  j["emitted_bytes"] = m.emitted_bytes;
  j["message_count"] = m.message_count;
  j["setup_bytes"] = m.setup_bytes;
  j["setup_delay_ms"] = m.setup_delay_ms;
  nlohmann::ordered_json per_kind = nlohmann::ordered_json::object();
  for (const auto& [kind, bytes] : m.per_kind_bytes) per_kind[kind] = bytes;
  j["per_kind_bytes"] = per_kind;
  nlohmann::ordered_json per_link = nlohmann::ordered_json::object();
  for (const auto& [key, bytes] : m.per_link_bytes) per_link[key] = bytes;
  j["per_link_bytes"] = per_link;
  nlohmann::ordered_json areas = nlohmann::ordered_json::array();
  for (const auto& q : m.per_query) {
    nlohmann::ordered_json a;
    a["area"] = q.area;
    a["emitted_bytes"] = q.emitted_bytes;
    a["link_bytes"] = q.link_bytes;
    a["delay_ms"] = q.delay_ms;
    a["messages"] = q.messages;
    a["comfort"] = comfort_or_dash(q.comfort);
    a["fell_back"] = q.fell_back;
    areas.push_back(a);
  }
  j["per_area"] = areas;
  return j;
}

nlohmann::ordered_json decision_json(const RouteDecision& d) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json areas = nlohmann::ordered_json::object();
  for (const auto& [region, comfort] : d.area_comfort) areas[region] = comfort_or_dash(comfort);
  j["area_comfort"] = areas;
  j["chosen"] = d.chosen;
  j["no_comfort_data"] = d.no_comfort_data;
  return j;
}

}  // namespace

std::string render_metrics_text(const RunMetrics& m) {
  std::ostringstream out;
  out << "strategy " << m.strategy << '\n';
  out << "  total_link_bytes " << m.total_bytes << '\n';
  out << "  emitted_bytes " << m.emitted_bytes << '\n';
  out << "  message_count " << m.message_count << '\n';
  out << "  setup_bytes " << m.setup_bytes << " setup_delay_ms " << m.setup_delay_ms << '\n';
  for (const auto& [kind, bytes] : m.per_kind_bytes)
    out << "  kind " << kind << ' ' << bytes << "B\n";
  for (const auto& [key, bytes] : m.per_link_bytes)
    out << "  link " << key << ' ' << bytes << "B\n";
  for (const auto& q : m.per_query) {
    out << "  area " << q.area << " comfort=" << comfort_or_dash(q.comfort)
        << " emitted_bytes=" << q.emitted_bytes << " link_bytes=" << q.link_bytes
        << " delay_ms=" << q.delay_ms << " messages=" << q.messages
        << (q.fell_back ? " fallback" : "") << '\n';
  }
  return out.str();
}

std::string render_report_text(const ComparisonReport& r) {
  std::ostringstream out;
  out << render_metrics_text(r.info_centric);
  out << render_metrics_text(r.vkn);
  out << "deltas (info_centric - vkn)\n";
  for (const auto& d : r.deltas) {
    out << "  area " << d.area << " bytes_saved=" << d.emitted_bytes_saved
        << " link_bytes_saved=" << d.link_bytes_saved << " delay_saved_ms=" << d.delay_saved_ms
        << '\n';
  }
  auto decision = [&](const char* label, const RouteDecision& d) {
    out << "decision " << label << ": chosen=" << d.chosen;
    if (d.no_comfort_data) out << " (no comfort data)";
    for (const auto& [region, comfort] : d.area_comfort)
      out << ' ' << region << '=' << comfort_or_dash(comfort);
    out << '\n';
  };
  decision("info_centric", r.info_decision);
  decision("vkn", r.vkn_decision);
  out << "decisions_agree " << (r.decisions_agree ? "yes" : "no") << '\n';
  return out.str();
}

std::string render_metrics_json(const RunMetrics& m) { return metrics_json(m).dump(2) + "\n"; }

std::string render_report_json(const ComparisonReport& r) {
  nlohmann::ordered_json j;
  j["info_centric"] = metrics_json(r.info_centric);
  j["vkn"] = metrics_json(r.vkn);
  nlohmann::ordered_json deltas = nlohmann::ordered_json::array();
  for (const auto& d : r.deltas) {
    nlohmann::ordered_json dj;
    dj["area"] = d.area;
    dj["emitted_bytes_saved"] = d.emitted_bytes_saved;
    dj["link_bytes_saved"] = d.link_bytes_saved;
    dj["delay_saved_ms"] = d.delay_saved_ms;
    deltas.push_back(dj);
  }
  j["deltas"] = deltas;
  j["decision"] = nlohmann::ordered_json::object();
  j["decision"]["info_centric"] = decision_json(r.info_decision);
  j["decision"]["vkn"] = decision_json(r.vkn_decision);
  j["decision"]["agree"] = r.decisions_agree;
  return j.dump(2) + "\n";
}

}  // namespace vkn::sim
