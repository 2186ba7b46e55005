#pragma once
// VKQL: the querying protocol between knowledge bases. Four exchanges:
// description lookup, bytecode retrieval, delegated knowledge creation and
// plain named-information retrieval, plus an ERROR terminal.
//
// Wire layout (big-endian throughout, strings are u16 length + bytes):
//   header: msg_id u32, kind u8, src string, dst tag u8 (0 node / 1 region),
//           dst string, zero-padded to header_bytes
//   body:   kind-specific fields; request and error bodies are zero-padded
//           to request_bytes so their encoded length equals the accounted
//           size. Response payloads (bytecode, items) travel as declared
//           sizes, the codec carries only their metadata.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vkn/engine.hpp"
#include "vkn/ldm.hpp"
#include "vkn/semantic.hpp"

namespace vkn {

enum class MsgKind : std::uint8_t {
  describe_req = 0,
  describe_resp = 1,
  bytecode_req = 2,
  bytecode_resp = 3,
  create_req = 4,
  create_resp = 5,
  info_req = 6,
  info_resp = 7,
  error = 8,
};

const char* to_string(MsgKind kind);  // "DESCRIBE_REQ", ...

enum class ErrorCode : std::uint8_t {
  not_found = 0,
  inputs_unavailable = 1,
  knowledge_unavailable = 2,
  bad_request = 3,
};

const char* to_string(ErrorCode code);

// dst is either a concrete node or a region (region-addressed requests are
// anchored at the region's area server).
struct Address {
  bool is_region = false;
  std::string id;

  static Address node(std::string id) { return {false, std::move(id)}; }
  static Address region(std::string id) { return {true, std::move(id)}; }
  bool operator==(const Address&) const = default;
};

struct DescribeRequest {
  std::string query;  // model id or goal semantic name
  std::string reply_to;
  bool operator==(const DescribeRequest&) const = default;
};

struct DescribeResponse {
  std::uint32_t req_id = 0;
  std::vector<std::string> vkmd_texts;  // canonical serializations
  bool operator==(const DescribeResponse&) const = default;
};

struct BytecodeRequest {
  std::string model_id;
  std::string reply_to;
  bool operator==(const BytecodeRequest&) const = default;
};

struct BytecodeResponse {
  std::uint32_t req_id = 0;
  ModelParams params;  // payload itself travels as params.bytecode_size_bytes
  bool operator==(const BytecodeResponse&) const = default;
};

struct CreateRequest {
  std::string model_id;
  RegionId target_region;
  std::int64_t at_ms = 0;  // requested evaluation time
  std::string reply_to;
  std::uint32_t origin_req_id = 0;   // set on forwards, 0 on fresh requests
  std::vector<std::string> visited;  // loop prevention for intra-region forwards
  bool operator==(const CreateRequest&) const = default;
};

struct CreateResponse {
  std::uint32_t req_id = 0;
  ContentItem sample;
  bool operator==(const CreateResponse&) const = default;
};

struct InfoRequest {
  SemanticName name;
  RegionId target_region;
  std::string reply_to;
  bool operator==(const InfoRequest&) const = default;
};

struct InfoResponse {
  std::uint32_t req_id = 0;
  ContentItem item;
  bool operator==(const InfoResponse&) const = default;
};

struct ErrorBody {
  std::uint32_t req_id = 0;
  ErrorCode code = ErrorCode::bad_request;
  std::string detail;
  bool operator==(const ErrorBody&) const = default;
};

using Body = std::variant<DescribeRequest, DescribeResponse, BytecodeRequest, BytecodeResponse,
                          CreateRequest, CreateResponse, InfoRequest, InfoResponse, ErrorBody>;

MsgKind kind_of(const Body& body);

struct WireConfig {
  std::uint32_t header_bytes = 32;
  std::uint32_t request_bytes = 64;

  bool operator==(const WireConfig&) const = default;
};

struct VkqlMessage {
  std::uint32_t msg_id = 0;
  MsgKind kind = MsgKind::error;
  std::string src;
  Address dst;
  Body body;
  std::uint64_t size_bytes = 0;  // accounted size per the size model

  bool operator==(const VkqlMessage&) const = default;
};

// header_bytes plus: requests and errors cost request_bytes; responses cost
// their payload (sum of description texts, declared bytecode size, item size,
// sample size).
std::uint64_t message_size(MsgKind kind, const Body& body, const WireConfig& cfg);

// Builds a message with kind derived from the body and size_bytes filled in.
VkqlMessage make_message(std::uint32_t msg_id, std::string src, Address dst, Body body,
                         const WireConfig& cfg);

std::vector<std::uint8_t> encode(const VkqlMessage& msg, const WireConfig& cfg);
VkqlMessage decode(std::span<const std::uint8_t> bytes, const WireConfig& cfg);

// One participating node: identity, region role and its two stores.
struct NodeRole {
  std::string node_id;
  RegionId region;
  bool is_area_server = false;
  KnowledgeBase kb;
  LdmStore ldm;
  std::map<std::string, ModelParams> models;  // scenario-wide model constants
};

// What a handler may ask about the rest of the network.
class DirectoryView {
 public:
  virtual ~DirectoryView() = default;
  virtual std::vector<std::string> nodes_in_region(const RegionId& region) const = 0;  // sorted
  virtual bool node_has_bytecode(const std::string& node_id,
                                 const std::string& model_id) const = 0;
};

struct MsgIdSource {
  std::uint32_t next = 1;
  std::uint32_t alloc() { return next++; }
};

struct Emission {
  VkqlMessage msg;
  std::int64_t delay_offset_ms = 0;  // compute latency before the message leaves
};

// The per-node request state machine. Every REQ yields exactly one RESP,
// ERROR or forward; errors are messages, never silent drops.
std::vector<Emission> handle_message(NodeRole& node, const VkqlMessage& msg, std::int64_t now_ms,
                                     const DirectoryView& directory, MsgIdSource& ids,
                                     const WireConfig& cfg);

// Trace line for one hop delivery: "t=<ms> <from>→<to> <KIND> <size>B".
std::string trace_line(std::int64_t t_ms, const std::string& from, const std::string& to,
                       MsgKind kind, std::uint64_t size_bytes);

}  // namespace vkn
