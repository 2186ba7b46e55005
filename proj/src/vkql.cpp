#include "vkn/vkql.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <sstream>

namespace vkn {

const char* to_string(MsgKind kind) {
  switch (kind) {
    case MsgKind::describe_req: return "DESCRIBE_REQ";
    case MsgKind::describe_resp: return "DESCRIBE_RESP";
    case MsgKind::bytecode_req: return "BYTECODE_REQ";
    case MsgKind::bytecode_resp: return "BYTECODE_RESP";
    case MsgKind::create_req: return "CREATE_REQ";
    case MsgKind::create_resp: return "CREATE_RESP";
    case MsgKind::info_req: return "INFO_REQ";
    case MsgKind::info_resp: return "INFO_RESP";
    case MsgKind::error: return "ERROR";
  }
  return "?";
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::not_found: return "NOT_FOUND";
    case ErrorCode::inputs_unavailable: return "INPUTS_UNAVAILABLE";
    case ErrorCode::knowledge_unavailable: return "KNOWLEDGE_UNAVAILABLE";
    case ErrorCode::bad_request: return "BAD_REQUEST";
  }
  return "?";
}

MsgKind kind_of(const Body& body) {
  return static_cast<MsgKind>(body.index());  // variant order mirrors the enum
}

std::uint64_t message_size(MsgKind kind, const Body& body, const WireConfig& cfg) {
  std::uint64_t payload = 0;
  switch (kind) {
    case MsgKind::describe_req:
    case MsgKind::bytecode_req:
    case MsgKind::create_req:
    case MsgKind::info_req:
    case MsgKind::error:
      payload = cfg.request_bytes;
      break;
    case MsgKind::describe_resp:
      for (const auto& text : std::get<DescribeResponse>(body).vkmd_texts)
        payload += text.size();
      break;
    case MsgKind::bytecode_resp:
      payload = std::get<BytecodeResponse>(body).params.bytecode_size_bytes;
      break;
    case MsgKind::create_resp:
      payload = std::get<CreateResponse>(body).sample.size_bytes;
      break;
    case MsgKind::info_resp:
      payload = std::get<InfoResponse>(body).item.size_bytes;
      break;
  }
  return cfg.header_bytes + payload;
}

VkqlMessage make_message(std::uint32_t msg_id, std::string src, Address dst, Body body,
                         const WireConfig& cfg) {
  VkqlMessage msg;
  msg.msg_id = msg_id;
  msg.kind = kind_of(body);
  msg.src = std::move(src);
  msg.dst = std::move(dst);
  msg.size_bytes = message_size(msg.kind, body, cfg);
  msg.body = std::move(body);
  return msg;
}

// ---- codec ----

namespace {

struct Writer {
  std::vector<std::uint8_t> buf;

  void u8(std::uint8_t v) { buf.push_back(v); }
  void u16(std::uint16_t v) {
    buf.push_back(static_cast<std::uint8_t>(v >> 8));
    buf.push_back(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8)
      buf.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  void u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
      buf.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    if (s.size() > 0xFFFF) throw EncodeError("string longer than 65535 bytes");
    u16(static_cast<std::uint16_t>(s.size()));
    buf.insert(buf.end(), s.begin(), s.end());
  }
  void pad_to(std::size_t target, const char* section) {
    if (buf.size() > target)
      throw EncodeError(std::string(section) + " section overflows its fixed size (" +
                        std::to_string(buf.size()) + " > " + std::to_string(target) + ")");
    buf.resize(target, 0);
  }
};

struct Reader {
  std::span<const std::uint8_t> buf;
  std::size_t pos = 0;

  void need(std::size_t n) {
    if (pos + n > buf.size()) throw DecodeError(pos, "truncated message");
  }
  std::uint8_t u8() {
    need(1);
    return buf[pos++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = (static_cast<std::uint16_t>(buf[pos]) << 8) | buf[pos + 1];
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | buf[pos + i];
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | buf[pos + i];
    pos += 8;
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    std::uint16_t n = u16();
    need(n);
    std::string s(reinterpret_cast<const char*>(buf.data() + pos), n);
    pos += n;
    return s;
  }
  void skip_to(std::size_t target, const char* section) {
    if (pos > target)
      throw DecodeError(pos, std::string(section) + " section exceeds its fixed size");
    if (target > buf.size()) throw DecodeError(buf.size(), "truncated message");
    pos = target;
  }
};

void write_item(Writer& w, const ContentItem& item) {
  w.str(item.item_id);
  w.str(item.name.str());
  if (std::holds_alternative<std::string>(item.value)) {
    w.u8(0);
    w.str(std::get<std::string>(item.value));
  } else {
    w.u8(1);
    w.f64(std::get<double>(item.value));
  }
  w.str(item.region.id);
  w.i64(item.validity.start_ms);
  w.i64(item.validity.end_ms);
  w.u8(static_cast<std::uint8_t>(item.layer));
  w.u64(item.size_bytes);
  w.u8(item.kind == ContentKind::knowledge ? 1 : 0);
  w.str(item.provenance.model_id);
  if (item.provenance.input_item_ids.size() > 0xFFFF)
    throw EncodeError("too many provenance ids");
  w.u16(static_cast<std::uint16_t>(item.provenance.input_item_ids.size()));
  for (const auto& id : item.provenance.input_item_ids) w.str(id);
}

ContentItem read_item(Reader& r) {
  ContentItem item;
  item.item_id = r.str();
  item.name = parse_semantic_name(r.str());
  if (r.u8() == 0) {
    item.value = r.str();
  } else {
    item.value = r.f64();
  }
  item.region.id = r.str();
  item.validity.start_ms = r.i64();
  item.validity.end_ms = r.i64();
  item.layer = r.u8();
  item.size_bytes = r.u64();
  item.kind = r.u8() ? ContentKind::knowledge : ContentKind::information;
  item.provenance.model_id = r.str();
  std::uint16_t n = r.u16();
  for (std::uint16_t i = 0; i < n; ++i) item.provenance.input_item_ids.push_back(r.str());
  return item;
}

}  // namespace

std::vector<std::uint8_t> encode(const VkqlMessage& msg, const WireConfig& cfg) {
  Writer w;
  w.u32(msg.msg_id);
  w.u8(static_cast<std::uint8_t>(msg.kind));
  w.str(msg.src);
  w.u8(msg.dst.is_region ? 1 : 0);
  w.str(msg.dst.id);
  w.pad_to(cfg.header_bytes, "header");

  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DescribeRequest>) {
          w.str(body.query);
          w.str(body.reply_to);
        } else if constexpr (std::is_same_v<T, DescribeResponse>) {
          w.u32(body.req_id);
          if (body.vkmd_texts.size() > 0xFFFF) throw EncodeError("too many descriptions");
          w.u16(static_cast<std::uint16_t>(body.vkmd_texts.size()));
          for (const auto& text : body.vkmd_texts) {
            if (text.size() > 0xFFFFFFFF) throw EncodeError("description too long");
            w.u32(static_cast<std::uint32_t>(text.size()));
            w.buf.insert(w.buf.end(), text.begin(), text.end());
          }
        } else if constexpr (std::is_same_v<T, BytecodeRequest>) {
          w.str(body.model_id);
          w.str(body.reply_to);
        } else if constexpr (std::is_same_v<T, BytecodeResponse>) {
          w.u32(body.req_id);
          w.str(body.params.model_id);
          w.u64(body.params.bytecode_size_bytes);
          w.i64(body.params.compute_ms);
          w.u64(body.params.sample_size_bytes);
        } else if constexpr (std::is_same_v<T, CreateRequest>) {
          w.str(body.model_id);
          w.str(body.target_region.id);
          w.i64(body.at_ms);
          w.str(body.reply_to);
          w.u32(body.origin_req_id);
          if (body.visited.size() > 0xFF) throw EncodeError("visited set too large");
          w.u8(static_cast<std::uint8_t>(body.visited.size()));
          for (const auto& v : body.visited) w.str(v);
        } else if constexpr (std::is_same_v<T, CreateResponse>) {
          w.u32(body.req_id);
          write_item(w, body.sample);
        } else if constexpr (std::is_same_v<T, InfoRequest>) {
          w.str(body.name.str());
          w.str(body.target_region.id);
          w.str(body.reply_to);
        } else if constexpr (std::is_same_v<T, InfoResponse>) {
          w.u32(body.req_id);
          write_item(w, body.item);
        } else if constexpr (std::is_same_v<T, ErrorBody>) {
          w.u32(body.req_id);
          w.u8(static_cast<std::uint8_t>(body.code));
          w.str(body.detail);
        }
      },
      msg.body);

  switch (msg.kind) {
    case MsgKind::describe_req:
    case MsgKind::bytecode_req:
    case MsgKind::create_req:
    case MsgKind::info_req:
    case MsgKind::error:
      w.pad_to(cfg.header_bytes + cfg.request_bytes, "body");
      break;
    default:
      break;
  }
  return std::move(w.buf);
}

VkqlMessage decode(std::span<const std::uint8_t> bytes, const WireConfig& cfg) {
  Reader r{bytes};
  VkqlMessage msg;
  msg.msg_id = r.u32();
  std::uint8_t kind_byte = r.u8();
  if (kind_byte > static_cast<std::uint8_t>(MsgKind::error))
    throw DecodeError(4, "unknown message kind " + std::to_string(kind_byte));
  msg.kind = static_cast<MsgKind>(kind_byte);
  msg.src = r.str();
  msg.dst.is_region = r.u8() == 1;
  msg.dst.id = r.str();
  r.skip_to(cfg.header_bytes, "header");

  try {
    switch (msg.kind) {
      case MsgKind::describe_req: {
        DescribeRequest b;
        b.query = r.str();
        b.reply_to = r.str();
        msg.body = std::move(b);
        break;
      }
      case MsgKind::describe_resp: {
        DescribeResponse b;
        b.req_id = r.u32();
        std::uint16_t n = r.u16();
        for (std::uint16_t i = 0; i < n; ++i) {
          std::uint32_t len = r.u32();
          r.need(len);
          b.vkmd_texts.emplace_back(reinterpret_cast<const char*>(r.buf.data() + r.pos), len);
          r.pos += len;
        }
        msg.body = std::move(b);
        break;
      }
      case MsgKind::bytecode_req: {
        BytecodeRequest b;
        b.model_id = r.str();
        b.reply_to = r.str();
        msg.body = std::move(b);
        break;
      }
      case MsgKind::bytecode_resp: {
        BytecodeResponse b;
        b.req_id = r.u32();
        b.params.model_id = r.str();
        b.params.bytecode_size_bytes = r.u64();
        b.params.compute_ms = r.i64();
        b.params.sample_size_bytes = r.u64();
        msg.body = std::move(b);
        break;
      }
      case MsgKind::create_req: {
        CreateRequest b;
        b.model_id = r.str();
        b.target_region.id = r.str();
        b.at_ms = r.i64();
        b.reply_to = r.str();
        b.origin_req_id = r.u32();
        std::uint8_t n = r.u8();
        for (std::uint8_t i = 0; i < n; ++i) b.visited.push_back(r.str());
        msg.body = std::move(b);
        break;
      }
      case MsgKind::create_resp: {
        CreateResponse b;
        b.req_id = r.u32();
        b.sample = read_item(r);
        msg.body = std::move(b);
        break;
      }
      case MsgKind::info_req: {
        InfoRequest b;
        b.name = parse_semantic_name(r.str());
        b.target_region.id = r.str();
        b.reply_to = r.str();
        msg.body = std::move(b);
        break;
      }
      case MsgKind::info_resp: {
        InfoResponse b;
        b.req_id = r.u32();
        b.item = read_item(r);
        msg.body = std::move(b);
        break;
      }
      case MsgKind::error: {
        ErrorBody b;
        b.req_id = r.u32();
        std::uint8_t code = r.u8();
        if (code > static_cast<std::uint8_t>(ErrorCode::bad_request))
          throw DecodeError(r.pos - 1, "unknown error code " + std::to_string(code));
        b.code = static_cast<ErrorCode>(code);
        b.detail = r.str();
        msg.body = std::move(b);
        break;
      }
    }
  } catch (const MalformedName& e) {
    throw DecodeError(r.pos, e.what());
  }

  switch (msg.kind) {
    case MsgKind::describe_req:
    case MsgKind::bytecode_req:
    case MsgKind::create_req:
    case MsgKind::info_req:
    case MsgKind::error:
      r.skip_to(cfg.header_bytes + cfg.request_bytes, "body");
      break;
    default:
      break;
  }
  msg.size_bytes = message_size(msg.kind, msg.body, cfg);
  return msg;
}

// ---- node state machine ----

namespace {

Emission reply(NodeRole& node, MsgIdSource& ids, const WireConfig& cfg, const std::string& to,
               Body body, std::int64_t delay = 0) {
  return {make_message(ids.alloc(), node.node_id, Address::node(to), std::move(body), cfg), delay};
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<Emission> handle_create(NodeRole& node, const VkqlMessage& msg, std::int64_t now_ms,
                                    const DirectoryView& directory, MsgIdSource& ids,
                                    const WireConfig& cfg) {
  const auto& req = std::get<CreateRequest>(msg.body);
  const std::uint32_t req_id = req.origin_req_id ? req.origin_req_id : msg.msg_id;
  const ModelDescription* desc = node.kb.lookup_description(req.model_id);

  if (desc && node.kb.has_bytecode(req.model_id)) {
    GatherResult gathered = gather_inputs(node.ldm, *desc, req.target_region, now_ms);
    if (!gathered.ok()) {
      return {reply(node, ids, cfg, req.reply_to,
                    ErrorBody{req_id, ErrorCode::inputs_unavailable,
                              join(gathered.missing, ",")})};
    }
    auto params_it = node.models.find(req.model_id);
    if (params_it == node.models.end())
      throw VknError("node " + node.node_id + " holds bytecode for '" + req.model_id +
                     "' but has no model params");
    const ModelBytecode* bytecode = node.kb.bytecode(req.model_id);
    try {
      ContentItem sample = execute(node.ldm.registry(), *desc, *bytecode, gathered.inputs, now_ms,
                                   params_it->second.sample_size_bytes);
      node.ldm.insert(sample);
      return {reply(node, ids, cfg, req.reply_to, CreateResponse{req_id, std::move(sample)},
                    bytecode->compute_ms)};
    } catch (const VknError& e) {
      return {reply(node, ids, cfg, req.reply_to,
                    ErrorBody{req_id, ErrorCode::bad_request, e.what()})};
    }
  }

  // No local bytecode: hand the request to a same-region holder.
  std::vector<std::string> visited = req.visited;
  visited.push_back(node.node_id);
  for (const auto& candidate : directory.nodes_in_region(req.target_region)) {
    if (candidate == node.node_id) continue;
    if (std::find(visited.begin(), visited.end(), candidate) != visited.end()) continue;
    if (!directory.node_has_bytecode(candidate, req.model_id)) continue;
    CreateRequest fwd = req;
    fwd.origin_req_id = req_id;
    fwd.visited = std::move(visited);
    return {{make_message(ids.alloc(), node.node_id, Address::node(candidate), std::move(fwd), cfg),
             0}};
  }
  return {reply(node, ids, cfg, req.reply_to,
                ErrorBody{req_id, ErrorCode::knowledge_unavailable, req.model_id})};
}

}  // namespace

std::vector<Emission> handle_message(NodeRole& node, const VkqlMessage& msg, std::int64_t now_ms,
                                     const DirectoryView& directory, MsgIdSource& ids,
                                     const WireConfig& cfg) {
  node.ldm.set_clock(now_ms);
  switch (msg.kind) {
    case MsgKind::describe_req: {
      const auto& req = std::get<DescribeRequest>(msg.body);
      DescribeResponse resp;
      resp.req_id = msg.msg_id;
      for (const auto& desc : node.kb.find_descriptions(req.query))
        resp.vkmd_texts.push_back(serialize_vkmd(desc));
      const std::string& to = req.reply_to.empty() ? msg.src : req.reply_to;
      return {reply(node, ids, cfg, to, std::move(resp))};
    }
    case MsgKind::bytecode_req: {
      const auto& req = std::get<BytecodeRequest>(msg.body);
      const std::string& to = req.reply_to.empty() ? msg.src : req.reply_to;
      if (!node.kb.has_bytecode(req.model_id))
        return {reply(node, ids, cfg, to,
                      ErrorBody{msg.msg_id, ErrorCode::not_found, req.model_id})};
      auto params_it = node.models.find(req.model_id);
      if (params_it == node.models.end())
        throw VknError("node " + node.node_id + " holds bytecode for '" + req.model_id +
                       "' but has no model params");
      return {reply(node, ids, cfg, to, BytecodeResponse{msg.msg_id, params_it->second})};
    }
    case MsgKind::create_req:
      return handle_create(node, msg, now_ms, directory, ids, cfg);
    case MsgKind::info_req: {
      const auto& req = std::get<InfoRequest>(msg.body);
      const std::string& to = req.reply_to.empty() ? msg.src : req.reply_to;
      auto item = node.ldm.query(req.name, req.target_region, now_ms);
      if (!item)
        return {reply(node, ids, cfg, to,
                      ErrorBody{msg.msg_id, ErrorCode::not_found,
                                req.name.str() + "@" + req.target_region.id})};
      return {reply(node, ids, cfg, to, InfoResponse{msg.msg_id, std::move(*item)})};
    }
    default:
      return {};  // responses terminate at their consumer, nothing to emit
  }
}

std::string trace_line(std::int64_t t_ms, const std::string& from, const std::string& to,
                       MsgKind kind, std::uint64_t size_bytes) {
  std::ostringstream out;
  out << "t=" << t_ms << ' ' << from << "→" << to << ' ' << to_string(kind) << ' '
      << size_bytes << 'B';
  return out.str();
}

}  // namespace vkn
