#include "vkn/semantic.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace vkn {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string value_to_string(const Value& v) {
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  std::ostringstream os;
  os << std::get<double>(v);
  return os.str();
}

bool is_identifier(const std::string& s) {
  if (s.empty() || !ident_start(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), ident_char);
}

std::string SemanticName::str() const {
  std::string out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i) out += '.';
    out += segments[i];
  }
  return out;
}

SemanticName parse_semantic_name(const std::string& text) {
  if (text.empty()) throw MalformedName(text, "empty string");
  SemanticName name;
  std::string segment;
  for (char c : text) {
    if (c == '.') {
      if (segment.empty()) throw MalformedName(text, "empty segment");
      name.segments.push_back(segment);
      segment.clear();
    } else {
      segment += c;
    }
  }
  if (segment.empty()) throw MalformedName(text, "empty segment");
  name.segments.push_back(segment);
  for (const auto& s : name.segments) {
    if (!is_identifier(s)) throw MalformedName(text, "illegal character in segment '" + s + "'");
  }
  return name;
}

bool ValueDomain::contains(const Value& v) const {
  if (kind == DomainKind::symbolic) {
    if (!std::holds_alternative<std::string>(v)) return false;
    const auto& sym = std::get<std::string>(v);
    return std::find(symbols.begin(), symbols.end(), sym) != symbols.end();
  }
  return std::holds_alternative<double>(v);
}

ValueDomain symbolic_domain(std::vector<std::string> symbols) {
  std::set<std::string> distinct(symbols.begin(), symbols.end());
  if (distinct.size() < 2) throw VknError("symbolic domain needs at least 2 distinct symbols");
  if (distinct.size() != symbols.size()) throw VknError("symbolic domain has repeated symbols");
  for (const auto& s : symbols) {
    if (s.empty() || !std::isupper(static_cast<unsigned char>(s[0])))
      throw VknError("symbol '" + s + "' must be an uppercase literal");
    for (char c : s) {
      if (!(std::isupper(static_cast<unsigned char>(c)) ||
            std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
        throw VknError("symbol '" + s + "' must be an uppercase literal");
    }
  }
  ValueDomain d;
  d.kind = DomainKind::symbolic;
  d.symbols = std::move(symbols);
  return d;
}

ValueDomain numeric_domain(std::string unit) {
  ValueDomain d;
  d.kind = DomainKind::numeric;
  d.unit = std::move(unit);
  return d;
}

void SemanticRegistry::register_name(const SemanticName& name, ValueDomain domain) {
  if (entries_.count(name)) throw DuplicateName(name.str());
  entries_.emplace(name, std::move(domain));
}

const ValueDomain& SemanticRegistry::lookup(const SemanticName& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw UnknownName(name.str());
  return it->second;
}

bool SemanticRegistry::has(const SemanticName& name) const { return entries_.count(name) != 0; }

bool validate_value(const SemanticRegistry& registry, const SemanticName& name,
                    const Value& value) {
  return registry.lookup(name).contains(value);
}

SemanticRegistry default_registry() {
  SemanticRegistry r;
  r.register_name(parse_semantic_name("Road.Traffic"), symbolic_domain({"FLUID", "CONGESTED"}));
  r.register_name(parse_semantic_name("Road.Visibility"), symbolic_domain({"CLEAR", "OBSTRUCTED"}));
  r.register_name(parse_semantic_name("TwoWheelers.Concentration"),
                  symbolic_domain({"HIGH", "MEDIUM", "LOW"}));
  r.register_name(parse_semantic_name("Road.ComfortLevel"),
                  symbolic_domain({"GOOD", "FAIR", "POOR"}));
  return r;
}

SemanticRegistry parse_registry(const std::string& text) {
  SemanticRegistry r;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string line = trim(raw);
    if (line.empty()) continue;

    auto eq = line.find('=');
    auto colon = line.find(':');
    try {
      if (eq != std::string::npos && (colon == std::string::npos || eq < colon)) {
        SemanticName name = parse_semantic_name(trim(line.substr(0, eq)));
        if (r.has(name)) throw DuplicateName(name.str());
        std::vector<std::string> symbols;
        std::istringstream syms(line.substr(eq + 1));
        std::string sym;
        while (std::getline(syms, sym, '|')) symbols.push_back(trim(sym));
        r.register_name(name, symbolic_domain(std::move(symbols)));
      } else if (colon != std::string::npos) {
        SemanticName name = parse_semantic_name(trim(line.substr(0, colon)));
        if (r.has(name)) throw DuplicateName(name.str());
        r.register_name(name, numeric_domain(trim(line.substr(colon + 1))));
      } else {
        throw VknError("expected 'NAME = SYM|...' or 'NAME : unit'");
      }
    } catch (const RegistryFormatError&) {
      throw;
    } catch (const VknError& e) {
      throw RegistryFormatError(lineno, e.what());
    }
  }
  return r;
}

SemanticRegistry load_registry_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_registry(buf.str());
}

std::optional<TimeInterval> intersect(const TimeInterval& a, const TimeInterval& b) {
  TimeInterval out{std::max(a.start_ms, b.start_ms), std::min(a.end_ms, b.end_ms)};
  if (out.start_ms > out.end_ms) return std::nullopt;
  return out;
}

void check_item(const SemanticRegistry& registry, const ContentItem& item) {
  if (item.item_id.empty()) throw InvalidItem("item_id must be non-empty");
  if (item.region.id.empty()) throw InvalidItem("region must be non-empty");
  if (item.validity.start_ms > item.validity.end_ms)
    throw InvalidItem("validity start after end");
  if (item.layer < 1 || item.layer > 4)
    throw InvalidItem("layer " + std::to_string(item.layer) + " outside 1..4");
  if (item.size_bytes < 1) throw InvalidItem("size_bytes must be >= 1");
  if (!validate_value(registry, item.name, item.value))
    throw InvalidItem("value " + value_to_string(item.value) + " not in domain of " +
                      item.name.str());
  const bool has_provenance = !item.provenance.empty();
  if (item.kind == ContentKind::knowledge) {
    if (!has_provenance) throw InvalidItem("knowledge item without provenance");
    if (item.provenance.model_id.empty()) throw InvalidItem("provenance without model id");
  } else if (has_provenance) {
    throw InvalidItem("information item with provenance");
  }
}

ContentItem make_information(const SemanticRegistry& registry, std::string item_id,
                             SemanticName name, Value value, RegionId region,
                             TimeInterval validity, int layer, std::uint64_t size_bytes) {
  ContentItem item{std::move(item_id), std::move(name),     std::move(value),
                   std::move(region),  validity,            layer,
                   size_bytes,         ContentKind::information, {}};
  check_item(registry, item);
  return item;
}

ContentItem make_knowledge(const SemanticRegistry& registry, std::string item_id,
                           SemanticName name, Value value, RegionId region,
                           TimeInterval validity, int layer, std::uint64_t size_bytes,
                           Provenance provenance) {
  ContentItem item{std::move(item_id), std::move(name),   std::move(value),
                   std::move(region),  validity,          layer,
                   size_bytes,         ContentKind::knowledge, std::move(provenance)};
  check_item(registry, item);
  return item;
}

}  // namespace vkn
