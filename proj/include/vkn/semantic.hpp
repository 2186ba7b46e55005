#pragma once
// Semantic naming, value domains and the unified content item.
//
// A SemanticName is a VSS-style dot path (Road.Traffic). A registry binds
// names to finite value domains; every content item carries a name, a value
// from that domain, a region, a validity interval and a byte size. Items are
// immutable values and safe to share.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vkn/errors.hpp"

namespace vkn {

// Symbol literal (string) or numeric reading.
using Value = std::variant<std::string, double>;

std::string value_to_string(const Value& v);

struct SemanticName {
  std::vector<std::string> segments;

  // Canonical dot-joined rendering.
  std::string str() const;

  bool operator==(const SemanticName&) const = default;
  auto operator<=>(const SemanticName&) const = default;
};

// Parses a dot-path. Each segment must match [A-Za-z][A-Za-z0-9_]*.
// Throws MalformedName on empty input, empty segments or illegal characters.
SemanticName parse_semantic_name(const std::string& text);

bool is_identifier(const std::string& s);

enum class DomainKind { symbolic, numeric };

struct ValueDomain {
  DomainKind kind = DomainKind::symbolic;
  std::vector<std::string> symbols;  // symbolic: ordered, >= 2 distinct uppercase literals
  std::string unit;                  // numeric only

  bool contains(const Value& v) const;
  bool operator==(const ValueDomain&) const = default;
};

// Checked constructors.
ValueDomain symbolic_domain(std::vector<std::string> symbols);
ValueDomain numeric_domain(std::string unit);

class SemanticRegistry {
 public:
  // Throws DuplicateName when the name is already bound.
  void register_name(const SemanticName& name, ValueDomain domain);

  // Throws UnknownName.
  const ValueDomain& lookup(const SemanticName& name) const;

  bool has(const SemanticName& name) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<SemanticName, ValueDomain>& entries() const { return entries_; }

 private:
  std::map<SemanticName, ValueDomain> entries_;
};

// True iff value lies in the registered domain of name. Unregistered names
// throw UnknownName (distinct from false).
bool validate_value(const SemanticRegistry& registry, const SemanticName& name, const Value& value);

// The four built-in road names with their symbol domains, nothing else.
SemanticRegistry default_registry();

// Registry file format: one entry per line,
//   NAME = SYM1|SYM2|...   (symbolic)
//   NAME : unit            (numeric)
// '#' starts a comment; duplicate NAME is a load error.
SemanticRegistry parse_registry(const std::string& text);
SemanticRegistry load_registry_file(const std::string& path);

struct RegionId {
  std::string id;

  bool operator==(const RegionId&) const = default;
  auto operator<=>(const RegionId&) const = default;
};

struct TimeInterval {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;

  bool contains(std::int64_t t_ms) const { return start_ms <= t_ms && t_ms <= end_ms; }
  bool operator==(const TimeInterval&) const = default;
};

// Intersection of two intervals, or nullopt when disjoint. A single shared
// instant ([0,10] vs [10,20]) is a non-empty intersection.
std::optional<TimeInterval> intersect(const TimeInterval& a, const TimeInterval& b);

enum class ContentKind { information, knowledge };

struct Provenance {
  std::string model_id;
  std::vector<std::string> input_item_ids;

  bool empty() const { return model_id.empty() && input_item_ids.empty(); }
  bool operator==(const Provenance&) const = default;
};

struct ContentItem {
  std::string item_id;
  SemanticName name;
  Value value;
  RegionId region;
  TimeInterval validity;
  int layer = 3;  // LDM layer, 1..4
  std::uint64_t size_bytes = 1;
  ContentKind kind = ContentKind::information;
  Provenance provenance;  // empty for information, (model, inputs) for knowledge

  bool operator==(const ContentItem&) const = default;
};

// Checked constructors: reject values outside the registered domain, layers
// outside 1..4, zero sizes and inverted validity intervals. Knowledge items
// must carry provenance, information items must not.
ContentItem make_information(const SemanticRegistry& registry, std::string item_id,
                             SemanticName name, Value value, RegionId region,
                             TimeInterval validity, int layer, std::uint64_t size_bytes);

ContentItem make_knowledge(const SemanticRegistry& registry, std::string item_id,
                           SemanticName name, Value value, RegionId region,
                           TimeInterval validity, int layer, std::uint64_t size_bytes,
                           Provenance provenance);

// Shared validation used by the constructors and by LdmStore on insert.
void check_item(const SemanticRegistry& registry, const ContentItem& item);

}  // namespace vkn
