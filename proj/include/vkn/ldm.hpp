#pragma once
// The on-board stores: the Local Dynamic Map (layered content items,
// queryable by name/region/time) and the Knowledge Base (model descriptions
// plus locally installed bytecodes). Descriptions may exist without bytecode;
// never the reverse.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vkn/bytecode.hpp"
#include "vkn/semantic.hpp"
#include "vkn/vkmd.hpp"

namespace vkn {

class LdmStore {
 public:
  explicit LdmStore(SemanticRegistry registry = default_registry())
      : registry_(std::move(registry)) {}

  // Validates the item against the registry, rejects duplicate ids, returns
  // the item id. Existing items with the same (name, region) are retained.
  std::string insert(ContentItem item);

  // The matching item whose validity contains at_ms; among several matches
  // the greatest validity.start_ms wins, then the latest inserted.
  std::optional<ContentItem> query(const SemanticName& name, const RegionId& region,
                                   std::int64_t at_ms) const;

  // Deterministic snapshot, one item per line, sorted by
  // (name, region, start_ms, item_id).
  std::string dump() const;

  std::size_t size() const { return items_.size(); }
  bool has_item(const std::string& item_id) const { return ids_.count(item_id) != 0; }
  const SemanticRegistry& registry() const { return registry_; }

  std::int64_t clock_ms() const { return clock_ms_; }
  void set_clock(std::int64_t t_ms) { clock_ms_ = t_ms; }

 private:
  struct Stored {
    ContentItem item;
    std::uint64_t seq;  // insertion order
  };

  SemanticRegistry registry_;
  std::vector<Stored> items_;
  std::map<std::pair<SemanticName, RegionId>, std::vector<std::size_t>> index_;
  std::set<std::string> ids_;
  std::uint64_t next_seq_ = 0;
  std::int64_t clock_ms_ = 0;
};

// One item per declared input of desc, resolved via query at at_ms. An input
// is reported missing when absent or when a max_age precondition fails
// (at_ms - item.validity.start_ms must be <= threshold_ms).
struct GatherResult {
  std::map<std::string, ContentItem> inputs;  // param_id -> item
  std::vector<std::string> missing;           // every unsatisfied param, declaration order

  bool ok() const { return missing.empty(); }
};

GatherResult gather_inputs(const LdmStore& store, const ModelDescription& desc,
                           const RegionId& region, std::int64_t at_ms);

class KnowledgeBase {
 public:
  // Idempotent for identical content; ConflictingDescription otherwise.
  void register_description(const ModelDescription& desc);

  const ModelDescription* lookup_description(const std::string& model_id) const;

  // All descriptions whose model id equals query or whose outputs include the
  // semantic name query, sorted by model id.
  std::vector<ModelDescription> find_descriptions(const std::string& query) const;

  // Requires a registered description (UnknownModel otherwise).
  void install_bytecode(ModelBytecode bytecode);

  bool has_bytecode(const std::string& model_id) const;
  const ModelBytecode* bytecode(const std::string& model_id) const;

  const std::map<std::string, ModelDescription>& descriptions() const { return descriptions_; }

 private:
  std::map<std::string, ModelDescription> descriptions_;
  std::map<std::string, ModelBytecode> bytecodes_;
};

}  // namespace vkn
