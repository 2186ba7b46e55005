#include "vkn/ldm.hpp"

#include <algorithm>
#include <sstream>

namespace vkn {

std::string LdmStore::insert(ContentItem item) {
  check_item(registry_, item);
  if (ids_.count(item.item_id)) throw DuplicateId(item.item_id);
  std::string id = item.item_id;
  ids_.insert(id);
  index_[{item.name, item.region}].push_back(items_.size());
  items_.push_back({std::move(item), next_seq_++});
  return id;
}

std::optional<ContentItem> LdmStore::query(const SemanticName& name, const RegionId& region,
                                           std::int64_t at_ms) const {
  auto it = index_.find({name, region});
  if (it == index_.end()) return std::nullopt;
  const Stored* best = nullptr;
  for (std::size_t idx : it->second) {
    const Stored& candidate = items_[idx];
    if (!candidate.item.validity.contains(at_ms)) continue;
    if (!best || candidate.item.validity.start_ms > best->item.validity.start_ms ||
        (candidate.item.validity.start_ms == best->item.validity.start_ms &&
         candidate.seq > best->seq)) {
      best = &candidate;
    }
  }
  if (!best) return std::nullopt;
  return best->item;
}

std::string LdmStore::dump() const {
  std::vector<const Stored*> sorted;
  sorted.reserve(items_.size());
  for (const auto& s : items_) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(), [](const Stored* a, const Stored* b) {
    return std::tie(a->item.name, a->item.region, a->item.validity.start_ms, a->item.item_id) <
           std::tie(b->item.name, b->item.region, b->item.validity.start_ms, b->item.item_id);
  });
  std::ostringstream out;
  for (const Stored* s : sorted) {
    const ContentItem& it = s->item;
    out << it.name.str() << ' ' << it.region.id << " [" << it.validity.start_ms << ','
        << it.validity.end_ms << "] layer=" << it.layer << ' '
        << (it.kind == ContentKind::knowledge ? "knowledge" : "information") << ' '
        << value_to_string(it.value) << ' ' << it.size_bytes << "B id=" << it.item_id;
    if (it.kind == ContentKind::knowledge) out << " from=" << it.provenance.model_id;
    out << '\n';
  }
  return out.str();
}

GatherResult gather_inputs(const LdmStore& store, const ModelDescription& desc,
                           const RegionId& region, std::int64_t at_ms) {
  GatherResult result;
  std::map<std::string, std::int64_t> max_age;
  for (const auto& p : desc.preconditions) {
    auto it = max_age.find(p.param_id);
    if (it == max_age.end() || p.threshold_ms < it->second) max_age[p.param_id] = p.threshold_ms;
  }
  for (const auto& binding : desc.inputs) {
    auto item = store.query(binding.type_name, region, at_ms);
    bool satisfied = item.has_value();
    if (satisfied) {
      auto age_it = max_age.find(binding.param_id);
      if (age_it != max_age.end() && at_ms - item->validity.start_ms > age_it->second)
        satisfied = false;
    }
    if (satisfied) {
      result.inputs.emplace(binding.param_id, std::move(*item));
    } else {
      result.missing.push_back(binding.param_id);
    }
  }
  return result;
}

void KnowledgeBase::register_description(const ModelDescription& desc) {
  auto it = descriptions_.find(desc.model_id);
  if (it != descriptions_.end()) {
    if (it->second == desc) return;  // idempotent re-registration
    throw ConflictingDescription(desc.model_id);
  }
  descriptions_.emplace(desc.model_id, desc);
}

const ModelDescription* KnowledgeBase::lookup_description(const std::string& model_id) const {
  auto it = descriptions_.find(model_id);
  return it == descriptions_.end() ? nullptr : &it->second;
}

std::vector<ModelDescription> KnowledgeBase::find_descriptions(const std::string& query) const {
  std::vector<ModelDescription> out;
  for (const auto& [id, desc] : descriptions_) {
    bool matches = id == query;
    for (const auto& b : desc.outputs) {
      if (matches) break;
      matches = b.type_name.str() == query;
    }
    if (matches) out.push_back(desc);
  }
  return out;  // map iteration order is already sorted by model id
}

void KnowledgeBase::install_bytecode(ModelBytecode bytecode) {
  if (!descriptions_.count(bytecode.model_id)) throw UnknownModel(bytecode.model_id);
  bytecodes_[bytecode.model_id] = std::move(bytecode);
}

bool KnowledgeBase::has_bytecode(const std::string& model_id) const {
  return bytecodes_.count(model_id) != 0;
}

const ModelBytecode* KnowledgeBase::bytecode(const std::string& model_id) const {
  auto it = bytecodes_.find(model_id);
  return it == bytecodes_.end() ? nullptr : &it->second;
}

}  // namespace vkn
