#include "vkn/engine.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>

namespace vkn {

const char* const kComfortModelId = "model.env_comfort";

namespace {

const std::string kGood = "GOOD";
const std::string kFair = "FAIR";
const std::string kPoor = "POOR";

void require_symbol(const std::string& value, std::initializer_list<const char*> domain,
                    const char* what) {
  for (const char* s : domain) {
    if (value == s) return;
  }
  throw VknError(std::string(what) + " value '" + value + "' outside its domain");
}

// Resolves a model input by semantic type name, independent of param naming.
const ContentItem& input_by_type(const std::map<std::string, ContentItem>& inputs,
                                 const char* type_name) {
  for (const auto& [param, item] : inputs) {
    if (item.name.str() == type_name) return item;
  }
  throw VknError(std::string("no input of type ") + type_name);
}

Value comfort_handler(const std::map<std::string, ContentItem>& inputs) {
  const auto& tw = input_by_type(inputs, "TwoWheelers.Concentration");
  const auto& v = input_by_type(inputs, "Road.Visibility");
  const auto& tr = input_by_type(inputs, "Road.Traffic");
  return comfort_eval(std::get<std::string>(tw.value), std::get<std::string>(v.value),
                      std::get<std::string>(tr.value));
}

const std::map<std::string, EvalFn>& builtin_handlers() {
  static const std::map<std::string, EvalFn> handlers = {
      {kComfortModelId, comfort_handler},
  };
  return handlers;
}

}  // namespace

std::string comfort_eval(const std::string& two_wheelers, const std::string& visibility,
                         const std::string& traffic) {
  require_symbol(two_wheelers, {"HIGH", "MEDIUM", "LOW"}, "TwoWheelers.Concentration");
  require_symbol(visibility, {"CLEAR", "OBSTRUCTED"}, "Road.Visibility");
  require_symbol(traffic, {"FLUID", "CONGESTED"}, "Road.Traffic");
  if (two_wheelers == "LOW" && visibility == "CLEAR" && traffic == "FLUID") return kGood;
  if (two_wheelers == "HIGH") return kPoor;
  return kFair;
}

ModelDescription comfort_model_description() {
  ModelDescription desc;
  desc.model_id = kComfortModelId;
  desc.inputs = {{"traffic", parse_semantic_name("Road.Traffic")},
                 {"visibility", parse_semantic_name("Road.Visibility")},
                 {"twoWheelers", parse_semantic_name("TwoWheelers.Concentration")}};
  desc.outputs = {{"comfort", parse_semantic_name("Road.ComfortLevel")}};
  return desc;
}

ModelDescription builtin_description(const std::string& model_id) {
  if (model_id == kComfortModelId) return comfort_model_description();
  throw UnknownModel(model_id);
}

EvalFn builtin_handler(const std::string& model_id) {
  auto it = builtin_handlers().find(model_id);
  if (it == builtin_handlers().end()) throw UnknownModel(model_id);
  return it->second;
}

bool has_builtin_handler(const std::string& model_id) {
  return builtin_handlers().count(model_id) != 0;
}

ModelBytecode make_bytecode(const ModelParams& params) {
  return {params.model_id, params.bytecode_size_bytes, params.compute_ms,
          builtin_handler(params.model_id)};
}

std::vector<ModelParams> parse_model_manifest(const std::string& text) {
  std::vector<ModelParams> out;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream fields(raw);
    std::string id;
    if (!(fields >> id)) continue;
    ModelParams p;
    p.model_id = id;
    std::int64_t bytecode_size = 0, compute = 0, sample_size = 0;
    if (!(fields >> bytecode_size >> compute >> sample_size))
      throw VknError("model manifest line " + std::to_string(lineno) +
                     ": expected '<id> <bytecode_bytes> <compute_ms> <sample_bytes>'");
    std::string extra;
    if (fields >> extra)
      throw VknError("model manifest line " + std::to_string(lineno) + ": trailing tokens");
    if (bytecode_size < 1 || sample_size < 1 || compute < 0)
      throw VknError("model manifest line " + std::to_string(lineno) + ": sizes must be positive");
    if (!has_builtin_handler(id)) throw UnknownModel(id);
    p.bytecode_size_bytes = static_cast<std::uint64_t>(bytecode_size);
    p.compute_ms = compute;
    p.sample_size_bytes = static_cast<std::uint64_t>(sample_size);
    out.push_back(std::move(p));
  }
  return out;
}

std::string next_sample_id() {
  static std::atomic<std::uint64_t> counter{0};
  return "k" + std::to_string(++counter);
}

ContentItem execute(const SemanticRegistry& registry, const ModelDescription& desc,
                    const ModelBytecode& bytecode,
                    const std::map<std::string, ContentItem>& inputs, std::int64_t at_ms,
                    std::uint64_t sample_size_bytes) {
  for (const auto& binding : desc.inputs) {
    if (!inputs.count(binding.param_id))
      throw VknError("execute: no input bound to param '" + binding.param_id + "'");
  }
  for (const auto& p : desc.preconditions) {
    const ContentItem& item = inputs.at(p.param_id);
    if (at_ms - item.validity.start_ms > p.threshold_ms) throw PreconditionViolated(p.param_id);
  }

  const RegionId& region = inputs.at(desc.inputs.front().param_id).region;
  std::optional<TimeInterval> validity;
  Provenance provenance;
  provenance.model_id = desc.model_id;
  for (const auto& binding : desc.inputs) {
    const ContentItem& item = inputs.at(binding.param_id);
    if (item.region != region) throw RegionMismatch();
    validity = validity ? intersect(*validity, item.validity)
                        : std::optional<TimeInterval>(item.validity);
    if (!validity) throw EmptyValidityIntersection();
    provenance.input_item_ids.push_back(item.item_id);
  }

  Value value = bytecode.eval(inputs);
  return make_knowledge(registry, next_sample_id(), desc.outputs.front().type_name,
                        std::move(value), region, *validity, 3, sample_size_bytes,
                        std::move(provenance));
}

namespace {

struct PlannerModel {
  std::string id;
  std::set<SemanticName> inputs;
  std::set<SemanticName> outputs;
};

bool covered(const std::set<SemanticName>& names, const std::set<SemanticName>& cover) {
  return std::includes(cover.begin(), cover.end(), names.begin(), names.end());
}

}  // namespace

CompositionPlan plan_composition(const KnowledgeBase& kb, const SemanticName& goal,
                                 const std::set<SemanticName>& available, int max_depth) {
  if (max_depth < 1) throw VknError("plan_composition: max_depth must be >= 1");
  if (available.count(goal)) return {};

  std::vector<PlannerModel> models;
  for (const auto& [id, desc] : kb.descriptions()) {
    PlannerModel m;
    m.id = id;
    for (const auto& b : desc.inputs) m.inputs.insert(b.type_name);
    for (const auto& b : desc.outputs) m.outputs.insert(b.type_name);
    models.push_back(std::move(m));
  }

  // Breadth-first over sets of used models; covered names follow from the set.
  using UsedSet = std::set<std::size_t>;
  auto cover_of = [&](const UsedSet& used) {
    std::set<SemanticName> cover = available;
    for (std::size_t idx : used) cover.insert(models[idx].outputs.begin(), models[idx].outputs.end());
    return cover;
  };

  std::set<UsedSet> frontier = {UsedSet{}};
  std::set<UsedSet> seen = frontier;
  for (int depth = 1; depth <= max_depth && !frontier.empty(); ++depth) {
    std::set<UsedSet> next;
    std::vector<UsedSet> hits;
    for (const UsedSet& used : frontier) {
      std::set<SemanticName> cover = cover_of(used);
      for (std::size_t idx = 0; idx < models.size(); ++idx) {
        if (used.count(idx) || !covered(models[idx].inputs, cover)) continue;
        UsedSet extended = used;
        extended.insert(idx);
        if (!seen.insert(extended).second) continue;
        next.insert(extended);
        if (cover_of(extended).count(goal)) hits.push_back(extended);
      }
    }
    if (!hits.empty()) {
      // Tie-break: lexicographically smallest sorted model-id sequence.
      // Model indices are sorted by id already, so compare id sequences.
      const UsedSet* best = nullptr;
      std::vector<std::string> best_ids;
      for (const UsedSet& hit : hits) {
        std::vector<std::string> ids;
        for (std::size_t idx : hit) ids.push_back(models[idx].id);
        if (!best || ids < best_ids) {
          best = &hit;
          best_ids = std::move(ids);
        }
      }

      // Deterministic topological order: repeatedly place the smallest-id
      // applicable step. An input is a leaf only while no earlier step
      // produces it.
      CompositionPlan plan;
      std::set<SemanticName> cover = available;
      std::set<SemanticName> produced;
      std::set<std::size_t> remaining(best->begin(), best->end());
      while (!remaining.empty()) {
        bool placed = false;
        for (auto it = remaining.begin(); it != remaining.end(); ++it) {
          const PlannerModel& m = models[*it];
          if (!covered(m.inputs, cover)) continue;
          for (const auto& name : m.inputs) {
            if (!produced.count(name)) plan.leaf_inputs.insert(name);
          }
          plan.steps.push_back(m.id);
          cover.insert(m.outputs.begin(), m.outputs.end());
          produced.insert(m.outputs.begin(), m.outputs.end());
          remaining.erase(it);
          placed = true;
          break;
        }
        if (!placed) throw VknError("internal: plan set not orderable");
      }
      return plan;
    }
    frontier = std::move(next);
  }
  throw NoPlan(goal.str());
}

PlanExecution execute_plan(const KnowledgeBase& kb, LdmStore& store, const CompositionPlan& plan,
                           const RegionId& region, std::int64_t at_ms,
                           std::uint64_t sample_size_bytes) {
  PlanExecution result;
  std::optional<ContentItem> last;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const std::string& model_id = plan.steps[i];
    const ModelDescription* desc = kb.lookup_description(model_id);
    if (!desc) throw PlanStepError(i, model_id, "no description registered");
    const ModelBytecode* bytecode = kb.bytecode(model_id);
    if (!bytecode) throw PlanStepError(i, model_id, "bytecode not installed");
    GatherResult gathered = gather_inputs(store, *desc, region, at_ms);
    if (!gathered.ok()) {
      std::string missing;
      for (const auto& p : gathered.missing) missing += (missing.empty() ? "" : ", ") + p;
      throw PlanStepError(i, model_id, "missing inputs: " + missing);
    }
    try {
      ContentItem sample =
          execute(store.registry(), *desc, *bytecode, gathered.inputs, at_ms, sample_size_bytes);
      result.total_compute_ms += bytecode->compute_ms;
      result.produced_item_ids.push_back(sample.item_id);
      store.insert(sample);
      last = std::move(sample);
    } catch (const PlanStepError&) {
      throw;
    } catch (const VknError& e) {
      throw PlanStepError(i, model_id, e.what());
    }
  }
  if (!last) throw VknError("execute_plan: empty plan has nothing to execute");
  result.sample = std::move(*last);
  return result;
}

}  // namespace vkn
