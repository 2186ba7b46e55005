#pragma once
// Model execution and composition. execute() turns a well-formed input set
// into a knowledge sample whose validity is the intersection of the input
// validities; plan_composition() backward-chains from a goal name to a
// fewest-steps plan over the descriptions in a knowledge base.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "vkn/bytecode.hpp"
#include "vkn/ldm.hpp"
#include "vkn/semantic.hpp"
#include "vkn/vkmd.hpp"

namespace vkn {

// Comfort level from two-wheeler concentration, visibility and traffic:
// GOOD only when (LOW, CLEAR, FLUID); POOR whenever concentration is HIGH;
// FAIR otherwise. Total over the 3x2x2 symbol domain.
std::string comfort_eval(const std::string& two_wheelers, const std::string& visibility,
                         const std::string& traffic);

// The built-in comfort model: id, typed params, no preconditions.
extern const char* const kComfortModelId;
ModelDescription comfort_model_description();

// Description of a built-in model by id. Throws UnknownModel.
ModelDescription builtin_description(const std::string& model_id);

// Runs one bytecode over gathered inputs. Inputs must cover every declared
// input, satisfy every max_age precondition at at_ms and share one region.
// The sample carries the first output's type name, provenance
// (model id, input item ids) and size_bytes = sample_size_bytes.
ContentItem execute(const SemanticRegistry& registry, const ModelDescription& desc,
                    const ModelBytecode& bytecode,
                    const std::map<std::string, ContentItem>& inputs, std::int64_t at_ms,
                    std::uint64_t sample_size_bytes);

struct CompositionPlan {
  std::vector<std::string> steps;       // model ids, topologically ordered
  std::set<SemanticName> leaf_inputs;   // names that must come from the LDM

  bool operator==(const CompositionPlan&) const = default;
};

// Fewest steps wins; ties break on the lexicographically smallest sorted
// model-id sequence. A goal already in `available` yields the empty plan.
// max_depth (>= 1) caps the number of steps. Throws NoPlan when unreachable;
// cyclic dependencies are pruned, never reported as cycles.
CompositionPlan plan_composition(const KnowledgeBase& kb, const SemanticName& goal,
                                 const std::set<SemanticName>& available, int max_depth);

struct PlanExecution {
  ContentItem sample;            // the final sample
  std::int64_t total_compute_ms = 0;
  std::vector<std::string> produced_item_ids;  // one per step, in order
};

// Runs the plan in order against the store, inserting every produced sample
// (intermediates included). Each produced sample gets sample_size_bytes.
// Failures propagate as PlanStepError naming the failing step.
PlanExecution execute_plan(const KnowledgeBase& kb, LdmStore& store, const CompositionPlan& plan,
                           const RegionId& region, std::int64_t at_ms,
                           std::uint64_t sample_size_bytes);

// Process-unique ids for generated samples (k1, k2, ...).
std::string next_sample_id();

}  // namespace vkn
