#pragma once
// Error types thrown across the stack. Everything derives from VknError so
// callers (CLI, bindings) can catch one base and still switch on the class.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vkn {

struct VknError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- semantic-core ----

struct MalformedName : VknError {
  explicit MalformedName(const std::string& text, const std::string& why)
      : VknError("malformed semantic name '" + text + "': " + why) {}
};

struct UnknownName : VknError {
  std::string name;
  explicit UnknownName(std::string n)
      : VknError("unknown semantic name '" + n + "'"), name(std::move(n)) {}
};

struct DuplicateName : VknError {
  std::string name;
  explicit DuplicateName(std::string n)
      : VknError("semantic name '" + n + "' registered twice"), name(std::move(n)) {}
};

struct InvalidItem : VknError {
  explicit InvalidItem(const std::string& why) : VknError("invalid content item: " + why) {}
};

struct RegistryFormatError : VknError {
  int line;
  RegistryFormatError(int line_, const std::string& why)
      : VknError("registry line " + std::to_string(line_) + ": " + why), line(line_) {}
};

// ---- vkmd-parser ----

struct VkmdSyntaxError : VknError {
  int line;
  int column;
  std::string detail;
  VkmdSyntaxError(int line_, int column_, std::string detail_)
      : VknError("syntax error at " + std::to_string(line_) + ":" + std::to_string(column_) +
                 ": " + detail_),
        line(line_), column(column_), detail(std::move(detail_)) {}
};

struct DuplicateParam : VknError {
  std::string param_id;
  int line;
  DuplicateParam(std::string param, int line_)
      : VknError("duplicate param '" + param + "' at line " + std::to_string(line_)),
        param_id(std::move(param)), line(line_) {}
};

struct MissingSection : VknError {
  std::string section;
  explicit MissingSection(std::string section_)
      : VknError("missing section: no " + section_ + " declared"), section(std::move(section_)) {}
};

struct DanglingPrecondition : VknError {
  std::string param_id;
  int line;
  DanglingPrecondition(std::string param, int line_)
      : VknError("precondition at line " + std::to_string(line_) + " references undeclared param '" +
                 param + "'"),
        param_id(std::move(param)), line(line_) {}
};

// ---- ldm-store ----

struct DuplicateId : VknError {
  std::string item_id;
  explicit DuplicateId(std::string id)
      : VknError("item id '" + id + "' already stored"), item_id(std::move(id)) {}
};

struct ConflictingDescription : VknError {
  std::string model_id;
  explicit ConflictingDescription(std::string id)
      : VknError("model '" + id + "' already registered with different content"),
        model_id(std::move(id)) {}
};

struct UnknownModel : VknError {
  std::string model_id;
  explicit UnknownModel(std::string id)
      : VknError("unknown model '" + id + "'"), model_id(std::move(id)) {}
};

// ---- knowledge-engine ----

struct PreconditionViolated : VknError {
  std::string param_id;
  explicit PreconditionViolated(std::string param)
      : VknError("precondition violated for input '" + param + "'"), param_id(std::move(param)) {}
};

struct RegionMismatch : VknError {
  RegionMismatch() : VknError("model inputs span more than one region") {}
};

struct EmptyValidityIntersection : VknError {
  EmptyValidityIntersection() : VknError("input validities have empty intersection") {}
};

struct NoPlan : VknError {
  std::string goal;
  explicit NoPlan(std::string goal_)
      : VknError("no composition plan reaches '" + goal_ + "'"), goal(std::move(goal_)) {}
};

struct PlanStepError : VknError {
  std::size_t step_index;  // 0-based position in the plan
  std::string model_id;
  PlanStepError(std::size_t idx, std::string model, const std::string& why)
      : VknError("plan step " + std::to_string(idx + 1) + " (" + model + "): " + why),
        step_index(idx), model_id(std::move(model)) {}
};

// ---- vkql-protocol ----

struct EncodeError : VknError {
  explicit EncodeError(const std::string& why) : VknError("encode error: " + why) {}
};

struct DecodeError : VknError {
  std::size_t offset;
  DecodeError(std::size_t offset_, const std::string& why)
      : VknError("decode error at offset " + std::to_string(offset_) + ": " + why),
        offset(offset_) {}
};

// ---- net-sim / scenario ----

struct ScenarioError : VknError {
  explicit ScenarioError(const std::string& why) : VknError("scenario error: " + why) {}
};

struct TopologyError : VknError {
  explicit TopologyError(const std::string& why) : VknError("topology error: " + why) {}
};

struct SimAuditError : VknError {
  explicit SimAuditError(const std::string& why) : VknError("simulation audit failed: " + why) {}
};

struct EmptyInput : VknError {
  explicit EmptyInput(const std::string& what_) : VknError("empty input: " + what_) {}
};

struct IoError : VknError {
  std::string path;
  IoError(std::string path_, const std::string& why)
      : VknError("io error on '" + path_ + "': " + why), path(std::move(path_)) {}
};

}  // namespace vkn
