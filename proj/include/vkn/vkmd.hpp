#pragma once
// VKMD: the Vehicular Knowledge Model Description format.
//
// A line-oriented projection of a process-model service description: a model
// id, typed inputs, typed outputs and optional freshness preconditions.
//
// Grammar (one declaration per line, '#' comments and blank lines ignored):
//   model <model_id>
//   input <param_id> : <SemanticName>     (>= 1, before any output)
//   output <param_id> : <SemanticName>    (>= 1, after inputs)
//   precondition max_age <param_id> <threshold_ms>   (>= 0, last)
// Tokens are separated by one or more spaces; ':' may also sit flush against
// its neighbours. Canonical serialization is single-space separated, sections
// in order, one binding per line, trailing newline.

#include <string>
#include <vector>

#include "vkn/semantic.hpp"

namespace vkn {

struct ParamBinding {
  std::string param_id;
  SemanticName type_name;

  bool operator==(const ParamBinding&) const = default;
};

enum class PreconditionKind { max_age };

struct Precondition {
  PreconditionKind kind = PreconditionKind::max_age;
  std::string param_id;          // refers to a declared input
  std::int64_t threshold_ms = 0; // positive

  bool operator==(const Precondition&) const = default;
};

struct ModelDescription {
  std::string model_id;  // dot-path identifier, e.g. model.env_comfort
  std::vector<ParamBinding> inputs;
  std::vector<ParamBinding> outputs;
  std::vector<Precondition> preconditions;

  bool operator==(const ModelDescription&) const = default;
};

// Throws VkmdSyntaxError, DuplicateParam, MissingSection, DanglingPrecondition.
ModelDescription parse_vkmd(const std::string& text);

// Canonical text; parse_vkmd(serialize_vkmd(d)) == d for every valid d.
std::string serialize_vkmd(const ModelDescription& desc);

struct ValidationIssue {
  std::string param_id;
  SemanticName type_name;
  std::string reason;  // currently always "UnknownTypeName"

  bool operator==(const ValidationIssue&) const = default;
};

// Empty iff every binding's type name resolves in the registry. Issues come
// back in declaration order (inputs first), never thrown.
std::vector<ValidationIssue> validate_description(const ModelDescription& desc,
                                                  const SemanticRegistry& registry);

ModelDescription load_vkmd_file(const std::string& path);

}  // namespace vkn
