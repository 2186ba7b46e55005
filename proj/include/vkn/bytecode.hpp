#pragma once
// The executable half of a knowledge model. Bytecodes are registered native
// handlers keyed by model id; size_bytes is the transfer cost the network
// pays when the executable moves, compute_ms the execution latency.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "vkn/semantic.hpp"

namespace vkn {

// Deterministic, reentrant evaluation: param id -> input item, single output
// value conforming to the description's first output domain.
using EvalFn = std::function<Value(const std::map<std::string, ContentItem>&)>;

struct ModelBytecode {
  std::string model_id;
  std::uint64_t size_bytes = 1;   // transfer cost of the executable
  std::int64_t compute_ms = 0;    // execution latency
  EvalFn eval;
};

// Scenario-level per-model constants; mirrors the model manifest line
//   <model_id> <bytecode_size_bytes> <compute_ms> <sample_size_bytes>
struct ModelParams {
  std::string model_id;
  std::uint64_t bytecode_size_bytes = 1;
  std::int64_t compute_ms = 0;
  std::uint64_t sample_size_bytes = 1;

  bool operator==(const ModelParams&) const = default;
};

// Parses a manifest ('#' comments allowed); every id must name a registered
// built-in handler, otherwise UnknownModel.
std::vector<ModelParams> parse_model_manifest(const std::string& text);

// Built-in handler lookup. Throws UnknownModel for ids with no native handler.
EvalFn builtin_handler(const std::string& model_id);
bool has_builtin_handler(const std::string& model_id);

ModelBytecode make_bytecode(const ModelParams& params);

}  // namespace vkn
