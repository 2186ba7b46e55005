#include "vkn/vkmd.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace vkn {

namespace {

struct Token {
  std::string text;
  int column;  // 1-based start column
};

// Splits a line on runs of spaces/tabs; ':' is always its own token so that
// "x: Road.Traffic", "x : Road.Traffic" and "x:Road.Traffic" lex identically.
std::vector<Token> lex_line(const std::string& line) {
  std::vector<Token> tokens;
  std::string current;
  int start = 0;
  auto flush = [&](int end_col) {
    if (!current.empty()) {
      tokens.push_back({current, start});
      current.clear();
    }
    (void)end_col;
  };
  for (int i = 0; i < static_cast<int>(line.size()); ++i) {
    char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      flush(i);
    } else if (c == ':') {
      flush(i);
      tokens.push_back({":", i + 1});
    } else {
      if (current.empty()) start = i + 1;
      current += c;
    }
  }
  flush(static_cast<int>(line.size()));
  return tokens;
}

bool is_dot_path(const std::string& s) {
  try {
    parse_semantic_name(s);
    return true;
  } catch (const MalformedName&) {
    return false;
  }
}

SemanticName parse_type_name(const std::string& text, int line, int column) {
  try {
    return parse_semantic_name(text);
  } catch (const MalformedName& e) {
    throw VkmdSyntaxError(line, column, e.what());
  }
}

// input/output lines share the shape: <keyword> <param> : <TypeName>
ParamBinding parse_binding(const std::vector<Token>& toks, int lineno) {
  if (toks.size() != 4 || toks[2].text != ":") {
    int col = toks.size() > 1 ? toks[1].column : toks[0].column;
    throw VkmdSyntaxError(lineno, col, "expected '" + toks[0].text + " <param> : <TypeName>'");
  }
  if (!is_identifier(toks[1].text))
    throw VkmdSyntaxError(lineno, toks[1].column, "param id '" + toks[1].text + "' is not an identifier");
  return {toks[1].text, parse_type_name(toks[3].text, lineno, toks[3].column)};
}

}  // namespace

ModelDescription parse_vkmd(const std::string& text) {
  ModelDescription desc;
  enum class Section { expect_model, inputs, outputs, preconditions };
  Section section = Section::expect_model;
  std::set<std::string> input_ids, output_ids;
  std::vector<std::pair<std::string, int>> precondition_params;  // checked after inputs known

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::vector<Token> toks = lex_line(raw);
    if (toks.empty()) continue;
    const std::string& kw = toks[0].text;

    if (section == Section::expect_model) {
      if (kw != "model")
        throw VkmdSyntaxError(lineno, toks[0].column, "expected 'model <model_id>' first");
      if (toks.size() != 2)
        throw VkmdSyntaxError(lineno, toks[0].column, "expected 'model <model_id>'");
      if (!is_dot_path(toks[1].text))
        throw VkmdSyntaxError(lineno, toks[1].column,
                              "model id '" + toks[1].text + "' is not a dot-path identifier");
      desc.model_id = toks[1].text;
      section = Section::inputs;
      continue;
    }

    if (kw == "input") {
      if (section != Section::inputs)
        throw VkmdSyntaxError(lineno, toks[0].column, "input line after " +
                                  std::string(section == Section::outputs ? "output" : "precondition") +
                                  " section");
      ParamBinding b = parse_binding(toks, lineno);
      if (!input_ids.insert(b.param_id).second) throw DuplicateParam(b.param_id, lineno);
      desc.inputs.push_back(std::move(b));
    } else if (kw == "output") {
      if (section == Section::preconditions)
        throw VkmdSyntaxError(lineno, toks[0].column, "output line after precondition section");
      if (desc.inputs.empty()) throw MissingSection("input");
      section = Section::outputs;
      ParamBinding b = parse_binding(toks, lineno);
      if (input_ids.count(b.param_id) || !output_ids.insert(b.param_id).second)
        throw DuplicateParam(b.param_id, lineno);
      desc.outputs.push_back(std::move(b));
    } else if (kw == "precondition") {
      if (desc.inputs.empty()) throw MissingSection("input");
      if (desc.outputs.empty()) throw MissingSection("output");
      section = Section::preconditions;
      if (toks.size() != 4 || toks[1].text != "max_age")
        throw VkmdSyntaxError(lineno, toks.size() > 1 ? toks[1].column : toks[0].column,
                              "expected 'precondition max_age <param> <threshold_ms>'");
      if (!is_identifier(toks[2].text))
        throw VkmdSyntaxError(lineno, toks[2].column,
                              "param id '" + toks[2].text + "' is not an identifier");
      std::int64_t threshold = 0;
      try {
        std::size_t used = 0;
        threshold = std::stoll(toks[3].text, &used);
        if (used != toks[3].text.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw VkmdSyntaxError(lineno, toks[3].column,
                              "threshold '" + toks[3].text + "' is not an integer");
      }
      if (threshold <= 0)
        throw VkmdSyntaxError(lineno, toks[3].column, "threshold must be positive");
      precondition_params.emplace_back(toks[2].text, lineno);
      desc.preconditions.push_back({PreconditionKind::max_age, toks[2].text, threshold});
    } else if (kw == "model") {
      throw VkmdSyntaxError(lineno, toks[0].column, "duplicate model line");
    } else {
      throw VkmdSyntaxError(lineno, toks[0].column, "unknown keyword '" + kw + "'");
    }
  }

  if (desc.model_id.empty()) throw VkmdSyntaxError(1, 1, "expected 'model <model_id>' first");
  if (desc.inputs.empty()) throw MissingSection("input");
  if (desc.outputs.empty()) throw MissingSection("output");
  for (const auto& [param, line] : precondition_params) {
    if (!input_ids.count(param)) throw DanglingPrecondition(param, line);
  }
  return desc;
}

std::string serialize_vkmd(const ModelDescription& desc) {
  std::string out = "model " + desc.model_id + "\n";
  for (const auto& b : desc.inputs) out += "input " + b.param_id + " : " + b.type_name.str() + "\n";
  for (const auto& b : desc.outputs)
    out += "output " + b.param_id + " : " + b.type_name.str() + "\n";
  for (const auto& p : desc.preconditions)
    out += "precondition max_age " + p.param_id + " " + std::to_string(p.threshold_ms) + "\n";
  return out;
}

std::vector<ValidationIssue> validate_description(const ModelDescription& desc,
                                                  const SemanticRegistry& registry) {
  std::vector<ValidationIssue> issues;
  auto check = [&](const ParamBinding& b) {
    if (!registry.has(b.type_name)) issues.push_back({b.param_id, b.type_name, "UnknownTypeName"});
  };
  for (const auto& b : desc.inputs) check(b);
  for (const auto& b : desc.outputs) check(b);
  return issues;
}

ModelDescription load_vkmd_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_vkmd(buf.str());
}

}  // namespace vkn
