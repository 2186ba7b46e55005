// vkn: parse and validate model descriptions, plan compositions, and run the
// retrieval-strategy simulator.
//
// Exit codes: 0 success, 1 negative domain result (no plan, validation
// issues), 2 user/config error, 3 io error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vkn/engine.hpp"
#include "vkn/netsim.hpp"
#include "vkn/scenario.hpp"
#include "vkn/vkmd.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

vkn::SemanticRegistry resolve_registry(const std::string& registry_path) {
  if (!registry_path.empty()) return vkn::load_registry_file(registry_path);
  return vkn::default_registry();
}

std::map<std::string, std::string> parse_overrides(const std::vector<std::string>& overrides) {
  std::map<std::string, std::string> out;
  for (const auto& kv : overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw vkn::ScenarioError("override '" + kv + "' is not key=value");
    out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

vkn::sim::Scenario load_scenario(const std::string& path,
                                 const std::vector<std::string>& overrides) {
  vkn::sim::Scenario scn = vkn::sim::load_scenario_file(path);
  for (const auto& [key, value] : parse_overrides(overrides)) {
    vkn::sim::apply_override(scn, key, value);
  }
  return scn;
}

void write_trace(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw vkn::IoError(path, "cannot open for writing");
  for (const auto& line : lines) out << line << '\n';
}

int cmd_parse(const std::string& path) {
  try {
    vkn::ModelDescription desc = vkn::load_vkmd_file(path);
    std::cout << vkn::serialize_vkmd(desc);
    return kExitOk;
  } catch (const vkn::VkmdSyntaxError& e) {
    std::cerr << path << ":" << e.line << ":" << e.column << ": " << e.detail << "\n";
    return kExitUsage;
  } catch (const vkn::DuplicateParam& e) {
    std::cerr << path << ":" << e.line << ": duplicate param '" << e.param_id << "'\n";
    return kExitUsage;
  } catch (const vkn::DanglingPrecondition& e) {
    std::cerr << path << ":" << e.line << ": precondition references undeclared param '"
              << e.param_id << "'\n";
    return kExitUsage;
  } catch (const vkn::MissingSection& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_validate(const std::string& path, const std::string& registry_path) {
  vkn::SemanticRegistry registry = resolve_registry(registry_path);
  vkn::ModelDescription desc = vkn::load_vkmd_file(path);
  auto issues = vkn::validate_description(desc, registry);
  if (issues.empty()) {
    std::cout << "valid " << desc.model_id << "\n";
    return kExitOk;
  }
  for (const auto& issue : issues) {
    std::cout << issue.reason << " param=" << issue.param_id << " type=" << issue.type_name.str()
              << "\n";
  }
  return kExitNegative;
}

int cmd_plan(const std::string& kb_dir, const std::string& goal,
             const std::vector<std::string>& available, int max_depth) {
  vkn::KnowledgeBase kb;
  std::vector<std::string> failures;
  std::vector<fs::path> files;
  if (!fs::is_directory(kb_dir)) throw vkn::IoError(kb_dir, "not a directory");
  for (const auto& entry : fs::directory_iterator(kb_dir)) {
    if (entry.path().extension() == ".vkmd") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    try {
      kb.register_description(vkn::load_vkmd_file(file.string()));
    } catch (const vkn::VknError& e) {
      failures.push_back(file.string() + ": " + e.what());
    }
  }
  if (!failures.empty()) {
    for (const auto& f : failures) std::cerr << f << "\n";
    return kExitUsage;
  }

  std::set<vkn::SemanticName> names;
  for (const auto& a : available) names.insert(vkn::parse_semantic_name(a));
  try {
    vkn::CompositionPlan plan =
        vkn::plan_composition(kb, vkn::parse_semantic_name(goal), names, max_depth);
    std::cout << "steps " << plan.steps.size() << "\n";
    for (const auto& step : plan.steps) std::cout << "step " << step << "\n";
    for (const auto& leaf : plan.leaf_inputs) std::cout << "leaf " << leaf.str() << "\n";
    return kExitOk;
  } catch (const vkn::NoPlan& e) {
    std::cout << "no plan: " << e.what() << "\n";
    return kExitNegative;
  }
}

int cmd_run(const std::string& scenario_path, const std::vector<std::string>& overrides,
            const std::string& strategy, const std::string& format,
            const std::string& registry_path, const std::string& trace_path) {
  vkn::SemanticRegistry registry = resolve_registry(registry_path);
  vkn::sim::Scenario scn = load_scenario(scenario_path, overrides);
  vkn::sim::Topology topo = vkn::sim::build_topology(scn, registry);
  vkn::sim::RunMetrics metrics = strategy == "vkn"
                                     ? vkn::sim::run_strategy_vkn(topo, scn)
                                     : vkn::sim::run_strategy_info_centric(topo, scn);
  std::cout << (format == "json" ? vkn::sim::render_metrics_json(metrics)
                                 : vkn::sim::render_metrics_text(metrics));
  if (!trace_path.empty()) write_trace(trace_path, metrics.trace);
  return kExitOk;
}

int cmd_compare(const std::string& scenario_path, const std::vector<std::string>& overrides,
                const std::string& format, const std::string& registry_path,
                const std::string& trace_path) {
  vkn::SemanticRegistry registry = resolve_registry(registry_path);
  vkn::sim::Scenario scn = load_scenario(scenario_path, overrides);
  vkn::sim::ComparisonReport report = vkn::sim::run_comparison(scn, registry);
  std::cout << (format == "json" ? vkn::sim::render_report_json(report)
                                 : vkn::sim::render_report_text(report));
  if (!trace_path.empty()) {
    std::vector<std::string> lines;
    lines.push_back("== info_centric ==");
    lines.insert(lines.end(), report.info_centric.trace.begin(), report.info_centric.trace.end());
    lines.push_back("== vkn ==");
    lines.insert(lines.end(), report.vkn.trace.begin(), report.vkn.trace.end());
    write_trace(trace_path, lines);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vehicular knowledge networking toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string registry_path;
  app.add_option("--registry", registry_path, "registry file (NAME = SYM|... per line)")
      ->envname("VKN_REGISTRY");

  std::string format = "text";
  std::string trace_path;
  std::vector<std::string> overrides;

  auto* parse_cmd = app.add_subcommand("parse", "parse a .vkmd file and print its canonical form");
  std::string parse_path;
  parse_cmd->add_option("file", parse_path, "description file")->required();

  auto* validate_cmd =
      app.add_subcommand("validate", "check a description's type names against the registry");
  std::string validate_path;
  validate_cmd->add_option("file", validate_path, "description file")->required();

  auto* plan_cmd = app.add_subcommand("plan", "plan a model composition toward a goal name");
  std::string plan_dir, plan_goal;
  std::vector<std::string> plan_available;
  int plan_depth = 8;
  plan_cmd->add_option("kb_dir", plan_dir, "directory of .vkmd files")->required();
  plan_cmd->add_option("--goal", plan_goal, "goal semantic name")->required();
  plan_cmd->add_option("--available", plan_available, "semantic names present in the store")
      ->delimiter(',');
  plan_cmd->add_option("--max-depth", plan_depth, "maximum plan length");

  auto* run_cmd = app.add_subcommand("run", "run one retrieval strategy on a scenario");
  std::string run_scenario, run_strategy = "vkn";
  run_cmd->add_option("scenario", run_scenario, "scenario config file")->required();
  run_cmd->add_option("--strategy", run_strategy, "info_centric or vkn")
      ->check(CLI::IsMember({"info_centric", "vkn"}))
      ->capture_default_str();

  auto* compare_cmd =
      app.add_subcommand("compare", "run both strategies and report deltas and route choice");
  std::string compare_scenario;
  compare_cmd->add_option("scenario", compare_scenario, "scenario config file")->required();

  for (CLI::App* cmd : {run_cmd, compare_cmd}) {
    cmd->add_option("--format", format, "text or json")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    cmd->add_option("--override", overrides, "scenario constant override key=value");
    cmd->add_option("--trace", trace_path, "write the delivery trace to this file");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (parse_cmd->parsed()) return cmd_parse(parse_path);
    if (validate_cmd->parsed()) return cmd_validate(validate_path, registry_path);
    if (plan_cmd->parsed()) return cmd_plan(plan_dir, plan_goal, plan_available, plan_depth);
    if (run_cmd->parsed())
      return cmd_run(run_scenario, overrides, run_strategy, format, registry_path, trace_path);
    if (compare_cmd->parsed())
      return cmd_compare(compare_scenario, overrides, format, registry_path, trace_path);
  } catch (const vkn::IoError& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  } catch (const vkn::NoPlan& e) {
    std::cout << "no plan: " << e.what() << "\n";
    return kExitNegative;
  } catch (const vkn::VknError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
