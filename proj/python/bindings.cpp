// Python bindings for the main operations: naming, descriptions, the comfort
// model, composition planning, route decisions and the strategy simulator.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vkn/engine.hpp"
#include "vkn/netsim.hpp"
#include "vkn/scenario.hpp"
#include "vkn/vkmd.hpp"

namespace py = pybind11;

namespace {

py::dict description_to_dict(const vkn::ModelDescription& desc) {
  py::dict out;
  out["model_id"] = desc.model_id;
  py::list inputs, outputs, preconditions;
  for (const auto& b : desc.inputs) inputs.append(py::make_tuple(b.param_id, b.type_name.str()));
  for (const auto& b : desc.outputs) outputs.append(py::make_tuple(b.param_id, b.type_name.str()));
  for (const auto& p : desc.preconditions)
    preconditions.append(py::make_tuple("max_age", p.param_id, p.threshold_ms));
  out["inputs"] = inputs;
  out["outputs"] = outputs;
  out["preconditions"] = preconditions;
  return out;
}

vkn::sim::Scenario scenario_from(const std::string& path,
                                 const std::map<std::string, std::string>& overrides) {
  vkn::sim::Scenario scn =
      path.empty() ? vkn::sim::default_scenario() : vkn::sim::load_scenario_file(path);
  for (const auto& [key, value] : overrides) vkn::sim::apply_override(scn, key, value);
  return scn;
}

}  // namespace

PYBIND11_MODULE(_vkn, m) {
  m.doc() = "vehicular knowledge networking core";

  py::register_exception<vkn::VknError>(m, "VknError", PyExc_ValueError);

  m.def("parse_semantic_name",
        [](const std::string& text) { return vkn::parse_semantic_name(text).str(); },
        py::arg("text"), "Parse a dot-path name and return its canonical form.");

  m.def("registry_names", [](const std::string& registry_path) {
          vkn::SemanticRegistry reg = registry_path.empty()
                                          ? vkn::default_registry()
                                          : vkn::load_registry_file(registry_path);
          py::dict out;
          for (const auto& [name, domain] : reg.entries()) {
            if (domain.kind == vkn::DomainKind::symbolic) {
              out[py::str(name.str())] = domain.symbols;
            } else {
              out[py::str(name.str())] = domain.unit;
            }
          }
          return out;
        },
        py::arg("registry_path") = "",
        "Registered names mapped to their symbol list (or unit label).");

  m.def("comfort_eval", &vkn::comfort_eval, py::arg("two_wheelers"), py::arg("visibility"),
        py::arg("traffic"), "Comfort level for a (concentration, visibility, traffic) triple.");

  m.def("parse_vkmd",
        [](const std::string& text) { return description_to_dict(vkn::parse_vkmd(text)); },
        py::arg("text"), "Parse VKMD text into a dict of its fields.");

  m.def("canonical_vkmd",
        [](const std::string& text) { return vkn::serialize_vkmd(vkn::parse_vkmd(text)); },
        py::arg("text"), "Canonical serialization of VKMD text.");

  m.def("validate_vkmd",
        [](const std::string& text, const std::string& registry_path) {
          vkn::SemanticRegistry reg = registry_path.empty()
                                          ? vkn::default_registry()
                                          : vkn::load_registry_file(registry_path);
          std::vector<std::string> out;
          for (const auto& issue : vkn::validate_description(vkn::parse_vkmd(text), reg))
            out.push_back(issue.reason + " param=" + issue.param_id +
                          " type=" + issue.type_name.str());
          return out;
        },
        py::arg("text"), py::arg("registry_path") = "",
        "Validation issues for a description against a registry (empty list = valid).");

  m.def("plan_composition",
        [](const std::vector<std::string>& vkmd_texts, const std::string& goal,
           const std::vector<std::string>& available, int max_depth) {
          vkn::KnowledgeBase kb;
          for (const auto& text : vkmd_texts) kb.register_description(vkn::parse_vkmd(text));
          std::set<vkn::SemanticName> names;
          for (const auto& a : available) names.insert(vkn::parse_semantic_name(a));
          vkn::CompositionPlan plan =
              vkn::plan_composition(kb, vkn::parse_semantic_name(goal), names, max_depth);
          std::vector<std::string> leaves;
          for (const auto& leaf : plan.leaf_inputs) leaves.push_back(leaf.str());
          return py::make_tuple(plan.steps, leaves);
        },
        py::arg("vkmd_texts"), py::arg("goal"), py::arg("available"), py::arg("max_depth") = 8,
        "Plan a fewest-steps composition; returns (steps, leaf_inputs).");

  m.def("compare_json",
        [](const std::string& scenario_path, const std::map<std::string, std::string>& overrides) {
          vkn::sim::Scenario scn = scenario_from(scenario_path, overrides);
          return vkn::sim::render_report_json(
              vkn::sim::run_comparison(scn, vkn::default_registry()));
        },
        py::arg("scenario_path") = "", py::arg("overrides") = std::map<std::string, std::string>{},
        "Run both strategies (built-in scenario when no path) and return the JSON report.");

  m.def("run_json",
        [](const std::string& strategy, const std::string& scenario_path,
           const std::map<std::string, std::string>& overrides) {
          vkn::sim::Scenario scn = scenario_from(scenario_path, overrides);
          vkn::sim::Topology topo = vkn::sim::build_topology(scn, vkn::default_registry());
          vkn::sim::RunMetrics metrics = strategy == "vkn"
                                             ? vkn::sim::run_strategy_vkn(topo, scn)
                                             : vkn::sim::run_strategy_info_centric(topo, scn);
          return vkn::sim::render_metrics_json(metrics);
        },
        py::arg("strategy"), py::arg("scenario_path") = "",
        py::arg("overrides") = std::map<std::string, std::string>{},
        "Run one strategy and return its metrics as JSON.");

  m.def("decide_route",
        [](const std::map<std::string, std::optional<std::string>>& samples) {
          vkn::RouteDecision d = vkn::decide_route(samples);
          return py::make_tuple(d.chosen, d.no_comfort_data);
        },
        py::arg("samples"),
        "Pick the most comfortable region; returns (chosen, no_comfort_data).");
}
