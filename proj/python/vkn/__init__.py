"""Vehicular knowledge networking toolkit.

Thin wrapper over the C++ core: semantic names, VKMD model descriptions,
the comfort model, composition planning and the retrieval-strategy simulator.
"""

import json as _json

from ._vkn import (
    VknError,
    canonical_vkmd,
    comfort_eval,
    compare_json,
    decide_route,
    parse_semantic_name,
    parse_vkmd,
    plan_composition,
    registry_names,
    run_json,
    validate_vkmd,
)

__all__ = [
    "VknError",
    "canonical_vkmd",
    "comfort_eval",
    "compare",
    "compare_json",
    "decide_route",
    "parse_semantic_name",
    "parse_vkmd",
    "plan_composition",
    "registry_names",
    "run",
    "run_json",
    "validate_vkmd",
]


def compare(scenario_path="", overrides=None):
    """Run both strategies and return the comparison report as a dict."""
    return _json.loads(compare_json(scenario_path, overrides or {}))


def run(strategy, scenario_path="", overrides=None):
    """Run one strategy ("info_centric" or "vkn") and return its metrics."""
    return _json.loads(run_json(strategy, scenario_path, overrides or {}))
