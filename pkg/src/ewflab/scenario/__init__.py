"""Scenario model, catalogue, compilation, and analyses."""

from ewflab.scenario.accessibility import (
    AccessibilityResult,
    accessibility_map,
    classify_accessibility,
)
from ewflab.scenario.catalogue import catalogue, gao, lookup, pusey_masanes_fr
from ewflab.scenario.engine import (
    Behavior,
    CorrelationTable,
    NoCopyEventError,
    Program,
    UnrealizedVariableError,
    compile_circuit,
    deterministic_local_behavior,
    event_distribution,
    local_agency_checks,
    pr_box,
    simulate_final_state,
    stalkee_predictions,
    tracking_check,
)
from ewflab.scenario.gao import GaoRunResult, collapse_ordered_law, gao_run
from ewflab.scenario.io import from_json, load, save, to_json, validate_file
from ewflab.scenario.model import (
    Agent,
    Event,
    Scenario,
    ScenarioError,
    Setting,
    StatePrep,
    TimingProfile,
    UnknownScenarioError,
    guard_of,
    timing_profile,
)

__all__ = [
    "AccessibilityResult", "Agent", "Behavior", "CorrelationTable", "Event",
    "GaoRunResult", "NoCopyEventError", "Program", "Scenario", "ScenarioError",
    "Setting", "StatePrep", "TimingProfile", "UnknownScenarioError",
    "UnrealizedVariableError", "accessibility_map", "catalogue",
    "classify_accessibility", "collapse_ordered_law", "compile_circuit",
    "deterministic_local_behavior", "event_distribution", "from_json", "gao",
    "gao_run", "guard_of", "load", "local_agency_checks", "lookup", "pr_box",
    "pusey_masanes_fr", "save", "simulate_final_state", "stalkee_predictions",
    "timing_profile", "to_json", "tracking_check", "validate_file",
]
