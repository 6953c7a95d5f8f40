"""Scenario file format: canonical JSON with byte-stable serialization.

Top-level keys: agents, registers, events, settings, outcomes, timing.
Serialization is canonical (sorted keys, two-space indent, LF newline)
so identical scenarios produce identical bytes, which the golden tests
rely on.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from ewflab.qcore import Register
from ewflab.scenario.model import (
    Agent,
    Event,
    Scenario,
    ScenarioError,
    Setting,
    StatePrep,
    guard_of,
)


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    events = []
    for e in scenario.events:
        entry: dict[str, Any] = {
            "id": e.id, "kind": e.kind, "tick": e.tick, "site": e.site,
        }
        if e.agent is not None:
            entry["agent"] = e.agent
        if e.state is not None:
            state: dict[str, Any] = {"registers": list(e.state.registers)}
            if e.state.name is not None:
                state["name"] = e.state.name
            else:
                state["amplitudes"] = [list(pair) for pair in e.state.amplitudes]
            entry["state"] = state
        if e.systems:
            entry["systems"] = list(e.systems)
        if e.memories:
            entry["memories"] = list(e.memories)
        if e.basis is not None:
            entry["basis"] = e.basis
        if e.target is not None:
            entry["target"] = e.target
        if e.source is not None:
            entry["source"] = e.source
        if e.memory is not None:
            entry["memory"] = e.memory
        if e.guard:
            entry["guard"] = {k: v for k, v in e.guard}
        if e.outcome is not None:
            entry["outcome"] = e.outcome
        events.append(entry)
    return {
        "name": scenario.name,
        "agents": [{"name": a.name, "role": a.role} for a in scenario.agents],
        "registers": [
            {"label": r.label, "role": r.role,
             **({"owner": r.owner} if r.owner else {})}
            for r in scenario.registers],
        "settings": [
            {"name": s.name, "owner": s.owner, "site": s.site,
             "values": list(s.values)}
            for s in scenario.settings],
        "events": events,
        "outcomes": [{"name": v} for v in scenario.outcome_variables()],
        "timing": {"signal_delay": scenario.signal_delay},
    }


def scenario_from_dict(data: dict[str, Any]) -> Scenario:
    problems = schema_diagnostics(data)
    if problems:
        raise ScenarioError("; ".join(problems))
    agents = [Agent(a["name"], a["role"]) for a in data["agents"]]
    registers = [Register(r["label"], r.get("role", "system"), r.get("owner"))
                 for r in data["registers"]]
    settings = [Setting(s["name"], s["owner"], s["site"],
                        tuple(s.get("values", (0, 1))))
                for s in data.get("settings", [])]
    events = []
    for entry in data["events"]:
        state = None
        if "state" in entry:
            s = entry["state"]
            amplitudes = None
            if "amplitudes" in s:
                amplitudes = tuple((float(re), float(im))
                                   for re, im in s["amplitudes"])
            state = StatePrep(tuple(s["registers"]), s.get("name"), amplitudes)
        events.append(Event(
            id=entry["id"], kind=entry["kind"], tick=int(entry["tick"]),
            site=entry["site"], agent=entry.get("agent"), state=state,
            systems=tuple(entry.get("systems", ())),
            memories=tuple(entry.get("memories", ())),
            basis=entry.get("basis"), target=entry.get("target"),
            source=entry.get("source"), memory=entry.get("memory"),
            guard=guard_of({k: int(v) for k, v in entry.get("guard", {}).items()}),
            outcome=entry.get("outcome")))
    timing = data.get("timing", {})
    return Scenario(data["name"], agents, registers, events, settings,
                    int(timing.get("signal_delay", 1)))


def schema_diagnostics(data: Any) -> list[str]:
    """Shape-level problems with a scenario document (before semantics)."""
    out: list[str] = []
    if not isinstance(data, dict):
        return ["scenario document must be a JSON object"]
    for key in ("name", "agents", "registers", "events"):
        if key not in data:
            out.append(f"missing top-level key {key!r}")
    if out:
        return out
    for i, a in enumerate(data["agents"]):
        if not isinstance(a, dict) or "name" not in a or "role" not in a:
            out.append(f"agents[{i}] needs name and role")
    for i, r in enumerate(data["registers"]):
        if not isinstance(r, dict) or "label" not in r:
            out.append(f"registers[{i}] needs a label")
    for i, e in enumerate(data["events"]):
        if not isinstance(e, dict):
            out.append(f"events[{i}] must be an object")
            continue
        for key in ("id", "kind", "tick", "site"):
            if key not in e:
                out.append(f"events[{i}] missing field {key!r}")
    for i, s in enumerate(data.get("settings", [])):
        for key in ("name", "owner", "site"):
            if key not in s:
                out.append(f"settings[{i}] missing field {key!r}")
    return out


def to_json(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2, sort_keys=True) + "\n"


def from_json(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"not valid JSON: {exc}") from None
    return scenario_from_dict(data)


def save(scenario: Scenario, path) -> None:
    Path(path).write_text(to_json(scenario), encoding="utf-8")


def load(path) -> Scenario:
    return from_json(Path(path).read_text(encoding="utf-8"))


def validate_file(path) -> list[str]:
    """Diagnostics for a scenario file; empty when loadable and well formed.

    Collects JSON, schema, and semantic problems instead of raising.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        return [f"cannot read {path}: {exc}"]
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        return [f"not valid JSON: {exc}"]
    problems = schema_diagnostics(data)
    if problems:
        return problems
    try:
        scenario_from_dict(data)
    except (ScenarioError, ValueError) as exc:
        return [str(exc)]
    return []
