"""Declarative model of extended Wigner's friend experiments.

A Scenario is a timed, sited program of prepare / friend-measure / undo /
copy / superobserver-measure events over labeled qubit registers, with
named binary settings guarding events and named outcome variables bound
to measurement events.  Scenarios are immutable; compilation and
simulation live in ewflab.scenario.engine.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from ewflab.qcore import Register, named_state

EVENT_KINDS = ("prepare", "friend_measure", "undo", "copy", "super_measure")
AGENT_ROLES = ("friend", "superobserver")


class ScenarioError(ValueError):
    """Raised for structurally invalid scenarios."""


class UnknownScenarioError(KeyError):
    """Raised when a catalogue lookup names no built-in scenario."""


@dataclass(frozen=True)
class Agent:
    name: str
    role: str

    def __post_init__(self):
        if self.role not in AGENT_ROLES:
            raise ScenarioError(f"unknown agent role {self.role!r}")


@dataclass(frozen=True)
class Setting:
    """A freely chosen binary variable with an owner and a site."""

    name: str
    owner: str
    site: str
    values: tuple[int, ...] = (0, 1)


@dataclass(frozen=True)
class StatePrep:
    """Initial state over a subset of registers; others start in |0>.

    Either a named builder ("hardy", "singlet", "plus", ...) or explicit
    amplitudes (list of [re, im] pairs) over the listed registers.
    """

    registers: tuple[str, ...]
    name: str | None = None
    amplitudes: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if (self.name is None) == (self.amplitudes is None):
            raise ScenarioError("state prep needs exactly one of name / amplitudes")

    def vector(self) -> np.ndarray:
        if self.name is not None:
            return named_state(self.name, self.registers).amplitudes
        amps = np.array([complex(re, im) for re, im in self.amplitudes])
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > 1e-9:
            raise ScenarioError(f"prepared state has squared norm {norm2!r}")
        return amps


@dataclass(frozen=True)
class Event:
    """One step of the experimental program.

    kind-specific fields:
      prepare:        state
      friend_measure: agent, systems, memories, basis, outcome
      undo:           agent, target (id of the friend_measure being reversed)
      copy:           agent, source (agent whose memory is read), outcome
      super_measure:  agent, systems, basis, outcome
    guard restricts the event to runs where the named settings take the
    given values.
    """

    id: str
    kind: str
    tick: int
    site: str
    agent: str | None = None
    state: StatePrep | None = None
    systems: tuple[str, ...] = ()
    memories: tuple[str, ...] = ()
    basis: str | None = None
    target: str | None = None
    source: str | None = None
    memory: str | None = None  # destination register for unitary copies
    guard: "tuple[tuple[str, int], ...] | None" = None
    outcome: str | None = None

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ScenarioError(f"unknown event kind {self.kind!r}")

    def guard_dict(self) -> dict[str, int]:
        return dict(self.guard) if self.guard else {}

    def realized(self, assignment: Mapping[str, int]) -> bool:
        return all(assignment.get(k) == v for k, v in self.guard_dict().items())


def guard_of(mapping: Mapping[str, int] | None) -> tuple[tuple[str, int], ...] | None:
    if not mapping:
        return None
    return tuple(sorted(mapping.items()))


def _exclusive(g1: Mapping[str, int], g2: Mapping[str, int]) -> bool:
    """Whether two guards can never hold simultaneously."""
    return any(k in g2 and g2[k] != v for k, v in g1.items())


class Scenario:
    """An immutable extended Wigner's friend experiment."""

    def __init__(self, name: str, agents: Sequence[Agent],
                 registers: Sequence[Register], events: Sequence[Event],
                 settings: Sequence[Setting] = (), signal_delay: int = 1):
        self.name = name
        self.agents = tuple(agents)
        self.registers = tuple(registers)
        self.events = tuple(events)
        self.settings = tuple(settings)
        self.signal_delay = int(signal_delay)
        problems = self.diagnostics()
        if problems:
            raise ScenarioError(f"invalid scenario {name!r}: " + "; ".join(problems))

    # -- derived structure ------------------------------------------------

    def agent(self, name: str) -> Agent:
        for a in self.agents:
            if a.name == name:
                return a
        raise ScenarioError(f"unknown agent {name!r}")

    def register_labels(self) -> tuple[str, ...]:
        return tuple(r.label for r in self.registers)

    def event_by_id(self, event_id: str) -> Event:
        for e in self.events:
            if e.id == event_id:
                return e
        raise ScenarioError(f"unknown event id {event_id!r}")

    def sites(self) -> tuple[str, ...]:
        seen: list[str] = []
        for e in self.events:
            if e.site not in seen:
                seen.append(e.site)
        return tuple(seen)

    def outcome_variables(self) -> tuple[str, ...]:
        seen: list[str] = []
        for e in self.events:
            if e.outcome and e.outcome not in seen:
                seen.append(e.outcome)
        return tuple(seen)

    def setting_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.settings)

    def setting_assignments(self) -> list[dict[str, int]]:
        """All full assignments of the declared settings."""
        if not self.settings:
            return [{}]
        names = [s.name for s in self.settings]
        spaces = [s.values for s in self.settings]
        return [dict(zip(names, combo)) for combo in itertools.product(*spaces)]

    def producing_events(self, variable: str) -> list[Event]:
        return [e for e in self.events if e.outcome == variable]

    def memory_registers(self, agent: str) -> list[str]:
        return [r.label for r in self.registers
                if r.role == "friend-memory" and r.owner == agent]

    def ordered_events(self) -> list[Event]:
        site_order = {s: i for i, s in enumerate(self.sites())}
        decl = {e.id: i for i, e in enumerate(self.events)}
        return sorted(self.events,
                      key=lambda e: (e.tick, site_order[e.site], decl[e.id]))

    def undo_of(self, measure_id: str) -> Event | None:
        for e in self.events:
            if e.kind == "undo" and e.target == measure_id:
                return e
        return None

    # -- validation --------------------------------------------------------

    def diagnostics(self) -> list[str]:
        """Structural problems, empty when the scenario is well formed."""
        out: list[str] = []
        agent_names = {a.name for a in self.agents}
        if len(agent_names) != len(self.agents):
            out.append("duplicate agent names")
        labels = self.register_labels()
        if len(set(labels)) != len(labels):
            out.append("duplicate register labels")
        ids = [e.id for e in self.events]
        if len(set(ids)) != len(ids):
            out.append("duplicate event ids")
        setting_names = {s.name for s in self.settings}

        prepares = [e for e in self.events if e.kind == "prepare"]
        if len(prepares) != 1:
            out.append(f"expected exactly one prepare event, found {len(prepares)}")
        else:
            prep = prepares[0]
            if prep.state is None:
                out.append("prepare event carries no state")
            else:
                for lab in prep.state.registers:
                    if lab not in labels:
                        out.append(f"prepare references unknown register {lab!r}")
                try:
                    vec = prep.state.vector()
                    if vec.size != 2 ** len(prep.state.registers):
                        out.append("prepared amplitudes do not match its registers")
                except ScenarioError as exc:
                    out.append(str(exc))
            if any(e.tick <= prep.tick for e in self.events if e is not prep):
                out.append("prepare must precede every other event")

        by_id = {e.id: e for e in self.events}
        for e in self.events:
            if e.agent is not None and e.agent not in agent_names:
                out.append(f"event {e.id!r} names unknown agent {e.agent!r}")
            for lab in e.systems + e.memories:
                if lab not in labels:
                    out.append(f"event {e.id!r} references unknown register {lab!r}")
            for key, val in e.guard_dict().items():
                if key not in setting_names:
                    out.append(f"event {e.id!r} guard references unknown setting {key!r}")
                else:
                    setting = next(s for s in self.settings if s.name == key)
                    if val not in setting.values:
                        out.append(f"event {e.id!r} guard value {val!r} not allowed for {key!r}")
            if e.kind == "friend_measure":
                if not e.systems or not e.memories:
                    out.append(f"friend_measure {e.id!r} needs systems and memories")
                if len(e.systems) != len(e.memories):
                    out.append(f"friend_measure {e.id!r} needs one memory per system qubit")
                for lab in e.memories:
                    reg = next((r for r in self.registers if r.label == lab), None)
                    if reg is not None and reg.role != "friend-memory":
                        out.append(f"friend_measure {e.id!r} memory {lab!r} is not friend-memory")
                if e.basis is None:
                    out.append(f"friend_measure {e.id!r} has no basis")
            elif e.kind == "undo":
                tgt = by_id.get(e.target or "")
                if tgt is None:
                    out.append(f"undo {e.id!r} references missing event {e.target!r}")
                else:
                    if tgt.kind != "friend_measure":
                        out.append(f"undo {e.id!r} target {e.target!r} is not a friend_measure")
                    if tgt.tick >= e.tick:
                        out.append(f"undo {e.id!r} does not come after its target")
                    if tgt.site != e.site:
                        out.append(f"undo {e.id!r} is at a different site than its target")
                if e.agent is not None and e.agent in agent_names:
                    if self.agent(e.agent).role != "superobserver":
                        out.append(f"undo {e.id!r} agent {e.agent!r} is not a superobserver")
            elif e.kind == "copy":
                if e.source not in agent_names:
                    out.append(f"copy {e.id!r} source {e.source!r} is not an agent")
                elif not self.memory_registers(e.source):
                    out.append(f"copy {e.id!r} source {e.source!r} owns no friend-memory register")
            elif e.kind == "super_measure":
                if not e.systems:
                    out.append(f"super_measure {e.id!r} measures no registers")
                if e.basis is None:
                    out.append(f"super_measure {e.id!r} has no basis")

        # per-site strict ordering among co-realizable events
        for e1, e2 in itertools.combinations(self.events, 2):
            if e1.site == e2.site and e1.tick == e2.tick:
                if not _exclusive(e1.guard_dict(), e2.guard_dict()):
                    out.append(f"events {e1.id!r} and {e2.id!r} share tick {e1.tick} "
                               f"at site {e1.site!r}")

        # outcome variables bound at most once per realized assignment
        for var in self.outcome_variables():
            events = self.producing_events(var)
            for assignment in self.setting_assignments():
                realized = [e for e in events if e.realized(assignment)]
                if len(realized) > 1:
                    out.append(f"outcome {var!r} produced by several events under "
                               f"{assignment}")
        return out

    # -- comparisons and copies ---------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        from ewflab.scenario.io import scenario_to_dict
        return scenario_to_dict(self) == scenario_to_dict(other)

    def __repr__(self):
        return f"Scenario({self.name!r}, {len(self.events)} events)"


@dataclass(frozen=True)
class RecordLifetime:
    """Lifetime [created, erased) of an outcome record at its site."""

    variable: str
    site: str
    created: int
    erased: int | None  # None = never erased

    def __post_init__(self):
        if self.erased is not None and self.erased <= self.created:
            raise ScenarioError(
                f"record of {self.variable!r} erased at {self.erased} "
                f"before its creation at {self.created}")


@dataclass(frozen=True)
class TimingProfile:
    """Per-variable record lifetimes plus the inter-site signal delay."""

    lifetimes: tuple[RecordLifetime, ...]
    signal_delay: int

    def lifetime(self, variable: str) -> RecordLifetime:
        for lt in self.lifetimes:
            if lt.variable == variable:
                return lt
        raise KeyError(variable)


def timing_profile(scenario: Scenario,
                   settings: Mapping[str, int] | None = None) -> TimingProfile:
    """Record lifetimes under a full setting assignment.

    A friend-measure record is created at the measure tick and destroyed
    at the tick of the undo that reverses it (when that undo is
    realized); copy and superobserver records are never destroyed.
    """
    assignment = dict(settings or {})
    lifetimes = []
    for event in scenario.events:
        if event.outcome is None or not event.realized(assignment):
            continue
        erased = None
        if event.kind == "friend_measure":
            undo = scenario.undo_of(event.id)
            if undo is not None and undo.realized(assignment):
                erased = undo.tick
        lifetimes.append(RecordLifetime(event.outcome, event.site,
                                        event.tick, erased))
    return TimingProfile(tuple(lifetimes), scenario.signal_delay)
