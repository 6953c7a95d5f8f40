"""Built-in extended Wigner's friend scenarios.

Names accepted by lookup():

  wigner_friend            one friend measuring a |+> qubit
  wigner_enemy             the same plus a superobserver undoing it
  wigner_stalkee           friend measured jointly in an entangled basis
  hardy                    two-wing Hardy test, no friends, settings x/y
  brukner_lf               Hardy wings with friends and ask-or-undo settings
  pusey_masanes_fr         fixed-measurement variant (also the setup used
                           by the epistemic inference engine)
  pusey_masanes_fr_mirrored    same with the two undo delays exchanged
  gao(k, foliation)        k measure/undo cycles on half a singlet,
                           foliation in {debbie_first, debbie_last}
  guerin_modified          friend measures twice (computational then
                           complementary) with an undo in between
  guerin_original          friend measured once, then a joint entangled
                           measurement by the superobserver
"""

from __future__ import annotations

import re

from ewflab.qcore import Register
from ewflab.scenario.model import (
    Agent,
    Event,
    Scenario,
    Setting,
    StatePrep,
    UnknownScenarioError,
    guard_of,
)

GAO_FOLIATIONS = ("debbie_first", "debbie_last")


def wigner_friend() -> Scenario:
    return Scenario(
        "wigner_friend",
        agents=[Agent("Friend", "friend"), Agent("Wigner", "superobserver")],
        registers=[Register("S"), Register("F", "friend-memory", "Friend")],
        events=[
            Event("prep", "prepare", 0, "lab",
                  state=StatePrep(("S",), name="plus")),
            Event("f-measure", "friend_measure", 1, "lab", agent="Friend",
                  systems=("S",), memories=("F",), basis="computational",
                  outcome="f"),
        ])


def wigner_enemy() -> Scenario:
    base = wigner_friend()
    events = list(base.events) + [
        Event("w-undo", "undo", 2, "lab", agent="Wigner", target="f-measure"),
    ]
    return Scenario("wigner_enemy", base.agents, base.registers, events)


def wigner_stalkee() -> Scenario:
    return Scenario(
        "wigner_stalkee",
        agents=[Agent("Friend", "friend"), Agent("Wigner", "superobserver")],
        registers=[Register("S"), Register("F", "friend-memory", "Friend")],
        events=[
            Event("prep", "prepare", 0, "lab",
                  state=StatePrep(("S",), name="plus")),
            Event("f-measure", "friend_measure", 1, "lab", agent="Friend",
                  systems=("S",), memories=("F",), basis="computational",
                  outcome="f"),
            Event("w-measure", "super_measure", 2, "lab", agent="Wigner",
                  systems=("S", "F"), basis="bell", outcome="w"),
        ])


def hardy() -> Scenario:
    """Two-wing Hardy-state test with basis choices but no friends."""
    events = [
        Event("prep", "prepare", 0, "left",
              state=StatePrep(("R", "S"), name="hardy")),
    ]
    for side, reg, setting, var in (("left", "R", "x", "a"),
                                    ("right", "S", "y", "b")):
        events.append(Event(f"{var}-comp", "super_measure", 1, side,
                            agent="Alice" if side == "left" else "Bob",
                            systems=(reg,), basis="computational",
                            guard=guard_of({setting: 0}), outcome=var))
        events.append(Event(f"{var}-pm", "super_measure", 1, side,
                            agent="Alice" if side == "left" else "Bob",
                            systems=(reg,), basis="plus_minus",
                            guard=guard_of({setting: 1}), outcome=var))
    return Scenario(
        "hardy",
        agents=[Agent("Alice", "superobserver"), Agent("Bob", "superobserver")],
        registers=[Register("R"), Register("S")],
        events=events,
        settings=[Setting("x", "Alice", "left"), Setting("y", "Bob", "right")],
        signal_delay=1000)


def brukner_lf() -> Scenario:
    """Hardy wings with friends; each superobserver either asks or undoes.

    When a setting is 0 the superobserver copies their friend's record
    (a classical read; the copied outcome plays no further role), and
    when it is 1 they undo the friend's measurement and measure the
    system in the complementary basis.  The two wings are treated as
    spacelike separated, hence the large signal delay.
    """
    events = [
        Event("prep", "prepare", 0, "left",
              state=StatePrep(("R", "S"), name="hardy")),
        Event("c-measure", "friend_measure", 1, "left", agent="Charlie",
              systems=("R",), memories=("C",), basis="computational",
              outcome="c"),
        Event("d-measure", "friend_measure", 1, "right", agent="Debbie",
              systems=("S",), memories=("D",), basis="computational",
              outcome="d"),
        Event("a-copy", "copy", 2, "left", agent="Alice", source="Charlie",
              guard=guard_of({"x": 0}), outcome="a"),
        Event("a-undo", "undo", 2, "left", agent="Alice", target="c-measure",
              guard=guard_of({"x": 1})),
        Event("a-measure", "super_measure", 3, "left", agent="Alice",
              systems=("R",), basis="plus_minus", guard=guard_of({"x": 1}),
              outcome="a"),
        Event("b-copy", "copy", 2, "right", agent="Bob", source="Debbie",
              guard=guard_of({"y": 0}), outcome="b"),
        Event("b-undo", "undo", 2, "right", agent="Bob", target="d-measure",
              guard=guard_of({"y": 1})),
        Event("b-measure", "super_measure", 3, "right", agent="Bob",
              systems=("S",), basis="plus_minus", guard=guard_of({"y": 1}),
              outcome="b"),
    ]
    return Scenario(
        "brukner_lf",
        agents=[Agent("Charlie", "friend"), Agent("Debbie", "friend"),
                Agent("Alice", "superobserver"), Agent("Bob", "superobserver")],
        registers=[Register("R"), Register("S"),
                   Register("C", "friend-memory", "Charlie"),
                   Register("D", "friend-memory", "Debbie")],
        events=events,
        settings=[Setting("x", "Alice", "left"), Setting("y", "Bob", "right")],
        signal_delay=1000)


def pusey_masanes_fr(undo_delays: tuple[int, int] = (10, 20),
                     name: str = "pusey_masanes_fr") -> Scenario:
    """Fixed-measurement Hardy scenario with staggered undo timing.

    undo_delays gives the (left, right) ticks of the two undo
    operations; the default leaves the left friend's record with the
    shorter lifetime, so the (c, b) pair is the inaccessible one.
    """
    left_undo, right_undo = undo_delays
    events = [
        Event("prep", "prepare", 0, "left",
              state=StatePrep(("R", "S"), name="hardy")),
        Event("c-measure", "friend_measure", 1, "left", agent="Charlie",
              systems=("R",), memories=("C",), basis="computational",
              outcome="c"),
        Event("d-measure", "friend_measure", 1, "right", agent="Debbie",
              systems=("S",), memories=("D",), basis="computational",
              outcome="d"),
        Event("a-undo", "undo", left_undo, "left", agent="Alice",
              target="c-measure"),
        Event("a-measure", "super_measure", left_undo + 1, "left",
              agent="Alice", systems=("R",), basis="plus_minus", outcome="a"),
        Event("b-undo", "undo", right_undo, "right", agent="Bob",
              target="d-measure"),
        Event("b-measure", "super_measure", right_undo + 1, "right",
              agent="Bob", systems=("S",), basis="plus_minus", outcome="b"),
    ]
    return Scenario(
        name,
        agents=[Agent("Charlie", "friend"), Agent("Debbie", "friend"),
                Agent("Alice", "superobserver"), Agent("Bob", "superobserver")],
        registers=[Register("R"), Register("S"),
                   Register("C", "friend-memory", "Charlie"),
                   Register("D", "friend-memory", "Debbie")],
        events=events,
        signal_delay=2)


def pusey_masanes_fr_mirrored() -> Scenario:
    return pusey_masanes_fr((20, 10), "pusey_masanes_fr_mirrored")


def gao(k: int, foliation: str = "debbie_first") -> Scenario:
    """k measure/undo cycles by Charlie on half a singlet; Debbie measures once.

    The k-th measurement is not undone, so its record survives and the
    (c_k, d) anti-correlation stays accessible.  The foliation fixes the
    global tick order of Debbie's single measurement relative to
    Charlie's cycles.
    """
    if k < 1:
        raise ValueError("need at least one measurement cycle")
    if foliation not in GAO_FOLIATIONS:
        raise ValueError(f"unknown foliation {foliation!r}")
    if k > 3:
        raise ValueError("at most three cycles are catalogued")
    events = [
        Event("prep", "prepare", 0, "left",
              state=StatePrep(("R", "S"), name="singlet")),
    ]
    tick = 2 if foliation == "debbie_first" else 1
    for i in range(1, k + 1):
        events.append(Event(f"c{i}-measure", "friend_measure", tick, "left",
                            agent="Charlie", systems=("R",), memories=("C",),
                            basis="computational", outcome=f"c{i}"))
        tick += 1
        if i < k:
            events.append(Event(f"c{i}-undo", "undo", tick, "left",
                                agent="Wigner", target=f"c{i}-measure"))
            tick += 1
    debbie_tick = 1 if foliation == "debbie_first" else tick
    events.append(Event("d-measure", "friend_measure", debbie_tick, "right",
                        agent="Debbie", systems=("S",), memories=("D",),
                        basis="computational", outcome="d"))
    return Scenario(
        f"gao({k}, {foliation})",
        agents=[Agent("Charlie", "friend"), Agent("Debbie", "friend"),
                Agent("Wigner", "superobserver")],
        registers=[Register("R"), Register("S"),
                   Register("C", "friend-memory", "Charlie"),
                   Register("D", "friend-memory", "Debbie")],
        events=events,
        signal_delay=1000)


def guerin_modified(prepared: str = "plus") -> Scenario:
    """One friend measures the same qubit twice, with the first measurement
    undone in between: computational basis first, complementary basis second."""
    return Scenario(
        "guerin_modified",
        agents=[Agent("Friend", "friend"), Agent("Wigner", "superobserver")],
        registers=[Register("S"), Register("F", "friend-memory", "Friend")],
        events=[
            Event("prep", "prepare", 0, "lab",
                  state=StatePrep(("S",), name=prepared)),
            Event("m1", "friend_measure", 1, "lab", agent="Friend",
                  systems=("S",), memories=("F",), basis="computational",
                  outcome="f1"),
            Event("w-undo", "undo", 2, "lab", agent="Wigner", target="m1"),
            Event("m2", "friend_measure", 3, "lab", agent="Friend",
                  systems=("S",), memories=("F",), basis="plus_minus",
                  outcome="f2"),
        ])


def guerin_original(prepared: str = "plus") -> Scenario:
    """Friend measures once; the superobserver then measures friend plus
    system jointly in an entangled basis (modeled as a dilation onto two
    memory qubits), and the friend's record is read again afterwards."""
    return Scenario(
        "guerin_original",
        agents=[Agent("Friend", "friend"), Agent("Wigner", "superobserver")],
        registers=[Register("S"), Register("F", "friend-memory", "Friend"),
                   Register("W0", "friend-memory", "Wigner"),
                   Register("W1", "friend-memory", "Wigner")],
        events=[
            Event("prep", "prepare", 0, "lab",
                  state=StatePrep(("S",), name=prepared)),
            Event("m1", "friend_measure", 1, "lab", agent="Friend",
                  systems=("S",), memories=("F",), basis="computational",
                  outcome="f1"),
            Event("w-measure", "friend_measure", 2, "lab", agent="Wigner",
                  systems=("S", "F"), memories=("W0", "W1"), basis="bell",
                  outcome="w"),
            Event("f2-read", "copy", 3, "lab", agent="Friend", source="Friend",
                  outcome="f2"),
        ])


_BUILDERS = {
    "wigner_friend": wigner_friend,
    "wigner_enemy": wigner_enemy,
    "wigner_stalkee": wigner_stalkee,
    "hardy": hardy,
    "brukner_lf": brukner_lf,
    "pusey_masanes_fr": pusey_masanes_fr,
    "pusey_masanes_fr_mirrored": pusey_masanes_fr_mirrored,
    "guerin_modified": guerin_modified,
    "guerin_original": guerin_original,
}

_GAO_PATTERN = re.compile(r"gao\(\s*(\d+)\s*,\s*(\w+)\s*\)")


def catalogue() -> dict[str, Scenario]:
    """All built-in scenarios under their canonical names."""
    out = {name: build() for name, build in _BUILDERS.items()}
    for foliation in GAO_FOLIATIONS:
        s = gao(3, foliation)
        out[s.name] = s
    return out


def lookup(name: str) -> Scenario:
    """Fetch a built-in scenario by name; parses gao(k, foliation)."""
    key = name.strip()
    if key in _BUILDERS:
        return _BUILDERS[key]()
    match = _GAO_PATTERN.fullmatch(key)
    if match:
        k, foliation = int(match.group(1)), match.group(2)
        if foliation not in GAO_FOLIATIONS:
            raise UnknownScenarioError(f"unknown foliation {foliation!r}")
        return gao(k, foliation)
    raise UnknownScenarioError(f"unknown scenario {name!r}")
