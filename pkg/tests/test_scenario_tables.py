import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from ewflab import qcore
from ewflab.qcore import Register
from ewflab.scenario import (
    Agent,
    Behavior,
    Event,
    Scenario,
    ScenarioError,
    Setting,
    StatePrep,
    UnrealizedVariableError,
    compile_circuit,
    deterministic_local_behavior,
    event_distribution,
    guard_of,
    local_agency_checks,
    lookup,
    pr_box,
    simulate_final_state,
    stalkee_predictions,
    tracking_check,
)
from ewflab.scenario import NoCopyEventError

S2 = 1 / math.sqrt(2)
S3 = 1 / math.sqrt(3)

# ---------------------------------------------------------------------------
# Independent oracle: raw-numpy sequential-projection circuit for the
# fixed-measurement scenario on registers (R, S, C, D).  Built from
# explicit Kronecker products, no ewflab machinery.

COMP = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
PM = [np.full((2, 2), 0.5), np.array([[0.5, -0.5], [-0.5, 0.5]])]
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
                dtype=float)
I2 = np.eye(2)


def embed4(mat2, pos):
    ops = [I2] * 4
    ops[pos] = mat2
    out = ops[0]
    for m in ops[1:]:
        out = np.kron(out, m)
    return out


def cnot_rc():
    # control R (qubit 0), target C (qubit 2)
    out = np.zeros((16, 16))
    for idx in range(16):
        r, s, c, d = (idx >> 3) & 1, (idx >> 2) & 1, (idx >> 1) & 1, idx & 1
        j = (r << 3) | (s << 2) | ((c ^ r) << 1) | d
        out[j, idx] = 1.0
    return out


def cnot_sd():
    out = np.zeros((16, 16))
    for idx in range(16):
        r, s, c, d = (idx >> 3) & 1, (idx >> 2) & 1, (idx >> 1) & 1, idx & 1
        j = (r << 3) | (s << 2) | (c << 1) | (d ^ s)
        out[j, idx] = 1.0
    return out


def oracle_fixed_measurement_pair(chosen):
    """p(assignment) for the staggered fixed-measurement circuit.

    chosen maps variable names among c, d, a, b to outcome indices; the
    projector for each chosen variable is inserted at its position in
    the sequence CNOT(R->C), [c], CNOT(S->D), [d], CNOT(R->C)^T,
    CNOT(S->D)^T, [a], [b].
    """
    hardy = np.array([S3, S3, S3, 0.0])
    vec = np.kron(np.kron(hardy, [1.0, 0.0]), [1.0, 0.0])  # R,S,C,D
    vec = cnot_rc() @ vec
    if "c" in chosen:
        vec = embed4(COMP[chosen["c"]], 2) @ vec
    vec = cnot_sd() @ vec
    if "d" in chosen:
        vec = embed4(COMP[chosen["d"]], 3) @ vec
    vec = cnot_rc().T @ vec
    vec = cnot_sd().T @ vec
    if "a" in chosen:
        vec = embed4(PM[chosen["a"]], 0) @ vec
    if "b" in chosen:
        vec = embed4(PM[chosen["b"]], 1) @ vec
    return float(np.vdot(vec, vec).real)


LABELS = {"c": ("0", "1"), "d": ("0", "1"), "a": ("+", "-"), "b": ("+", "-")}

FROZEN_TABLES = {
    ("c", "d"): {("0", "0"): Fraction(1, 3), ("0", "1"): Fraction(1, 3),
                 ("1", "0"): Fraction(1, 3), ("1", "1"): Fraction(0)},
    ("c", "b"): {("0", "+"): Fraction(2, 3), ("0", "-"): Fraction(0),
                 ("1", "+"): Fraction(1, 6), ("1", "-"): Fraction(1, 6)},
    ("a", "d"): {("+", "0"): Fraction(2, 3), ("+", "1"): Fraction(1, 6),
                 ("-", "0"): Fraction(0), ("-", "1"): Fraction(1, 6)},
    ("a", "b"): {("+", "+"): Fraction(3, 4), ("+", "-"): Fraction(1, 12),
                 ("-", "+"): Fraction(1, 12), ("-", "-"): Fraction(1, 12)},
}


def test_oracle_agrees_with_frozen_tables():
    for pair, table in FROZEN_TABLES.items():
        for values, expected in table.items():
            chosen = {v: LABELS[v].index(val) for v, val in zip(pair, values)}
            assert oracle_fixed_measurement_pair(chosen) == pytest.approx(
                float(expected), abs=1e-12), (pair, values)


def test_fixed_measurement_tables_match_oracle_and_are_exact():
    pm = lookup("pusey_masanes_fr")
    for pair, frozen in FROZEN_TABLES.items():
        table = event_distribution(pm, variables=pair)
        assert table.is_exact
        for values, expected in frozen.items():
            assert table.prob(values) == expected


def test_three_variable_joint_matches_oracle():
    pm = lookup("pusey_masanes_fr")
    table = event_distribution(pm, variables=("c", "d", "b"))
    for values in table.assignments():
        chosen = {v: LABELS[v].index(val) for v, val in zip(("c", "d", "b"), values)}
        assert float(table.prob(values)) == pytest.approx(
            oracle_fixed_measurement_pair(chosen), abs=1e-12)


def test_marginal_consistency_summing_out_later_variable():
    pm = lookup("pusey_masanes_fr")
    joint = event_distribution(pm, variables=("c", "b"))
    single = event_distribution(pm, variables=("c",))
    assert joint.marginal(("c",)).equal_entries(single)
    triple = event_distribution(pm, variables=("c", "d", "b"))
    assert triple.marginal(("c", "d")).equal_entries(
        event_distribution(pm, variables=("c", "d")))


# ---------------------------------------------------------------------------
# Hardy tables (no friends)

HARDY_ZEROS = {(0, 0): ("1", "1"), (0, 1): ("0", "-"), (1, 0): ("-", "0")}


def test_hardy_zero_entries_exact():
    h = lookup("hardy")
    for (x, y), key in HARDY_ZEROS.items():
        table = event_distribution(h, {"x": x, "y": y}, ("a", "b"))
        assert table.prob(key) == Fraction(0)


def test_hardy_support_value():
    h = lookup("hardy")
    table = event_distribution(h, {"x": 1, "y": 1}, ("a", "b"))
    assert table.prob(("-", "-")) == Fraction(1, 12)
    # brute-force Born oracle for the same entry
    minus = np.array([S2, -S2])
    hardy = np.array([S3, S3, S3, 0.0])
    oracle = abs(np.vdot(np.kron(minus, minus), hardy)) ** 2
    assert float(table.prob(("-", "-"))) == pytest.approx(oracle, abs=1e-12)


def test_hardy_behavior_is_nonsignaling():
    beh = Behavior.from_scenario(lookup("hardy"))
    assert beh.no_signaling_violation() <= 1e-12


def test_signaling_behavior_is_flagged():
    entries = {}
    labels = {}
    for x, y in itertools.product((0, 1), repeat=2):
        # b's marginal depends on x: blatant signaling
        p = Fraction(1) if x == 0 else Fraction(1, 2)
        table = {("0", "0"): p, ("0", "1"): 1 - p,
                 ("1", "0"): Fraction(0), ("1", "1"): Fraction(0)}
        entries[(x, y)] = table
        labels[(x, y)] = (("0", "1"), ("0", "1"))
    beh = Behavior.from_entries(entries, labels)
    assert beh.no_signaling_violation() == pytest.approx(0.5)


def test_deterministic_and_pr_box_builders():
    det = deterministic_local_behavior("0", "+", "0", "+")
    assert det.prob(0, 0, "0", "0") == Fraction(1)
    assert det.prob(1, 1, "+", "+") == Fraction(1)
    box = pr_box()
    for x, y in itertools.product((0, 1), repeat=2):
        for a, b in itertools.product("01", repeat=2):
            expected = Fraction(1, 2) if (int(a) ^ int(b)) == x * y else Fraction(0)
            assert box.prob(x, y, a, b) == expected


# ---------------------------------------------------------------------------
# setting-marginal invariance and tracking


def test_local_agency_invariance_checks_pass():
    checks = local_agency_checks(lookup("brukner_lf"))
    assert len(checks) == 3
    assert all(c.passed for c in checks)


def test_undo_branch_zeros_match_fixed_measurement_tables():
    bl = lookup("brukner_lf")
    both_undo = {"x": 1, "y": 1}
    assert event_distribution(bl, both_undo, ("c", "d")).prob(("1", "1")) == 0
    assert event_distribution(bl, both_undo, ("c", "b")).prob(("0", "-")) == 0
    assert event_distribution(bl, both_undo, ("a", "d")).prob(("-", "0")) == 0
    support = event_distribution(bl, both_undo, ("a", "b")).prob(("-", "-"))
    assert support == Fraction(1, 12)


def test_tracking_holds_by_construction():
    bl = lookup("brukner_lf")
    assert tracking_check(bl, "a")
    assert tracking_check(bl, "b")
    table = event_distribution(bl, {"x": 0, "y": 0}, ("c", "a"))
    for c_val, a_val in table.assignments():
        if c_val != a_val:
            assert table.prob((c_val, a_val)) == Fraction(0)
    assert table.prob(("0", "0")) == Fraction(2, 3)
    assert table.prob(("1", "1")) == Fraction(1, 3)


def test_tracking_requires_a_copy_event():
    with pytest.raises(NoCopyEventError):
        tracking_check(lookup("pusey_masanes_fr"), "a")


def test_unitary_copies_preserve_tracking():
    bl = lookup("brukner_lf")
    registers = list(bl.registers) + [
        Register("AM", "friend-memory", "Alice"),
        Register("BM", "friend-memory", "Bob"),
    ]
    events = []
    for e in bl.events:
        if e.kind == "copy":
            dest = "AM" if e.agent == "Alice" else "BM"
            events.append(Event(e.id, e.kind, e.tick, e.site, agent=e.agent,
                                source=e.source, memory=dest, guard=e.guard,
                                outcome=e.outcome))
        else:
            events.append(e)
    unitary = Scenario("brukner_lf_unitary_copy", bl.agents, registers,
                       events, bl.settings, bl.signal_delay)
    table = event_distribution(unitary, {"x": 0, "y": 0}, ("c", "a"),
                               copy_mode="unitary")
    for c_val, a_val in table.assignments():
        if c_val != a_val:
            assert table.prob((c_val, a_val)) == 0


# ---------------------------------------------------------------------------
# predictions split across perspectives


def test_stalkee_predictions_default():
    assert stalkee_predictions() == (Fraction(1), Fraction(1, 2))


def test_stalkee_predictions_collapsed_input():
    assert stalkee_predictions(qcore.zero_state("S")) == \
        (Fraction(1, 2), Fraction(1, 2))
    assert stalkee_predictions(qcore.one_state("S")) == \
        (Fraction(1, 2), Fraction(1, 2))


# ---------------------------------------------------------------------------
# compilation


def test_enemy_compiles_to_gate_and_inverse():
    we = lookup("wigner_enemy")
    program = compile_circuit(we)
    unitaries = program.unitaries()
    assert len(unitaries) == 2
    np.testing.assert_allclose(unitaries[1], unitaries[0].conj().T, atol=1e-12)
    np.testing.assert_allclose(program.net_unitary(), np.eye(4), atol=1e-12)


def test_enemy_restores_the_prepared_state():
    we = lookup("wigner_enemy")
    program = compile_circuit(we)
    final = simulate_final_state(we)
    np.testing.assert_allclose(final, program.initial, atol=1e-12)


def test_compiled_circuits_preserve_norm():
    for name in ("wigner_friend", "wigner_enemy", "wigner_stalkee",
                 "pusey_masanes_fr", "guerin_modified", "guerin_original",
                 "gao(2, debbie_first)"):
        scenario = lookup(name)
        for assignment in scenario.setting_assignments():
            final = simulate_final_state(scenario, assignment)
            assert np.vdot(final, final).real == pytest.approx(1.0, abs=1e-12)


def test_brukner_compile_order_measures_undos_then_effects():
    bl = lookup("brukner_lf")
    program = compile_circuit(bl, {"x": 1, "y": 1})
    unitary_events = [s.event.kind for s in program.steps
                      if hasattr(s, "matrix")]
    assert unitary_events == ["friend_measure", "friend_measure",
                              "undo", "undo"]
    terminal = [s.event.kind for s in program.steps
                if not hasattr(s, "matrix")][-2:]
    assert terminal == ["super_measure", "super_measure"]


def test_guerin_modified_gate_by_gate():
    program = compile_circuit(lookup("guerin_modified"))
    unitaries = program.unitaries()
    assert len(unitaries) == 3
    cnot = CNOT
    h = np.array([[S2, S2], [S2, -S2]])
    np.testing.assert_allclose(unitaries[0], cnot, atol=1e-12)
    np.testing.assert_allclose(unitaries[1], cnot.T, atol=1e-12)
    # complementary-basis dilation = (H x I) CNOT (H x I)
    np.testing.assert_allclose(
        unitaries[2], np.kron(h, I2) @ cnot @ np.kron(h, I2), atol=1e-12)


def test_memory_reuse_before_undo_is_rejected():
    events = [
        Event("prep", "prepare", 0, "lab", state=StatePrep(("S",), name="plus")),
        Event("m1", "friend_measure", 1, "lab", agent="F", systems=("S",),
              memories=("M",), basis="computational", outcome="f1"),
        Event("m2", "friend_measure", 2, "lab", agent="F", systems=("S",),
              memories=("M",), basis="plus_minus", outcome="f2"),
        Event("undo1", "undo", 3, "lab", agent="W", target="m1"),
    ]
    scenario = Scenario(
        "reuse", [Agent("F", "friend"), Agent("W", "superobserver")],
        [Register("S"), Register("M", "friend-memory", "F")], events)
    with pytest.raises(ScenarioError, match="reused"):
        compile_circuit(scenario)


def test_unrealized_variable_is_an_error_not_zero():
    events = [
        Event("prep", "prepare", 0, "lab", state=StatePrep(("S",), name="plus")),
        Event("m", "super_measure", 1, "lab", agent="W", systems=("S",),
              basis="plus_minus", guard=guard_of({"x": 1}), outcome="a"),
    ]
    scenario = Scenario("guarded", [Agent("W", "superobserver")],
                        [Register("S")], events,
                        [Setting("x", "W", "lab")])
    with pytest.raises(UnrealizedVariableError):
        event_distribution(scenario, {"x": 0}, ("a",))


def test_two_time_equals_parallel_born_for_same_tick_effects():
    events = [
        Event("prep", "prepare", 0, "left",
              state=StatePrep(("R", "S"), name="hardy")),
        Event("ma", "super_measure", 1, "left", agent="A", systems=("R",),
              basis="plus_minus", outcome="a"),
        Event("mb", "super_measure", 1, "right", agent="B", systems=("S",),
              basis="plus_minus", outcome="b"),
    ]
    scenario = Scenario("parallel", [Agent("A", "superobserver"),
                                     Agent("B", "superobserver")],
                        [Register("R"), Register("S")], events)
    table = event_distribution(scenario, variables=("a", "b"))
    minus = np.array([S2, -S2])
    eff_a = qcore.Effect(np.outer(minus, minus), (Register("R"),))
    eff_b = qcore.Effect(np.outer(minus, minus), (Register("S"),))
    parallel = qcore.born_probability(qcore.hardy_state("R", "S"), [eff_a, eff_b])
    assert float(table.prob(("-", "-"))) == pytest.approx(parallel, abs=1e-12)


def test_catalogue_lookup_errors():
    from ewflab.scenario import UnknownScenarioError
    with pytest.raises(UnknownScenarioError):
        lookup("unknown")
    with pytest.raises(UnknownScenarioError):
        lookup("gao(2, sideways)")


def test_catalogue_contents():
    from ewflab.scenario import catalogue
    names = set(catalogue())
    assert {"wigner_friend", "wigner_enemy", "wigner_stalkee", "hardy",
            "brukner_lf", "pusey_masanes_fr", "pusey_masanes_fr_mirrored",
            "guerin_modified", "guerin_original",
            "gao(3, debbie_first)", "gao(3, debbie_last)"} <= names


def test_stalkee_scenario_superobserver_sees_entangled_outcome():
    table = event_distribution(lookup("wigner_stalkee"), variables=("w",))
    assert table.prob(("phi+",)) == Fraction(1)
