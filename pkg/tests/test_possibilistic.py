from fractions import Fraction

import pytest

from ewflab import possibilistic as poss
from ewflab.scenario import CorrelationTable, event_distribution, lookup

PAIRS = [("c", "d"), ("c", "b"), ("a", "d"), ("a", "b")]


def fixed_measurement_tables():
    pm = lookup("pusey_masanes_fr")
    return [event_distribution(pm, variables=pair) for pair in PAIRS]


def undo_branch_tables():
    bl = lookup("brukner_lf")
    return [event_distribution(bl, {"x": 1, "y": 1}, pair) for pair in PAIRS]


def test_extracted_edges_and_supports():
    graph = poss.extract_implications(fixed_measurement_tables())
    rendered = {e.render() for e in graph.edges}
    assert {"d=1 => c=0", "c=1 => d=0",
            "c=0 => b=+", "b=- => c=1",
            "a=- => d=1", "d=0 => a=+"} == rendered
    assert len(graph.supports) == 13  # every strictly positive entry


def test_chain_contradiction_found():
    graph = poss.extract_implications(fixed_measurement_tables())
    report = poss.find_contradiction(graph)
    assert report is not None
    assert [e.render() for e in report.chain] == [
        "a=- => d=1", "d=1 => c=0", "c=0 => b=+"]
    assert report.support.variables == ("a", "b")
    assert report.support.values == ("-", "-")
    assert report.support.probability == Fraction(1, 12)


def test_undo_branch_tables_give_the_same_chain():
    graph = poss.extract_implications(undo_branch_tables())
    report = poss.find_contradiction(graph)
    assert report is not None
    assert len(report.chain) == 3
    assert report.chain[0].settings == (("x", 1), ("y", 1))


def test_no_chain_without_the_friend_super_cross_zero():
    tables = [t for t in fixed_measurement_tables()
              if tuple(t.variables) != ("c", "b")]
    graph = poss.extract_implications(tables)
    assert poss.find_contradiction(graph) is None


def test_empty_graph_has_no_contradiction():
    uniform = CorrelationTable(
        ("u", "v"), {"u": ("0", "1"), "v": ("0", "1")},
        {(a, b): Fraction(1, 4) for a in "01" for b in "01"})
    graph = poss.extract_implications([uniform])
    assert graph.edges == []
    assert poss.find_contradiction(graph) is None


def test_soundness_every_chain_edge_is_an_exact_zero():
    tables = fixed_measurement_tables()
    graph = poss.extract_implications(tables)
    report = poss.find_contradiction(graph)
    by_vars = {tuple(t.variables): t for t in tables}
    for edge in report.chain:
        table = by_vars[edge.source_variables]
        assert table.prob(edge.source_zero) == Fraction(0)


def test_monotonicity_extra_zeros_keep_the_contradiction():
    tables = fixed_measurement_tables()
    extra = CorrelationTable(
        ("c", "a"), {"c": ("0", "1"), "a": ("+", "-")},
        {("0", "+"): Fraction(1, 2), ("0", "-"): Fraction(0),
         ("1", "+"): Fraction(0), ("1", "-"): Fraction(1, 2)})
    graph = poss.extract_implications(tables + [extra])
    assert poss.find_contradiction(graph) is not None


def test_rejects_inexact_tables():
    inexact = CorrelationTable(
        ("u", "v"), {"u": ("0", "1"), "v": ("0", "1")},
        {("0", "0"): 0.3141592653589, ("0", "1"): Fraction(0),
         ("1", "0"): Fraction(0),
         ("1", "1"): 1 - 0.3141592653589})
    with pytest.raises(poss.InexactTableError):
        poss.extract_implications([inexact])


def test_rejects_non_binary_variables():
    table = event_distribution(lookup("wigner_stalkee"), variables=("f", "w"))
    with pytest.raises(poss.NonBinaryVariableError):
        poss.extract_implications([table])


def test_markdown_report_layout():
    graph = poss.extract_implications(fixed_measurement_tables())
    text = poss.find_contradiction(graph).to_markdown()
    lines = text.splitlines()
    assert lines[0].startswith("| step ")
    assert "a=- => d=1" in lines[2]
    assert "Contradiction:" in lines[-1]


# ---------------------------------------------------------------------------
# exhaustive enumeration


def hardy_constraints():
    zeros = [
        poss.ZeroConstraint("A0", "1", "B0", "1"),
        poss.ZeroConstraint("A0", "0", "B1", "-"),
        poss.ZeroConstraint("A1", "-", "B0", "0"),
    ]
    support = poss.SupportConstraint("A1", "-", "B1", "-")
    return zeros + [support]


OUTCOMES = {"A0": ("0", "1"), "A1": ("+", "-"),
            "B0": ("0", "1"), "B1": ("+", "-")}


def test_hardy_constraints_are_unsatisfiable():
    assert poss.enumerate_value_assignments(hardy_constraints(), OUTCOMES) == []


def test_no_constraints_gives_all_sixteen():
    assert len(poss.enumerate_value_assignments([], OUTCOMES)) == 16


def test_deterministic_behavior_filters_to_its_point():
    # zeros of the deterministic local point A0=0, A1=+, B0=0, B1=+
    zeros = []
    choice = {"A0": "0", "A1": "+", "B0": "0", "B1": "+"}
    for avar, bvar in (("A0", "B0"), ("A0", "B1"), ("A1", "B0"), ("A1", "B1")):
        for aval in OUTCOMES[avar]:
            for bval in OUTCOMES[bvar]:
                if (aval, bval) != (choice[avar], choice[bvar]):
                    zeros.append(poss.ZeroConstraint(avar, aval, bvar, bval))
    result = poss.enumerate_value_assignments(zeros, OUTCOMES)
    assert result == [choice]


def test_chain_agrees_with_enumeration_on_the_builtin_graph():
    graph = poss.extract_implications(fixed_measurement_tables())
    outcomes = {v: graph.outcomes[v] for v in ("a", "d", "c", "b")}
    found = poss.find_contradiction(graph)
    contradicted = []
    for support in graph.supports:
        constraints = poss.graph_constraints(graph, support)
        if not poss.enumerate_value_assignments(constraints, outcomes):
            contradicted.append(support)
    assert (found is not None) == bool(contradicted)
    assert found.support in contradicted
