"""Possibilistic reasoning: implication chains from zero-probability entries.

The shared skeleton of the Hardy-style arguments: every exactly-zero
entry p(u=alpha, v=beta) = 0 of a pairwise table licenses the two
implications u=alpha -> v=not beta and v=beta -> u=not alpha; chaining
them transitively against a strictly positive support entry yields a
contradiction.  Implications are extracted only from snapped-rational
zeros, never from merely small floats.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

from ewflab.scenario.engine import CorrelationTable

Literal = tuple[str, str]  # (variable, value)


class InexactTableError(ValueError):
    """A source table still contains unsnapped float probabilities."""


class NonBinaryVariableError(ValueError):
    """Implication extraction requires two-outcome variables."""


@dataclass(frozen=True)
class Edge:
    """antecedent -> consequent, justified by one exact zero entry."""

    antecedent: Literal
    consequent: Literal
    source_variables: tuple[str, str]
    source_zero: tuple[str, str]
    settings: tuple[tuple[str, int], ...] = ()

    def render(self) -> str:
        a, c = self.antecedent, self.consequent
        return f"{a[0]}={a[1]} => {c[0]}={c[1]}"


@dataclass(frozen=True)
class SupportFact:
    """A joint assignment with strictly positive probability."""

    variables: tuple[str, str]
    values: tuple[str, str]
    probability: "Fraction | float"

    def literals(self) -> tuple[Literal, Literal]:
        return ((self.variables[0], self.values[0]),
                (self.variables[1], self.values[1]))


class ImplicationGraph:
    """Directed implications between (variable, value) literals."""

    def __init__(self):
        self.edges: list[Edge] = []
        self.supports: list[SupportFact] = []
        self.outcomes: dict[str, tuple[str, str]] = {}

    def negate(self, literal: Literal) -> Literal:
        var, value = literal
        pair = self.outcomes[var]
        return (var, pair[1] if value == pair[0] else pair[0])

    def successors(self, literal: Literal) -> list[Edge]:
        out = [e for e in self.edges if e.antecedent == literal]
        return sorted(out, key=lambda e: (e.consequent[0], e.consequent[1]))

    def add_edge(self, edge: Edge) -> None:
        if edge not in self.edges:
            self.edges.append(edge)

    def __repr__(self):
        return f"ImplicationGraph({len(self.edges)} edges, {len(self.supports)} supports)"


def extract_implications(tables: Sequence[CorrelationTable]) -> ImplicationGraph:
    """Build the implication graph from a list of pairwise tables.

    Every table must be over exactly two binary variables with all
    entries snapped to exact rationals.
    """
    graph = ImplicationGraph()
    for table in tables:
        if len(table.variables) != 2:
            raise NonBinaryVariableError(
                f"expected a pairwise table, got variables {table.variables}")
        for v in table.variables:
            labels = table.labels[v]
            if len(labels) != 2:
                raise NonBinaryVariableError(
                    f"variable {v!r} has outcomes {labels}, need exactly two")
            known = graph.outcomes.get(v)
            if known is not None and known != tuple(labels):
                raise NonBinaryVariableError(
                    f"variable {v!r} appears with conflicting outcome labels")
            graph.outcomes[v] = tuple(labels)
        if not table.is_exact:
            raise InexactTableError(
                f"table over {table.variables} has unsnapped entries")
        u, v = table.variables
        settings = tuple(sorted(table.settings.items()))
        for alpha, beta in table.assignments():
            p = table.prob((alpha, beta))
            if p == 0:
                graph.add_edge(Edge((u, alpha), graph.negate((v, beta)),
                                    (u, v), (alpha, beta), settings))
                graph.add_edge(Edge((v, beta), graph.negate((u, alpha)),
                                    (u, v), (alpha, beta), settings))
            else:
                graph.supports.append(SupportFact((u, v), (alpha, beta), p))
    return graph


@dataclass(frozen=True)
class ContradictionReport:
    """A chain of implications refuting one of the graph's support facts."""

    chain: tuple[Edge, ...]
    support: SupportFact
    derived: Literal  # conclusion of the chain, negating the support

    def render(self) -> str:
        start = self.chain[0].antecedent
        parts = [f"{start[0]}={start[1]}"]
        for edge in self.chain:
            parts.append(f"{edge.consequent[0]}={edge.consequent[1]}")
        chain_text = " => ".join(parts)
        (u, uv), (w, wv) = self.support.literals()
        return (f"{chain_text}, yet p({u}={uv}, {w}={wv}) = "
                f"{self.support.probability} > 0")

    def to_markdown(self) -> str:
        lines = [
            "| step | implication | from zero entry |",
            "| --- | --- | --- |",
        ]
        for i, edge in enumerate(self.chain, 1):
            u, v = edge.source_variables
            alpha, beta = edge.source_zero
            cond = ""
            if edge.settings:
                cond = " given " + ",".join(f"{k}={val}" for k, val in edge.settings)
            lines.append(f"| {i} | {edge.render()} | "
                         f"p({u}={alpha}, {v}={beta}{cond}) = 0 |")
        lines.append("")
        lines.append(f"Contradiction: {self.render()}")
        return "\n".join(lines)


def find_contradiction(graph: ImplicationGraph) -> ContradictionReport | None:
    """Breadth-first chain search from each support fact.

    For a support on (u=alpha, v=beta), a chain from one literal to the
    negation of the other is a contradiction.  Ties are broken by edge
    order sorted lexicographically, so the result is deterministic.
    """
    for support in graph.supports:
        lits = support.literals()
        for start, other in (lits, lits[::-1]):
            target = graph.negate(other)
            chain = _bfs_chain(graph, start, target)
            if chain is not None:
                return ContradictionReport(tuple(chain), support, target)
    return None


def _bfs_chain(graph: ImplicationGraph, start: Literal,
               target: Literal) -> list[Edge] | None:
    parent: dict[Literal, Edge] = {}
    seen = {start}
    queue = deque([start])
    while queue:
        lit = queue.popleft()
        for edge in graph.successors(lit):
            nxt = edge.consequent
            if nxt in seen:
                continue
            parent[nxt] = edge
            if nxt == target:
                chain = [edge]
                while chain[0].antecedent != start:
                    chain.insert(0, parent[chain[0].antecedent])
                return chain
            seen.add(nxt)
            queue.append(nxt)
    return None


# ---------------------------------------------------------------------------
# exhaustive value-assignment enumeration


@dataclass(frozen=True)
class ZeroConstraint:
    """The joint assignment (var1=val1, var2=val2) never occurs."""

    var1: str
    val1: str
    var2: str
    val2: str


@dataclass(frozen=True)
class SupportConstraint:
    """The joint assignment (var1=val1, var2=val2) does occur."""

    var1: str
    val1: str
    var2: str
    val2: str


def enumerate_value_assignments(
        constraints: Iterable[ZeroConstraint | SupportConstraint],
        outcomes: Mapping[str, Sequence[str]]) -> list[dict[str, str]]:
    """All assignments of the given variables consistent with the constraints.

    Zero constraints exclude assignments; support constraints must be
    matched by the assignment (the support event must be realizable).
    The 2^n exhaustive sweep is the independent oracle against which the
    chain search is checked.
    """
    names = list(outcomes.keys())
    satisfying = []
    for combo in product(*(outcomes[n] for n in names)):
        assignment = dict(zip(names, combo))
        ok = True
        for c in constraints:
            hit = assignment[c.var1] == c.val1 and assignment[c.var2] == c.val2
            if isinstance(c, ZeroConstraint) and hit:
                ok = False
                break
            if isinstance(c, SupportConstraint) and not hit:
                ok = False
                break
        if ok:
            satisfying.append(assignment)
    return satisfying


def graph_constraints(graph: ImplicationGraph,
                      support: SupportFact | None = None):
    """Zero/support constraints equivalent to the graph's source entries."""
    zeros = []
    seen = set()
    for edge in graph.edges:
        u, v = edge.source_variables
        alpha, beta = edge.source_zero
        key = (u, alpha, v, beta)
        if key not in seen:
            seen.add(key)
            zeros.append(ZeroConstraint(u, alpha, v, beta))
    out: list[ZeroConstraint | SupportConstraint] = list(zeros)
    if support is not None:
        (u, uv), (w, wv) = support.literals()
        out.append(SupportConstraint(u, uv, w, wv))
    return out
