"""Joint-distribution marginal problems as exact LPs.

Two instances of the same question "does a joint distribution with the
given marginals exist":

  pairwise_marginal_feasibility  a joint law over all four outcomes of
      the fixed-measurement scenario matching specified pairwise laws;
      infeasibility is the no-go, and feasibility after dropping one law
      produces the explicit counter-model whose omitted marginal breaks
      the Born table.

  fine_membership  a joint law over the four single-context value
      assignments of a two-setting/two-outcome behavior matching all
      four context marginals; infeasibility means the behavior lies
      outside the local polytope.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from ewflab.feasibility.simplex import (
    FeasibilityResult,
    LinearProgram,
    lp_feasible,
)
from ewflab.scenario.engine import Behavior, CorrelationTable, event_distribution
from ewflab.scenario.model import Scenario


class MalformedTargetError(ValueError):
    """A target marginal is not an exact normalized distribution."""


@dataclass(frozen=True)
class PairTarget:
    pair: tuple[str, str]
    distribution: tuple[tuple[tuple[str, str], Fraction], ...]

    @classmethod
    def build(cls, pair: tuple[str, str],
              distribution: Mapping[tuple[str, str], object]) -> "PairTarget":
        entries = []
        total = Fraction(0)
        for key, p in distribution.items():
            if not isinstance(p, Fraction):
                raise MalformedTargetError(
                    f"target for {pair} has inexact entry {p!r}")
            if p < 0:
                raise MalformedTargetError(f"target for {pair} has negative entry")
            entries.append((tuple(key), p))
            total += p
        if total != 1:
            raise MalformedTargetError(f"target for {pair} sums to {total}, not 1")
        return cls(tuple(pair), tuple(sorted(entries)))

    def prob(self, key: tuple[str, str]) -> Fraction:
        for k, p in self.distribution:
            if k == key:
                return p
        return Fraction(0)

    @classmethod
    def from_table(cls, table: CorrelationTable) -> "PairTarget":
        if len(table.variables) != 2:
            raise MalformedTargetError("pair target needs a two-variable table")
        if not table.is_exact:
            raise MalformedTargetError(
                f"table over {table.variables} has unsnapped entries")
        return cls.build(tuple(table.variables),
                         {a: table.prob(a) for a in table.assignments()})


@dataclass(frozen=True)
class MarginalSpec:
    """Joint variables with outcome labels and pairwise marginal targets."""

    variables: tuple[str, ...]
    outcomes: tuple[tuple[str, tuple[str, ...]], ...]
    targets: tuple[PairTarget, ...]

    @classmethod
    def build(cls, outcomes: Mapping[str, Sequence[str]],
              targets: Sequence[PairTarget]) -> "MarginalSpec":
        return cls(tuple(outcomes.keys()),
                   tuple((v, tuple(labels)) for v, labels in outcomes.items()),
                   tuple(targets))

    def labels(self, variable: str) -> tuple[str, ...]:
        for v, labels in self.outcomes:
            if v == variable:
                return labels
        raise KeyError(variable)

    def joint_assignments(self) -> list[tuple[str, ...]]:
        return list(itertools.product(*(self.labels(v) for v in self.variables)))


def _joint_var(assignment: tuple[str, ...]) -> str:
    return "q[" + ",".join(assignment) + "]"


@dataclass(frozen=True)
class MarginalFeasibility:
    """LP outcome plus the joint witness in assignment form."""

    spec: MarginalSpec
    lp: LinearProgram
    result: FeasibilityResult
    joint: "dict[tuple[str, ...], Fraction] | None"

    @property
    def feasible(self) -> bool:
        return self.result.feasible

    def __bool__(self):
        return self.feasible

    def witness_marginal(self, pair: tuple[str, str]) -> dict[tuple[str, str], Fraction]:
        if self.joint is None:
            raise ValueError("no witness on an infeasible problem")
        i = self.spec.variables.index(pair[0])
        j = self.spec.variables.index(pair[1])
        out: dict[tuple[str, str], Fraction] = {}
        for assignment, p in self.joint.items():
            key = (assignment[i], assignment[j])
            out[key] = out.get(key, Fraction(0)) + p
        return out

    def verify(self) -> bool:
        return self.result.verify(self.lp)


def pairwise_marginal_feasibility(spec: MarginalSpec) -> MarginalFeasibility:
    """Does a joint distribution with the specified pairwise marginals exist?"""
    assignments = spec.joint_assignments()
    lp = LinearProgram([_joint_var(a) for a in assignments])
    lp.add({_joint_var(a): Fraction(1) for a in assignments}, "==", Fraction(1))
    for target in spec.targets:
        i = spec.variables.index(target.pair[0])
        j = spec.variables.index(target.pair[1])
        for vi in spec.labels(target.pair[0]):
            for vj in spec.labels(target.pair[1]):
                coeffs = {_joint_var(a): Fraction(1) for a in assignments
                          if a[i] == vi and a[j] == vj}
                lp.add(coeffs, "==", target.prob((vi, vj)))
    result = lp_feasible(lp)
    joint = None
    if result.feasible:
        joint = {a: result.witness[_joint_var(a)] for a in assignments}
    return MarginalFeasibility(spec, lp, result, joint)


def scenario_pair_tables(scenario: Scenario,
                         pairs: Sequence[tuple[str, str]],
                         settings=None) -> list[CorrelationTable]:
    return [event_distribution(scenario, settings, pair) for pair in pairs]


def scenario_marginal_spec(scenario: Scenario,
                           pairs: Sequence[tuple[str, str]],
                           settings=None,
                           drop: "tuple[str, str] | None" = None) -> MarginalSpec:
    """Marginal spec from a scenario's computed pairwise laws.

    drop omits one pair's law, which is how the counter-model witnesses
    are produced.
    """
    tables = scenario_pair_tables(scenario, pairs, settings)
    outcomes: dict[str, tuple[str, ...]] = {}
    targets = []
    for table in tables:
        for v in table.variables:
            outcomes.setdefault(v, table.labels[v])
        if drop is not None and tuple(table.variables) == tuple(drop):
            continue
        targets.append(PairTarget.from_table(table))
    return MarginalSpec.build(outcomes, targets)


# ---------------------------------------------------------------------------
# local (Bell) polytope membership via the joint-assignment LP


def _assignment_var(a0: str, a1: str, b0: str, b1: str) -> str:
    return f"P[A0={a0},A1={a1},B0={b0},B1={b1}]"


def fine_membership(behavior: Behavior) -> MarginalFeasibility:
    """Existence of a joint law over the four single-context assignments.

    The behavior's four context marginals must be reproduced exactly.
    Infeasible means the behavior lies outside the local polytope (for
    this two-setting, two-outcome case the same set as the
    local-friendliness correlations).
    """
    a_labels = {x: behavior.outcome_labels(x, 0)[0] for x in (0, 1)}
    b_labels = {y: behavior.outcome_labels(0, y)[1] for y in (0, 1)}
    space = list(itertools.product(a_labels[0], a_labels[1],
                                   b_labels[0], b_labels[1]))
    lp = LinearProgram([_assignment_var(*s) for s in space])
    lp.add({_assignment_var(*s): Fraction(1) for s in space}, "==", Fraction(1))
    for x, y in itertools.product((0, 1), repeat=2):
        for a in a_labels[x]:
            for b in b_labels[y]:
                coeffs = {}
                for s in space:
                    if s[x] == a and s[2 + y] == b:
                        coeffs[_assignment_var(*s)] = Fraction(1)
                p = behavior.prob(x, y, a, b)
                if not isinstance(p, Fraction):
                    raise MalformedTargetError(
                        f"behavior entry p({a},{b}|{x},{y}) = {p!r} is inexact")
                lp.add(coeffs, "==", p)
    result = lp_feasible(lp)
    joint = None
    if result.feasible:
        joint = {s: result.witness[_assignment_var(*s)] for s in space}
    spec = MarginalSpec.build(
        {"A0": a_labels[0], "A1": a_labels[1],
         "B0": b_labels[0], "B1": b_labels[1]}, [])
    return MarginalFeasibility(spec, lp, result, joint)
