"""Candidate prediction policies for sequential measure/undo cycles.

The sequential scenario makes claims about outcome frequencies that no
observer can check, so instead of hard-coding either claim we implement
two candidate policies and let the workbench compare them:

  collapse_ordered   apply the projection postulate at every measurement
                     in the scenario's global tick order (its foliation);
                     undo operations act as the adjoint dilation on the
                     collapsed state, reverting the friend's memory to
                     ready while the system keeps its collapsed value.
  independent_born   sample every outcome independently from its own
                     single-event Born marginal.

collapse_ordered induces the same joint law under either foliation; the
independent policy breaks the accessible anti-correlation between the
last cycle outcome and the partner's outcome.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from ewflab.qcore import apply_matrix_vec, snap_probability
from ewflab.scenario.catalogue import gao as gao_scenario
from ewflab.scenario.engine import (
    Program,
    ReadPoint,
    UnitaryStep,
    compile_circuit,
    event_distribution,
)
from ewflab.scenario.model import Scenario

POLICIES = ("collapse_ordered", "independent_born")


@dataclass(frozen=True)
class GaoRunResult:
    policy: str
    foliation: str | None
    variables: tuple[str, ...]
    exact: "dict[tuple, Fraction] | None"
    counts: dict[tuple, int]
    trials: int

    def frequency(self, assignment: tuple) -> float:
        return self.counts.get(tuple(assignment), 0) / self.trials

    def empirical(self) -> dict[tuple, float]:
        return {k: v / self.trials for k, v in self.counts.items()}


def _collapse_walk(program: Program, variables: tuple[str, ...]):
    """Exact branch enumeration with projection at every read point."""
    n = len(program.scenario.registers)

    def walk(index: int, vec: np.ndarray, prob: Fraction, chosen: dict):
        for i in range(index, len(program.steps)):
            step = program.steps[i]
            if isinstance(step, UnitaryStep):
                vec = apply_matrix_vec(vec, step.matrix, step.positions, n)
                continue
            branches = []
            for out_idx, label in enumerate(step.labels):
                projected = apply_matrix_vec(vec, step.projectors[out_idx],
                                             step.positions, n)
                p = float(np.vdot(projected, projected).real)
                if p <= 1e-15:
                    continue
                p_exact = snap_probability(p)
                if not isinstance(p_exact, Fraction):
                    raise ValueError(f"branch probability {p!r} is not an exact "
                                     f"rational; collapse law would be inexact")
                branches.append((label, projected / np.sqrt(p), p_exact))
            for label, branch_vec, p_exact in branches:
                yield from walk(i + 1, branch_vec, prob * p_exact,
                                {**chosen, step.variable: label})
            return
        yield chosen, prob

    yield from walk(0, program.initial, Fraction(1), {})


def collapse_ordered_law(scenario: Scenario,
                         variables: tuple[str, ...]) -> dict[tuple, Fraction]:
    """Exact joint law induced by foliation-ordered collapse."""
    program = compile_circuit(scenario)
    law: dict[tuple, Fraction] = {}
    for chosen, prob in _collapse_walk(program, variables):
        key = tuple(chosen[v] for v in variables)
        law[key] = law.get(key, Fraction(0)) + prob
    assert sum(law.values()) == 1
    return law


def _sample_from_law(law: Mapping[tuple, Fraction], trials: int,
                     rng: random.Random) -> dict[tuple, int]:
    keys = sorted(law.keys())
    weights = [float(law[k]) for k in keys]
    counts = {k: 0 for k in keys}
    for _ in range(trials):
        counts[rng.choices(keys, weights)[0]] += 1
    return {k: c for k, c in counts.items() if c}


def gao_run(policy: str, k: int, trials: int, seed: int,
            foliation: str = "debbie_first") -> GaoRunResult:
    """Run a prediction policy on the k-cycle sequential scenario.

    Returns empirical counts over (c1..ck, d) plus, for the collapse
    policy, the exact induced law.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if trials <= 0:
        raise ValueError("trials must be positive")
    scenario = gao_scenario(k, foliation)
    variables = tuple(f"c{i}" for i in range(1, k + 1)) + ("d",)
    rng = random.Random(seed)

    if policy == "collapse_ordered":
        law = collapse_ordered_law(scenario, variables)
        counts = _sample_from_law(law, trials, rng)
        return GaoRunResult(policy, foliation, variables, law, counts, trials)

    # independent_born: one-variable marginals, sampled independently
    marginals = []
    for v in variables:
        table = event_distribution(scenario, variables=(v,))
        marginals.append({key[0]: table.prob(key) for key in table.assignments()})
    counts: dict[tuple, int] = {}
    for _ in range(trials):
        draw = tuple(
            rng.choices(sorted(m.keys()), [float(m[o]) for o in sorted(m.keys())])[0]
            for m in marginals)
        counts[draw] = counts.get(draw, 0) + 1
    return GaoRunResult(policy, None, variables, None, counts, trials)
