"""Exact-rational linear feasibility with verifiable certificates.

Solves "does {A x <= b, x >= 0} have a solution" over Fractions with a
phase-one simplex using Bland's rule, so the answer is exact and
deterministic.  Feasible problems return a witness assignment; infeasible
problems return a Farkas certificate: nonnegative multipliers, one per
canonical <= row, whose combination has nonnegative coefficients on
every variable but a negative right-hand side (normalized to -1).  Both
artifacts re-verify by exact substitution with zero tolerance.

The possibilistic zero entries make these programs highly degenerate,
which is exactly why a floating-point solver is not used here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

Rational = Fraction

OPS = ("<=", ">=", "==")


def _rat(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not float(x).is_integer():
            raise TypeError(f"refusing inexact float coefficient {x!r}; "
                            f"pass a Fraction")
        return Fraction(int(x))
    raise TypeError(f"cannot use {type(x).__name__} as an exact coefficient")


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[tuple[str, Fraction], ...]
    op: str
    rhs: Fraction

    def render(self) -> str:
        terms = " + ".join(f"{c}*{v}" for v, c in self.coeffs) or "0"
        return f"{terms} {self.op} {self.rhs}"


class LinearProgram:
    """Feasibility-only program over nonnegative rational variables."""

    def __init__(self, variables: Sequence[str]):
        self.variables = list(dict.fromkeys(variables))
        self.constraints: list[Constraint] = []

    def add(self, coeffs: Mapping[str, object], op: str, rhs) -> None:
        if op not in OPS:
            raise ValueError(f"unknown relation {op!r}")
        unknown = set(coeffs) - set(self.variables)
        if unknown:
            raise ValueError(f"unknown variables {sorted(unknown)}")
        frozen = tuple(sorted((v, _rat(c)) for v, c in coeffs.items()))
        self.constraints.append(Constraint(frozen, op, _rat(rhs)))

    def canonical_rows(self) -> list[tuple[dict[str, Fraction], Fraction, int]]:
        """All constraints as <= rows; third element is the source index."""
        rows = []
        for idx, con in enumerate(self.constraints):
            coeffs = dict(con.coeffs)
            if con.op in ("<=", "=="):
                rows.append((dict(coeffs), con.rhs, idx))
            if con.op in (">=", "=="):
                rows.append(({v: -c for v, c in coeffs.items()}, -con.rhs, idx))
        return rows


@dataclass(frozen=True)
class FarkasCertificate:
    """Nonnegative multipliers over the canonical <= rows.

    The combination sum_i m_i * row_i has every variable coefficient
    >= 0 while the combined right-hand side equals -1, contradicting
    x >= 0.
    """

    multipliers: tuple[Fraction, ...]

    def combination(self, lp: LinearProgram) -> tuple[dict[str, Fraction], Fraction]:
        rows = lp.canonical_rows()
        combined: dict[str, Fraction] = {v: Fraction(0) for v in lp.variables}
        rhs = Fraction(0)
        for m, (coeffs, b, _) in zip(self.multipliers, rows):
            for v, c in coeffs.items():
                combined[v] += m * c
            rhs += m * b
        return combined, rhs

    def verify(self, lp: LinearProgram) -> bool:
        if len(self.multipliers) != len(lp.canonical_rows()):
            return False
        if any(m < 0 for m in self.multipliers):
            return False
        combined, rhs = self.combination(lp)
        return all(c >= 0 for c in combined.values()) and rhs == Fraction(-1)

    def to_strings(self) -> list[str]:
        return [f"{m.numerator}/{m.denominator}" if m.denominator != 1
                else str(m.numerator) for m in self.multipliers]


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witness: "dict[str, Fraction] | None" = None
    certificate: "FarkasCertificate | None" = None

    def __bool__(self):
        return self.feasible

    def verify(self, lp: LinearProgram) -> bool:
        if self.feasible:
            return self.witness is not None and verify_witness(lp, self.witness)
        return self.certificate is not None and self.certificate.verify(lp)


def verify_witness(lp: LinearProgram, witness: Mapping[str, Fraction]) -> bool:
    """Exact re-substitution of a witness into every constraint."""
    for v in lp.variables:
        if witness.get(v, Fraction(0)) < 0:
            return False
    for con in lp.constraints:
        value = sum((c * witness.get(v, Fraction(0)) for v, c in con.coeffs),
                    Fraction(0))
        if con.op == "<=" and not value <= con.rhs:
            return False
        if con.op == ">=" and not value >= con.rhs:
            return False
        if con.op == "==" and value != con.rhs:
            return False
    return True


def lp_feasible(lp: LinearProgram) -> FeasibilityResult:
    """Exact feasibility of {constraints, all variables >= 0}."""
    rows = lp.canonical_rows()
    n = len(lp.variables)
    m = len(rows)
    var_index = {v: j for j, v in enumerate(lp.variables)}

    if m == 0:
        return FeasibilityResult(True, {v: Fraction(0) for v in lp.variables})

    # standard form: sigma_i (a_i x + s_i) = sigma_i b_i with b >= 0,
    # artificial basis on every row
    width = n + m + m + 1  # users, slacks, artificials, rhs
    tableau: list[list[Fraction]] = []
    sigma: list[int] = []
    for i, (coeffs, b, _) in enumerate(rows):
        flip = -1 if b < 0 else 1
        sigma.append(flip)
        row = [Fraction(0)] * width
        for v, c in coeffs.items():
            row[var_index[v]] = flip * c
        row[n + i] = Fraction(flip)
        row[n + m + i] = Fraction(1)
        row[-1] = flip * b
        tableau.append(row)

    cost = [Fraction(0)] * width
    for i in range(m):
        cost[n + m + i] = Fraction(1)
    # price out the artificial basis
    for i in range(m):
        for j in range(width):
            cost[j] -= tableau[i][j]

    basis = [n + m + i for i in range(m)]
    n_real = n + m  # columns eligible to enter

    while True:
        entering = -1
        for j in range(n_real):
            if cost[j] < 0:
                entering = j
                break  # Bland: smallest index
        if entering < 0:
            break
        leaving = -1
        best = None
        for i in range(m):
            a = tableau[i][entering]
            if a > 0:
                ratio = tableau[i][-1] / a
                if best is None or ratio < best or \
                        (ratio == best and basis[i] < basis[leaving]):
                    best = ratio
                    leaving = i
        if leaving < 0:
            # cost column unbounded below cannot happen in phase one
            raise RuntimeError("phase-one simplex became unbounded")
        pivot = tableau[leaving][entering]
        tableau[leaving] = [x / pivot for x in tableau[leaving]]
        for i in range(m):
            if i != leaving and tableau[i][entering] != 0:
                f = tableau[i][entering]
                tableau[i] = [x - f * y for x, y in zip(tableau[i], tableau[leaving])]
        if cost[entering] != 0:
            f = cost[entering]
            cost = [x - f * y for x, y in zip(cost, tableau[leaving])]
        basis[leaving] = entering

    objective = -cost[-1]
    if objective == 0:
        witness = {v: Fraction(0) for v in lp.variables}
        for i, var in enumerate(basis):
            if var < n:
                witness[lp.variables[var]] = tableau[i][-1]
        return FeasibilityResult(True, witness)

    # infeasible: y_i = 1 - reduced cost of artificial i; multipliers
    # over <= rows are -sigma_i * y_i, scaled so the combined rhs is -1
    multipliers = []
    for i in range(m):
        y_i = Fraction(1) - cost[n + m + i]
        multipliers.append(-sigma[i] * y_i)
    scale = Fraction(1) / objective
    cert = FarkasCertificate(tuple(m * scale for m in multipliers))
    return FeasibilityResult(False, None, cert)
