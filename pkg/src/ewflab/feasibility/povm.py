"""Qubit POVM joint measurability and the sequential-marginal identity.

Two sharp qubit measurements are jointly measurable exactly when they
commute, i.e. when the two bases coincide up to outcome relabeling.
Feasibility of the four-effect parent POVM reduces to the existence of
one Hermitian corner effect E00 with four simultaneous PSD constraints
(the other three effects are affine in E00), so the analytic criterion
is cross-checked by maximizing the minimum eigenvalue of those four
operators over the four real parameters of E00: a nonnegative optimum
means a parent POVM exists.

guerin_marginal_check runs the compiled twice-measured-friend circuit
and confirms that both single-outcome marginals equal their closed-form
traces; it is the joint distribution over both outcomes, not either
marginal, that no single measurement can reproduce.  Only the map from
the density operator to that joint would be constrained here; a joint
law that is not a linear functional of the density operator is left
untouched by this analysis.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import optimize

from ewflab.qcore import (
    ATOL_OPERATOR,
    DensityOperator,
    ProjectiveBasis,
    StateVector,
    computational_basis,
    plus_minus_basis,
    snap_probability,
)
from ewflab.scenario.catalogue import guerin_modified
from ewflab.scenario.engine import event_distribution

ORACLE_TOL = 1e-6


@dataclass(frozen=True)
class QubitMeasurementPair:
    first: ProjectiveBasis
    second: ProjectiveBasis

    def __post_init__(self):
        if self.first.n_qubits != 1 or self.second.n_qubits != 1:
            raise ValueError("joint measurability is decided for qubit pairs only")

    def projectors(self):
        return self.first.projectors(), self.second.projectors()


def bases_commute(pair: QubitMeasurementPair, atol: float = ATOL_OPERATOR) -> bool:
    """Whether the two rank-one projector sets coincide up to relabeling."""
    p0 = pair.first.projectors()[0]
    q0 = pair.second.projectors()[0]
    return bool(np.allclose(p0 @ q0, q0 @ p0, atol=atol))


def _corner_effects(pair: QubitMeasurementPair, e00: np.ndarray):
    """All four parent effects, affine in the free corner E00."""
    p0 = pair.first.projectors()[0]
    q0 = pair.second.projectors()[0]
    eye = np.eye(2, dtype=complex)
    return {
        ("0", "0"): e00,
        ("0", "1"): p0 - e00,
        ("1", "0"): q0 - e00,
        ("1", "1"): eye - p0 - q0 + e00,
    }


def _min_eig_2x2(m: np.ndarray) -> float:
    # closed form for a 2x2 Hermitian matrix
    a = float(m[0, 0].real)
    b = float(m[1, 1].real)
    off = abs(m[0, 1])
    half = 0.5 * (a - b)
    return 0.5 * (a + b) - float(np.hypot(half, off))


def _min_eigenvalue(pair: QubitMeasurementPair, params: np.ndarray) -> float:
    a, b, re, im = params
    e00 = np.array([[a, re + 1j * im], [re - 1j * im, b]], dtype=complex)
    return min(_min_eig_2x2(effect)
               for effect in _corner_effects(pair, e00).values())


def _params_of(matrix: np.ndarray) -> np.ndarray:
    return np.array([matrix[0, 0].real, matrix[1, 1].real,
                     matrix[0, 1].real, matrix[0, 1].imag])


def max_min_eigenvalue(pair: QubitMeasurementPair) -> tuple[float, np.ndarray]:
    """Numeric oracle: grid search plus local refinement.

    The objective (minimum eigenvalue over the four affine effects) is
    concave in the four real parameters of E00.  Refinement starts from
    the best grid point and from two analytic candidates; the Hermitian
    part of P0 Q0 is exactly optimal whenever the bases commute, which
    keeps the oracle's sign reliable near the feasible boundary.
    """
    p0 = pair.first.projectors()[0]
    q0 = pair.second.projectors()[0]
    starts = [
        _params_of((p0 @ q0 + q0 @ p0) / 2),
        _params_of((p0 + q0) / 4),
    ]
    axes = [np.linspace(0.0, 1.0, 5), np.linspace(0.0, 1.0, 5),
            np.linspace(-0.5, 0.5, 5), np.linspace(-0.5, 0.5, 5)]
    mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")])
    signed = [(np.zeros((2, 2), dtype=complex), 1.0), (p0, -1.0), (q0, -1.0),
              (np.eye(2) - p0 - q0, 1.0)]
    worst = np.full(mesh.shape[1], np.inf)
    for offset, sign in signed:
        m00 = offset[0, 0].real + sign * mesh[0]
        m11 = offset[1, 1].real + sign * mesh[1]
        off_re = offset[0, 1].real + sign * mesh[2]
        off_im = offset[0, 1].imag + sign * mesh[3]
        low = 0.5 * (m00 + m11) - np.sqrt(
            (0.5 * (m00 - m11)) ** 2 + off_re ** 2 + off_im ** 2)
        worst = np.minimum(worst, low)
    best_idx = int(np.argmax(worst))
    best = mesh[:, best_idx].copy()
    best_val = float(worst[best_idx])
    starts.append(best)
    refined, value = best, best_val
    for start in starts:
        res = optimize.minimize(lambda p: -_min_eigenvalue(pair, p), start,
                                method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-12,
                                         "maxiter": 4000})
        for candidate in (start, res.x):
            v = _min_eigenvalue(pair, candidate)
            if v > value:
                refined, value = candidate, v
    return float(value), refined


@dataclass(frozen=True)
class PovmFeasibilityResult:
    """Joint-measurability verdict with both decision routes recorded."""

    feasible: bool
    commuting: bool
    max_min_eigenvalue: float
    witness: "dict[tuple[str, str], np.ndarray] | None"

    def __bool__(self):
        return self.feasible

    def oracle_agrees(self, tol: float = ORACLE_TOL) -> bool:
        if self.feasible:
            return self.max_min_eigenvalue > -tol
        return self.max_min_eigenvalue < tol


def povm_joint_feasibility(pair: QubitMeasurementPair) -> PovmFeasibilityResult:
    """Decide whether one POVM has both measurements as marginals.

    Decision is by the exact commutation criterion; the numeric
    max-min-eigenvalue oracle is always run as a cross-check.  For
    commuting pairs the explicit witness E_{ij} = P_i Q_j is returned
    and satisfies the marginal constraints exactly.
    """
    commuting = bases_commute(pair)
    value, params = max_min_eigenvalue(pair)
    witness = None
    if commuting:
        p_projs, q_projs = pair.projectors()
        witness = {}
        for i, pi in enumerate(p_projs):
            for j, qj in enumerate(q_projs):
                witness[(pair.first.labels[i], pair.second.labels[j])] = pi @ qj
        _verify_parent_povm(pair, witness)
    return PovmFeasibilityResult(commuting, commuting, value, witness)


def _verify_parent_povm(pair: QubitMeasurementPair,
                        witness: "dict[tuple[str, str], np.ndarray]") -> None:
    p_projs, q_projs = pair.projectors()
    total = sum(witness.values())
    assert np.allclose(total, np.eye(2), atol=ATOL_OPERATOR)
    for i, label_i in enumerate(pair.first.labels):
        marg = sum(witness[(label_i, lj)] for lj in pair.second.labels)
        assert np.allclose(marg, p_projs[i], atol=ATOL_OPERATOR)
    for j, label_j in enumerate(pair.second.labels):
        marg = sum(witness[(li, label_j)] for li in pair.first.labels)
        assert np.allclose(marg, q_projs[j], atol=ATOL_OPERATOR)
    for effect in witness.values():
        assert np.linalg.eigvalsh(effect)[0] > -ATOL_OPERATOR


def incompatible_sharp_pair() -> QubitMeasurementPair:
    """The computational / complementary pair at the heart of the argument."""
    return QubitMeasurementPair(computational_basis(), plus_minus_basis())


# ---------------------------------------------------------------------------
# sequential-marginal identity


@dataclass(frozen=True)
class GuerinReport:
    """Circuit marginals vs the closed-form traces, with discrepancy."""

    f1_distribution: dict[str, object]
    f2_distribution: dict[str, object]
    closed_form: tuple[float, float]  # Tr(|0><0| rho), Tr(|+><+| rho)
    max_discrepancy: float

    @property
    def marginals(self) -> tuple[object, object]:
        return (self.f1_distribution["0"], self.f2_distribution["+"])

    @property
    def ok(self) -> bool:
        return self.max_discrepancy <= 1e-12


def guerin_marginal_check(rho: "DensityOperator | StateVector") -> GuerinReport:
    """Run the twice-measured-friend circuit and check both marginals.

    The first outcome must be distributed as a computational-basis
    measurement of the input and the second as a complementary-basis
    measurement, whatever the input state.
    """
    if isinstance(rho, StateVector):
        rho = rho.to_density()
    if rho.n_qubits != 1:
        raise ValueError("expected a single-qubit state")
    scenario = guerin_modified()
    f1 = event_distribution(scenario, variables=("f1",), initial=rho)
    f2 = event_distribution(scenario, variables=("f2",), initial=rho)
    mat = rho.matrix
    p_first = float(mat[0, 0].real)
    plus = np.full((2, 2), 0.5, dtype=complex)
    p_second = float(np.trace(plus @ mat).real)
    d1 = abs(float(f1.prob(("0",))) - p_first)
    d2 = abs(float(f2.prob(("+",))) - p_second)
    return GuerinReport(
        {k[0]: v for k, v in f1.entries.items()},
        {k[0]: v for k, v in f2.entries.items()},
        (snap_probability(p_first), snap_probability(p_second)),
        max(d1, d2))
