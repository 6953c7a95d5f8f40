"""Exact-rational linear feasibility and qubit joint measurability."""

from ewflab.feasibility.marginals import (
    MalformedTargetError,
    MarginalFeasibility,
    MarginalSpec,
    PairTarget,
    fine_membership,
    pairwise_marginal_feasibility,
    scenario_marginal_spec,
    scenario_pair_tables,
)
from ewflab.feasibility.povm import (
    GuerinReport,
    PovmFeasibilityResult,
    QubitMeasurementPair,
    bases_commute,
    guerin_marginal_check,
    incompatible_sharp_pair,
    max_min_eigenvalue,
    povm_joint_feasibility,
)
from ewflab.feasibility.simplex import (
    Constraint,
    FarkasCertificate,
    FeasibilityResult,
    LinearProgram,
    Rational,
    lp_feasible,
    verify_witness,
)

__all__ = [
    "Constraint", "FarkasCertificate", "FeasibilityResult", "GuerinReport",
    "LinearProgram", "MalformedTargetError", "MarginalFeasibility",
    "MarginalSpec", "PairTarget", "PovmFeasibilityResult",
    "QubitMeasurementPair", "Rational", "bases_commute", "fine_membership",
    "guerin_marginal_check", "incompatible_sharp_pair", "lp_feasible",
    "max_min_eigenvalue", "pairwise_marginal_feasibility",
    "povm_joint_feasibility", "scenario_marginal_spec",
    "scenario_pair_tables", "verify_witness",
]
