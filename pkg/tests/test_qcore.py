import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ewflab import qcore as q

S2 = 1 / math.sqrt(2)
S3 = 1 / math.sqrt(3)


def random_density(rng) -> np.ndarray:
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    mat = g @ g.conj().T
    return mat / np.trace(mat).real


def random_basis(rng) -> q.ProjectiveBasis:
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    u, _ = np.linalg.qr(g)
    return q.ProjectiveBasis([u[:, 0], u[:, 1]], ["0", "1"])


# ---------------------------------------------------------------------------
# tensor


def test_tensor_plus_with_ready_state():
    out = q.tensor(q.plus_state("S"), q.zero_state("F"))
    assert out.labels() == ("S", "F")
    np.testing.assert_allclose(out.amplitudes, [S2, 0, S2, 0], atol=1e-15)


def test_tensor_identity_unitaries():
    eye = q.Unitary(np.eye(2), (q.Register("A"),))
    eye2 = q.Unitary(np.eye(2), (q.Register("B"),))
    out = q.tensor(eye, eye2)
    np.testing.assert_array_equal(out.matrix, np.eye(4))


def test_tensor_hardy_with_two_memories():
    # direct amplitude listing over R,S,C,D: |0000>, |0100>, |1000>
    state = q.tensor(q.tensor(q.hardy_state("R", "S"),
                              q.zero_state("C", role="friend-memory")),
                     q.zero_state("D", role="friend-memory"))
    expected = np.zeros(16, dtype=complex)
    expected[0b0000] = S3
    expected[0b0100] = S3
    expected[0b1000] = S3
    np.testing.assert_allclose(state.amplitudes, expected, atol=1e-15)


def test_tensor_rejects_register_collision():
    with pytest.raises(q.RegisterError):
        q.tensor(q.zero_state("S"), q.one_state("S"))


def test_tensor_rejects_mixed_kinds():
    with pytest.raises(TypeError):
        q.tensor(q.zero_state("S"), q.zero_state("F").to_density())


# ---------------------------------------------------------------------------
# measurement dilation


def test_dilation_computational_is_cnot():
    u = q.measurement_dilation(q.computational_basis(), q.Register("S"),
                               q.Register("F", "friend-memory"))
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    np.testing.assert_allclose(u.matrix, cnot, atol=1e-15)


def test_dilation_writes_outcome_to_memory():
    u = q.measurement_dilation(q.computational_basis(), q.Register("S"),
                               q.Register("F", "friend-memory"))
    one_ready = np.array([0, 0, 1, 0], dtype=complex)  # |1>_S |0>_F
    np.testing.assert_allclose(u.matrix @ one_ready, [0, 0, 0, 1], atol=1e-15)


def test_dilation_complementary_basis():
    u = q.measurement_dilation(q.plus_minus_basis(), q.Register("S"),
                               q.Register("F", "friend-memory"))
    minus_ready = np.kron([S2, -S2], [1, 0])
    expected = np.kron([S2, -S2], [0, 1])  # |->_S |1>_F
    np.testing.assert_allclose(u.matrix @ minus_ready, expected, atol=1e-14)


def test_dilation_entangles_superposed_input():
    u = q.measurement_dilation(q.computational_basis(), q.Register("S"),
                               q.Register("F", "friend-memory"))
    plus_ready = np.kron([S2, S2], [1, 0])
    np.testing.assert_allclose(u.matrix @ plus_ready, [S2, 0, 0, S2], atol=1e-15)


def test_dilation_rejects_multiqubit_basis():
    with pytest.raises(ValueError):
        q.measurement_dilation(q.bell_basis(), q.Register("S"),
                               q.Register("F", "friend-memory"))


def test_dilation_correctness_random_bases():
    # eigenstates stay put on the system while the outcome index lands
    # in the memory register
    rng = np.random.default_rng(11)
    sys_reg, mem_reg = q.Register("S"), q.Register("F", "friend-memory")
    for _ in range(25):
        basis = random_basis(rng)
        u = q.measurement_dilation(basis, sys_reg, mem_reg)
        for k, ket in enumerate(basis.kets):
            before = np.kron(ket, [1, 0])
            after = np.kron(ket, np.eye(2)[k])
            np.testing.assert_allclose(u.matrix @ before, after, atol=1e-12)


def test_undo_identity_and_branches():
    u = q.measurement_dilation(q.computational_basis(), q.Register("S"),
                               q.Register("F", "friend-memory"))
    np.testing.assert_allclose(u.adjoint().matrix @ u.matrix, np.eye(4),
                               atol=1e-12)
    undo = u.adjoint().matrix
    # reversal on the entangled state gives back the product input
    entangled = np.array([S2, 0, 0, S2])
    np.testing.assert_allclose(undo @ entangled, np.kron([S2, S2], [1, 0]),
                               atol=1e-15)
    # collapsed branches: memory reverts to ready, system keeps its value
    np.testing.assert_allclose(undo @ np.array([1, 0, 0, 0]), [1, 0, 0, 0],
                               atol=1e-15)
    np.testing.assert_allclose(undo @ np.array([0, 0, 0, 1]), [0, 0, 1, 0],
                               atol=1e-15)


def test_multiqubit_dilation_generalizes():
    regs = (q.Register("S"), q.Register("F"))
    mems = (q.Register("W0", "friend-memory"), q.Register("W1", "friend-memory"))
    u = q.dilation_unitary(q.bell_basis(), regs, mems)
    for k, ket in enumerate(q.bell_basis().kets):
        before = np.kron(ket, np.eye(4)[0])
        after = np.kron(ket, np.eye(4)[k])
        np.testing.assert_allclose(u.matrix @ before, after, atol=1e-12)


# ---------------------------------------------------------------------------
# Born probabilities


def test_born_complementary_overlap():
    plus_proj = q.Effect(np.full((2, 2), 0.5), (q.Register("S"),))
    assert q.born_probability(q.zero_state("S"), [plus_proj]) == pytest.approx(0.5)


def test_born_entangled_projector_is_certain():
    u = q.measurement_dilation(q.computational_basis(), q.Register("S"),
                               q.Register("F", "friend-memory"))
    state = q.StateVector(u.matrix @ np.kron([S2, S2], [1, 0]),
                          (q.Register("S"), q.Register("F", "friend-memory")))
    ent = np.array([S2, 0, 0, S2])
    effect = q.Effect(np.outer(ent, ent),
                      (q.Register("S"), q.Register("F", "friend-memory")))
    assert q.born_probability(state, [effect]) == pytest.approx(1.0, abs=1e-12)


def test_born_hardy_minus_minus():
    # brute-force oracle: expand the overlap amplitude directly
    minus = np.array([S2, -S2])
    mm = np.kron(minus, minus)
    hardy = np.array([S3, S3, S3, 0])
    oracle = abs(np.vdot(mm, hardy)) ** 2
    assert oracle == pytest.approx(1 / 12, abs=1e-15)

    eff_a = q.Effect(np.outer(minus, minus), (q.Register("R"),))
    eff_b = q.Effect(np.outer(minus, minus), (q.Register("S"),))
    got = q.born_probability(q.hardy_state("R", "S"), [eff_a, eff_b])
    assert got == pytest.approx(oracle, abs=1e-12)


def test_born_rejects_overlapping_effects():
    e = q.Effect(np.eye(2), (q.Register("R"),))
    with pytest.raises(q.RegisterError):
        q.born_probability(q.hardy_state("R", "S"), [e, e])


def test_born_density_matches_vector():
    rng = np.random.default_rng(5)
    basis = random_basis(rng)
    eff = q.Effect(np.outer(basis.kets[0], basis.kets[0].conj()),
                   (q.Register("R"),))
    state = q.hardy_state("R", "S")
    assert q.born_probability(state, [eff]) == pytest.approx(
        q.born_probability(state.to_density(), [eff]), abs=1e-12)


# ---------------------------------------------------------------------------
# partial trace


def test_partial_trace_singlet_is_maximally_mixed():
    rho = q.singlet_state("R", "S").to_density()
    reduced = q.partial_trace(rho, ["R"])
    np.testing.assert_allclose(reduced.matrix, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_product():
    rho = q.tensor(q.zero_state("A").to_density(), q.one_state("B").to_density())
    reduced = q.partial_trace(rho, ["B"])
    np.testing.assert_allclose(reduced.matrix, [[0, 0], [0, 1]], atol=1e-15)


def test_partial_trace_entangled_pair():
    rho = q.bell_phi_plus_state("S", "F").to_density()
    reduced = q.partial_trace(rho, ["S"])
    np.testing.assert_allclose(reduced.matrix, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_preserves_trace_and_order():
    rng = np.random.default_rng(17)
    g = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    mat = g @ g.conj().T
    mat /= np.trace(mat).real
    regs = (q.Register("A"), q.Register("B"), q.Register("C"))
    rho = q.DensityOperator(mat, regs)
    reduced = q.partial_trace(rho, ["C", "A"])
    assert reduced.labels() == ("C", "A")
    assert np.trace(reduced.matrix).real == pytest.approx(1.0, abs=1e-12)
    # tracing in two steps agrees
    step = q.partial_trace(q.partial_trace(rho, ["A", "C"]), ["C", "A"])
    np.testing.assert_allclose(reduced.matrix, step.matrix, atol=1e-12)


def test_partial_trace_rejects_empty_keep():
    rho = q.zero_state("S").to_density()
    with pytest.raises(ValueError):
        q.partial_trace(rho, [])


# ---------------------------------------------------------------------------
# isometry equivalence


def test_isometry_equivalence_plus_state():
    rho = q.plus_state("S").to_density()
    assert q.isometry_equivalence_check(rho, q.plus_minus_basis()) <= 1e-12


def test_isometry_equivalence_maximally_mixed():
    rho = q.DensityOperator(np.eye(2) / 2, (q.Register("S"),))
    assert q.isometry_equivalence_check(rho, q.plus_minus_basis()) <= 1e-12


def test_isometry_equivalence_random_states():
    rng = np.random.default_rng(23)
    basis = q.plus_minus_basis()
    for _ in range(100):
        rho = q.DensityOperator(random_density(rng), (q.Register("S"),))
        assert q.isometry_equivalence_check(rho, basis) <= 1e-12


def test_isometry_equivalence_random_bases_and_states():
    # the operator identity Tr((V P V†)(V rho V†)) = Tr(P rho) holds for
    # any measured basis, not just the complementary one
    rng = np.random.default_rng(29)
    for _ in range(30):
        rho = q.DensityOperator(random_density(rng), (q.Register("S"),))
        assert q.isometry_equivalence_check(rho, random_basis(rng)) <= 1e-12


def test_dilation_isometry_columns():
    v = q.dilation_isometry(q.computational_basis(), q.Register("S"),
                            q.Register("F", "friend-memory"))
    np.testing.assert_allclose(v.matrix @ np.array([1, 0]), [1, 0, 0, 0],
                               atol=1e-15)
    np.testing.assert_allclose(v.matrix @ np.array([0, 1]), [0, 0, 0, 1],
                               atol=1e-15)


# ---------------------------------------------------------------------------
# validation


def test_state_vector_norm_enforced():
    with pytest.raises(ValueError):
        q.StateVector([1, 1], (q.Register("S"),))


def test_density_validation():
    with pytest.raises(ValueError):
        q.DensityOperator([[1, 1], [0, 0]], (q.Register("S"),))
    with pytest.raises(ValueError):
        q.DensityOperator([[2, 0], [0, -1]], (q.Register("S"),))


def test_unitary_validation():
    with pytest.raises(ValueError):
        q.Unitary([[1, 1], [0, 1]], (q.Register("S"),))


def test_effect_bounds():
    with pytest.raises(ValueError):
        q.Effect([[1.5, 0], [0, 0]], (q.Register("S"),))


def test_basis_orthonormality_and_completeness():
    with pytest.raises(ValueError):
        q.ProjectiveBasis([[1, 0], [S2, S2]], ["0", "1"])
    with pytest.raises(ValueError):
        q.ProjectiveBasis([[1, 0]], ["0"])


def test_register_role_validation():
    with pytest.raises(ValueError):
        q.Register("S", role="observer")


def test_max_qubits_enforced():
    regs = tuple(q.Register(f"r{i}") for i in range(7))
    amps = np.zeros(128)
    amps[0] = 1.0
    with pytest.raises(ValueError):
        q.StateVector(amps, regs)


# ---------------------------------------------------------------------------
# rational snapping


def test_snap_small_rationals():
    assert q.snap_probability(1 / 3 + 2e-10) == Fraction(1, 3)
    assert q.snap_probability(0.0) == Fraction(0)
    assert q.snap_probability(1.0) == Fraction(1)
    assert q.snap_probability(1 / 12) == Fraction(1, 12)


def test_snap_leaves_generic_values_alone():
    value = 0.12345678901
    out = q.snap_probability(value)
    assert isinstance(out, float) and out == value


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=999), st.integers(min_value=1, max_value=1000))
def test_snap_recovers_exact_rationals(num, den):
    frac = Fraction(num, den)
    if frac > 1:
        frac = Fraction(den, num) if num else Fraction(0)
    out = q.snap_probability(float(frac))
    assert out == frac.limit_denominator(1000)


def test_format_number():
    assert q.format_number(Fraction(1, 12)) == "1/12"
    assert q.format_number(Fraction(3)) == "3"
    assert q.format_number(0.123456789012345) == "0.123456789012"
