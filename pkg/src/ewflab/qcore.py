"""Dense complex linear algebra for small labeled-qubit systems.

Everything here is sized for at most six qubits, so all states and
operators are kept as dense numpy arrays.  Qubits are identified by
register labels; register 0 is the most significant bit of the
amplitude index, matching the usual ket-string reading order
(``|b0 b1 ...>``).

All values are immutable after construction (the wrapped arrays are
marked read-only) and every operation is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

# Tolerances: operator identities are checked to 1e-10, scalar
# quantities (norms, traces, probabilities) to 1e-12.
ATOL_OPERATOR = 1e-10
ATOL_SCALAR = 1e-12

# Probabilities within SNAP_TOL of a rational with denominator at most
# SNAP_MAX_DENOMINATOR are replaced by that rational, so that the
# possibilistic and feasibility layers can work with exact zeros.
SNAP_MAX_DENOMINATOR = 1000
SNAP_TOL = 1e-9

MAX_QUBITS = 6


class RegisterError(ValueError):
    """Raised on register-label collisions or lookups of unknown labels."""


@dataclass(frozen=True)
class Register:
    """A labeled qubit.

    role is either "system" (a physical qubit being measured) or
    "friend-memory" (the coarse-grained memory of an observer); owner
    names the agent whose memory it is, if any.
    """

    label: str
    role: str = "system"
    owner: str | None = None

    def __post_init__(self):
        if self.role not in ("system", "friend-memory"):
            raise ValueError(f"unknown register role {self.role!r}")


def _check_labels(registers: Sequence[Register]) -> None:
    labels = [r.label for r in registers]
    if len(set(labels)) != len(labels):
        raise RegisterError(f"duplicate register labels in {labels}")
    if len(labels) > MAX_QUBITS:
        raise ValueError(f"at most {MAX_QUBITS} qubits supported, got {len(labels)}")


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    a.setflags(write=False)
    return a


def _positions(labels: Sequence[str], registers: Sequence[Register]) -> list[int]:
    index = {r.label: i for i, r in enumerate(registers)}
    try:
        return [index[lab] for lab in labels]
    except KeyError as exc:
        raise RegisterError(f"unknown register {exc.args[0]!r}") from None


class StateVector:
    """Pure state over an ordered list of registers."""

    def __init__(self, amplitudes, registers: Sequence[Register]):
        registers = tuple(registers)
        _check_labels(registers)
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2 ** len(registers):
            raise ValueError(
                f"{amps.size} amplitudes do not match {len(registers)} registers"
            )
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > ATOL_SCALAR:
            raise ValueError(f"state not normalized: squared norm {norm2!r}")
        self.amplitudes = _freeze(amps)
        self.registers = registers

    @property
    def n_qubits(self) -> int:
        return len(self.registers)

    def labels(self) -> tuple[str, ...]:
        return tuple(r.label for r in self.registers)

    def to_density(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()),
                               self.registers)

    def __repr__(self):
        return f"StateVector({self.labels()})"


class DensityOperator:
    """Mixed state: Hermitian, unit-trace, positive semidefinite matrix."""

    def __init__(self, matrix, registers: Sequence[Register]):
        registers = tuple(registers)
        _check_labels(registers)
        mat = np.asarray(matrix, dtype=complex)
        dim = 2 ** len(registers)
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix shape {mat.shape} does not match registers")
        if not np.allclose(mat, mat.conj().T, atol=ATOL_SCALAR):
            raise ValueError("density operator not Hermitian")
        tr = float(np.trace(mat).real)
        if abs(tr - 1.0) > ATOL_SCALAR:
            raise ValueError(f"density operator trace {tr!r} != 1")
        min_eig = float(np.linalg.eigvalsh(mat).min())
        if min_eig < -ATOL_OPERATOR:
            raise ValueError(f"density operator not PSD (min eigenvalue {min_eig})")
        self.matrix = _freeze(mat)
        self.registers = registers

    @property
    def n_qubits(self) -> int:
        return len(self.registers)

    def labels(self) -> tuple[str, ...]:
        return tuple(r.label for r in self.registers)

    def __repr__(self):
        return f"DensityOperator({self.labels()})"


class Unitary:
    """Unitary operator acting on the listed registers."""

    def __init__(self, matrix, registers: Sequence[Register]):
        registers = tuple(registers)
        _check_labels(registers)
        mat = np.asarray(matrix, dtype=complex)
        dim = 2 ** len(registers)
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix shape {mat.shape} does not match registers")
        if not np.allclose(mat @ mat.conj().T, np.eye(dim), atol=ATOL_OPERATOR):
            raise ValueError("matrix is not unitary")
        self.matrix = _freeze(mat)
        self.registers = registers

    def labels(self) -> tuple[str, ...]:
        return tuple(r.label for r in self.registers)

    def adjoint(self) -> "Unitary":
        return Unitary(self.matrix.conj().T, self.registers)

    def __repr__(self):
        return f"Unitary({self.labels()})"


class Isometry:
    """Isometry from n input qubits into m >= n output qubits (V†V = I)."""

    def __init__(self, matrix, registers_out: Sequence[Register],
                 registers_in: Sequence[Register]):
        registers_out = tuple(registers_out)
        registers_in = tuple(registers_in)
        _check_labels(registers_out)
        _check_labels(registers_in)
        mat = np.asarray(matrix, dtype=complex)
        dim_out = 2 ** len(registers_out)
        dim_in = 2 ** len(registers_in)
        if mat.shape != (dim_out, dim_in):
            raise ValueError(f"matrix shape {mat.shape} does not match registers")
        if dim_out < dim_in:
            raise ValueError("isometry must not shrink the space")
        if not np.allclose(mat.conj().T @ mat, np.eye(dim_in), atol=ATOL_OPERATOR):
            raise ValueError("matrix is not an isometry (V†V != I)")
        self.matrix = _freeze(mat)
        self.registers_out = registers_out
        self.registers_in = registers_in

    def __repr__(self):
        return (f"Isometry({[r.label for r in self.registers_in]} -> "
                f"{[r.label for r in self.registers_out]})")


class Effect:
    """Measurement effect: Hermitian with spectrum inside [0, 1]."""

    def __init__(self, matrix, registers: Sequence[Register]):
        registers = tuple(registers)
        _check_labels(registers)
        mat = np.asarray(matrix, dtype=complex)
        dim = 2 ** len(registers)
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix shape {mat.shape} does not match registers")
        if not np.allclose(mat, mat.conj().T, atol=ATOL_OPERATOR):
            raise ValueError("effect not Hermitian")
        eigs = np.linalg.eigvalsh(mat)
        if eigs.min() < -ATOL_OPERATOR or eigs.max() > 1.0 + ATOL_OPERATOR:
            raise ValueError(f"effect eigenvalues outside [0, 1]: {eigs}")
        self.matrix = _freeze(mat)
        self.registers = registers

    def labels(self) -> tuple[str, ...]:
        return tuple(r.label for r in self.registers)

    def __repr__(self):
        return f"Effect({self.labels()})"


class ProjectiveBasis:
    """Orthonormal basis with outcome labels, optionally bound to a register.

    The kets span the full space of n qubits, are pairwise orthogonal to
    1e-12, and are complete (the projectors sum to the identity).
    """

    def __init__(self, kets, labels: Sequence[str], register: str | None = None,
                 name: str | None = None):
        kets = [np.asarray(k, dtype=complex).reshape(-1) for k in kets]
        dim = kets[0].size
        n = dim.bit_length() - 1
        if 2 ** n != dim:
            raise ValueError("ket length must be a power of two")
        if len(kets) != dim:
            raise ValueError(f"need {dim} kets for completeness, got {len(kets)}")
        if len(labels) != len(kets):
            raise ValueError("one outcome label per ket required")
        for i, ki in enumerate(kets):
            if abs(np.vdot(ki, ki) - 1.0) > ATOL_SCALAR:
                raise ValueError(f"ket {i} not normalized")
            for j in range(i + 1, len(kets)):
                if abs(np.vdot(ki, kets[j])) > ATOL_SCALAR:
                    raise ValueError(f"kets {i},{j} not orthogonal")
        total = sum(np.outer(k, k.conj()) for k in kets)
        if not np.allclose(total, np.eye(dim), atol=ATOL_OPERATOR):
            raise ValueError("projectors do not sum to the identity")
        self.kets = tuple(_freeze(k) for k in kets)
        self.labels = tuple(str(l) for l in labels)
        self.register = register
        self.name = name

    @property
    def n_qubits(self) -> int:
        return self.kets[0].size.bit_length() - 1

    def projectors(self) -> list[np.ndarray]:
        return [np.outer(k, k.conj()) for k in self.kets]

    def change_of_basis(self) -> np.ndarray:
        """Matrix mapping computational ket k to the k-th basis ket."""
        return np.column_stack(self.kets)

    def relabeled(self, labels: Sequence[str]) -> "ProjectiveBasis":
        return ProjectiveBasis(self.kets, labels, self.register, self.name)

    def __repr__(self):
        return f"ProjectiveBasis({self.name or self.labels})"


# ---------------------------------------------------------------------------
# raw tensor helpers


def _apply_axes(tensor: np.ndarray, mat: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract mat (2^k x 2^k) into the given axes of a (2,)*m tensor."""
    k = len(axes)
    mt = mat.reshape((2,) * (2 * k))
    out = np.tensordot(mt, tensor, axes=(tuple(range(k, 2 * k)), tuple(axes)))
    return np.moveaxis(out, range(k), axes)


def apply_matrix_vec(vec: np.ndarray, mat: np.ndarray, positions: Sequence[int],
                     n_qubits: int) -> np.ndarray:
    """Apply a 2^k x 2^k matrix to the given qubit positions of a state vector."""
    t = vec.reshape((2,) * n_qubits)
    return _apply_axes(t, mat, positions).reshape(-1)


def apply_unitary_density(rho: np.ndarray, mat: np.ndarray, positions: Sequence[int],
                          n_qubits: int) -> np.ndarray:
    """Return (U rho U†) restricted to the given positions."""
    t = rho.reshape((2,) * (2 * n_qubits))
    t = _apply_axes(t, mat, positions)
    t = _apply_axes(t, mat.conj(), [p + n_qubits for p in positions])
    return t.reshape(rho.shape)

def sandwich_density(rho: np.ndarray, mat: np.ndarray, positions: Sequence[int],
                     n_qubits: int) -> np.ndarray:
    """Return M rho M† for an arbitrary (not necessarily unitary) M."""
    return apply_unitary_density(rho, mat, positions, n_qubits)


def left_multiply_density(rho: np.ndarray, mat: np.ndarray, positions: Sequence[int],
                          n_qubits: int) -> np.ndarray:
    """Return M rho (left multiplication only), e.g. for computing Tr(E rho)."""
    t = rho.reshape((2,) * (2 * n_qubits))
    t = _apply_axes(t, mat, positions)
    return t.reshape(rho.shape)


# ---------------------------------------------------------------------------
# operations on the typed wrappers


def tensor(a, b):
    """Kronecker product with concatenated register order.

    Both arguments must be of the same kind (two states, two density
    operators, two unitaries, or two effects) with disjoint register
    labels.
    """
    shared = set(l for l in _labels_of(a)) & set(l for l in _labels_of(b))
    if shared:
        raise RegisterError(f"register labels {sorted(shared)} appear on both sides")
    regs = tuple(a.registers) + tuple(b.registers)
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(np.kron(a.amplitudes, b.amplitudes), regs)
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(np.kron(a.matrix, b.matrix), regs)
    if isinstance(a, Unitary) and isinstance(b, Unitary):
        return Unitary(np.kron(a.matrix, b.matrix), regs)
    if isinstance(a, Effect) and isinstance(b, Effect):
        return Effect(np.kron(a.matrix, b.matrix), regs)
    raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")


def _labels_of(x) -> tuple[str, ...]:
    return tuple(r.label for r in x.registers)


def measurement_dilation(basis: ProjectiveBasis, system: Register,
                         friend: Register) -> Unitary:
    """Unitary model of a single-qubit measurement writing into a memory qubit.

    Maps |b_k>|0> to |b_k>|k>: for the computational basis this is
    exactly the CNOT gate, and in general it is the CNOT conjugated on
    the system side by the change of basis.  The friend register is
    assumed to start in |0>.
    """
    if basis.n_qubits != 1:
        raise ValueError("measurement_dilation requires a single-qubit basis")
    b = basis.change_of_basis()
    cnot = np.array([[1, 0, 0, 0],
                     [0, 1, 0, 0],
                     [0, 0, 0, 1],
                     [0, 0, 1, 0]], dtype=complex)
    full = np.kron(b, np.eye(2)) @ cnot @ np.kron(b.conj().T, np.eye(2))
    return Unitary(full, (system, friend))


def dilation_unitary(basis: ProjectiveBasis, systems: Sequence[Register],
                     memories: Sequence[Register]) -> Unitary:
    """Multi-qubit generalization of measurement_dilation.

    Writes the outcome index of an n-qubit basis measurement into n
    memory qubits: |b_k>|0..0> -> |b_k>|bin(k)>.
    """
    n = basis.n_qubits
    if len(systems) != n or len(memories) != n:
        raise ValueError("need one memory qubit per measured qubit")
    dim = 2 ** n
    b = basis.change_of_basis()
    # Basis-controlled adder: in the rotated frame, XOR the system index
    # into the memory register.
    adder = np.zeros((dim * dim, dim * dim), dtype=complex)
    for s in range(dim):
        for m in range(dim):
            adder[s * dim + (m ^ s), s * dim + m] = 1.0
    full = np.kron(b, np.eye(dim)) @ adder @ np.kron(b.conj().T, np.eye(dim))
    return Unitary(full, tuple(systems) + tuple(memories))


def dilation_isometry(basis: ProjectiveBasis, system: Register,
                      friend: Register) -> Isometry:
    """Isometry V|psi>_S = U_dilation (|psi>_S |0>_F)."""
    u = measurement_dilation(basis, system, friend)
    # tensoring |0>_F selects the even columns (friend bit = 0)
    return Isometry(u.matrix[:, [0, 2]], (system, friend), (system,))


def born_probability(state, effects: Iterable[Effect]) -> float:
    """Probability Tr(E rho) of the joint effect, identity-padded elsewhere.

    Multiple effects must act on pairwise disjoint registers; they are
    combined by composition.  The result is clamped to [0, 1] when it
    lies within 1e-10 of that interval.
    """
    effects = list(effects)
    seen: set[str] = set()
    for e in effects:
        overlap = seen & set(e.labels())
        if overlap:
            raise RegisterError(f"effects overlap on registers {sorted(overlap)}")
        seen |= set(e.labels())
    if isinstance(state, StateVector):
        vec = state.amplitudes
        n = state.n_qubits
        out = vec
        for e in effects:
            pos = _positions(e.labels(), state.registers)
            out = apply_matrix_vec(out, e.matrix, pos, n)
        value = float(np.vdot(vec, out).real)
    elif isinstance(state, DensityOperator):
        rho = state.matrix
        n = state.n_qubits
        for e in effects:
            pos = _positions(e.labels(), state.registers)
            rho = left_multiply_density(rho, e.matrix, pos, n)
        value = float(np.trace(rho).real)
    else:
        raise TypeError(f"cannot take Born probability of {type(state).__name__}")
    return clamp_probability(value)


def clamp_probability(value: float) -> float:
    if -ATOL_OPERATOR <= value < 0.0:
        return 0.0
    if 1.0 < value <= 1.0 + ATOL_OPERATOR:
        return 1.0
    if value < -ATOL_OPERATOR or value > 1.0 + ATOL_OPERATOR:
        raise ValueError(f"probability {value!r} outside [0, 1]")
    return value


def partial_trace(rho: DensityOperator, keep: Sequence[str]) -> DensityOperator:
    """Reduced state on the registers named in keep (order preserved)."""
    keep = list(keep)
    if not keep:
        raise ValueError("cannot trace out every register")
    keep_pos = _positions(keep, rho.registers)
    n = rho.n_qubits
    t = rho.matrix.reshape((2,) * (2 * n))
    drop = [i for i in range(n) if i not in keep_pos]
    for offset, axis in enumerate(sorted(drop)):
        ax = axis - offset
        t = np.trace(t, axis1=ax, axis2=ax + (n - offset))
        # trace removes one row and one column axis; remaining axes shift
    kept_regs = [rho.registers[i] for i in sorted(keep_pos)]
    dim = 2 ** len(kept_regs)
    reduced = t.reshape(dim, dim)
    # reorder kept registers to the requested order
    if [r.label for r in kept_regs] != keep:
        perm = [[r.label for r in kept_regs].index(lab) for lab in keep]
        tt = reduced.reshape((2,) * (2 * len(kept_regs)))
        m = len(kept_regs)
        tt = np.transpose(tt, perm + [p + m for p in perm])
        reduced = tt.reshape(dim, dim)
        kept_regs = [kept_regs[i] for i in perm]
    return DensityOperator(reduced, kept_regs)


def isometry_equivalence_check(rho_s: DensityOperator, basis: ProjectiveBasis,
                               friend_basis: "ProjectiveBasis | None" = None) -> float:
    """Max discrepancy between measuring before or after a dilation.

    Compares Tr((V|b><b|V†) V rho V†) with Tr(|b><b| rho) over all
    outcomes b of the given basis, where V is the measurement-dilation
    isometry of the friend's measurement.  The two are equal for every
    state, so the returned value is bounded by 1e-12.
    """
    if rho_s.n_qubits != 1:
        raise ValueError("expected a single-qubit state")
    if friend_basis is None:
        friend_basis = computational_basis()
    sys_reg = rho_s.registers[0]
    friend_reg = Register("_friend", role="friend-memory")
    if friend_reg.label == sys_reg.label:
        friend_reg = Register("_friend2", role="friend-memory")
    v = dilation_isometry(friend_basis, sys_reg, friend_reg).matrix
    rho_sf = v @ rho_s.matrix @ v.conj().T
    worst = 0.0
    for ket in basis.kets:
        dilated = v @ ket
        lifted = float(np.real(dilated.conj() @ rho_sf @ dilated))
        direct = float(np.real(ket.conj() @ rho_s.matrix @ ket))
        worst = max(worst, abs(lifted - direct))
    return worst


# ---------------------------------------------------------------------------
# rational snapping


def snap_probability(value: float, max_denominator: int = SNAP_MAX_DENOMINATOR,
                     tol: float = SNAP_TOL) -> "Fraction | float":
    """Snap a probability to a small rational when one is within tol.

    Values that are not close to any rational with denominator at most
    max_denominator are returned unchanged as floats.
    """
    candidate = Fraction(value).limit_denominator(max_denominator)
    if abs(float(candidate) - value) < tol:
        return candidate
    return value


def format_number(value) -> str:
    """Exact p/q form for snapped rationals, 12 significant digits otherwise."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return str(value)
    return f"{float(value):.12g}"


# ---------------------------------------------------------------------------
# standard states, bases, and gates


def computational_basis(register: str | None = None) -> ProjectiveBasis:
    return ProjectiveBasis([[1, 0], [0, 1]], ["0", "1"], register, "computational")


def plus_minus_basis(register: str | None = None) -> ProjectiveBasis:
    s = 1 / math.sqrt(2)
    return ProjectiveBasis([[s, s], [s, -s]], ["+", "-"], register, "plus_minus")


def bell_basis() -> ProjectiveBasis:
    s = 1 / math.sqrt(2)
    kets = [
        [s, 0, 0, s],    # phi+
        [s, 0, 0, -s],   # phi-
        [0, s, s, 0],    # psi+
        [0, s, -s, 0],   # psi-
    ]
    return ProjectiveBasis(kets, ["phi+", "phi-", "psi+", "psi-"], None, "bell")


BASIS_BUILDERS = {
    "computational": computational_basis,
    "plus_minus": plus_minus_basis,
    "bell": lambda: bell_basis(),
}


def named_basis(name: str) -> ProjectiveBasis:
    try:
        builder = BASIS_BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown basis {name!r}") from None
    return builder() if name == "bell" else builder(None)


def zero_state(label: str = "S", **kw) -> StateVector:
    return StateVector([1, 0], (Register(label, **kw),))


def one_state(label: str = "S", **kw) -> StateVector:
    return StateVector([0, 1], (Register(label, **kw),))


def plus_state(label: str = "S", **kw) -> StateVector:
    s = 1 / math.sqrt(2)
    return StateVector([s, s], (Register(label, **kw),))


def minus_state(label: str = "S", **kw) -> StateVector:
    s = 1 / math.sqrt(2)
    return StateVector([s, -s], (Register(label, **kw),))


def hardy_state(label_a: str = "R", label_b: str = "S") -> StateVector:
    """(|00> + |01> + |10>)/sqrt(3): three zero constraints plus one support."""
    s = 1 / math.sqrt(3)
    return StateVector([s, s, s, 0], (Register(label_a), Register(label_b)))


def singlet_state(label_a: str = "R", label_b: str = "S") -> StateVector:
    s = 1 / math.sqrt(2)
    return StateVector([0, s, -s, 0], (Register(label_a), Register(label_b)))


def bell_phi_plus_state(label_a: str = "R", label_b: str = "S") -> StateVector:
    s = 1 / math.sqrt(2)
    return StateVector([s, 0, 0, s], (Register(label_a), Register(label_b)))


STATE_BUILDERS = {
    "zero": zero_state,
    "one": one_state,
    "plus": plus_state,
    "minus": minus_state,
    "hardy": hardy_state,
    "singlet": singlet_state,
    "bell_phi_plus": bell_phi_plus_state,
}


def named_state(name: str, labels: Sequence[str]) -> StateVector:
    try:
        builder = STATE_BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown state {name!r}") from None
    return builder(*labels)


def hadamard(register: Register) -> Unitary:
    s = 1 / math.sqrt(2)
    return Unitary(np.array([[s, s], [s, -s]]), (register,))


def cnot(control: Register, target: Register) -> Unitary:
    return Unitary(np.array([[1, 0, 0, 0],
                             [0, 1, 0, 0],
                             [0, 0, 0, 1],
                             [0, 0, 1, 0]]), (control, target))
