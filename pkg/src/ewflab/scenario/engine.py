"""Compilation of scenarios to circuits and two-time Born-rule tables.

The joint distribution over a tuple of outcome variables is defined by
sequential projection in circuit order: each queried variable's
projector is inserted at its event's position between the compiled
unitaries, and the probability of an assignment is the squared norm of
the resulting (unnormalized) vector.  Summing out the latest queried
variable reproduces the table without it; pairs whose records can never
meet get the same formula, which is what makes the inaccessible-pair
tables of these arguments executable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from ewflab import qcore
from ewflab.qcore import (
    DensityOperator,
    Register,
    StateVector,
    apply_matrix_vec,
    apply_unitary_density,
    clamp_probability,
    named_basis,
    sandwich_density,
    snap_probability,
)
from ewflab.scenario.model import Event, Scenario, ScenarioError

SUM_TOL = 1e-10


class UnrealizedVariableError(LookupError):
    """A queried outcome variable has no realized event under the settings."""

    def __init__(self, variable: str, settings: Mapping[str, int]):
        self.variable = variable
        self.settings = dict(settings)
        super().__init__(f"variable {variable!r} unrealized under {self.settings}")


class NoCopyEventError(LookupError):
    """tracking_check was pointed at a scenario without the copy event."""


@dataclass(frozen=True, eq=False)
class UnitaryStep:
    event: Event
    matrix: np.ndarray
    positions: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class ReadPoint:
    """Insertion point where an outcome variable's projector may be applied."""

    event: Event
    variable: str
    labels: tuple[str, ...]
    projectors: tuple[np.ndarray, ...]
    positions: tuple[int, ...]


@dataclass(frozen=True)
class Program:
    """Compiled circuit: initial state plus ordered unitary/read steps."""

    scenario: Scenario
    settings: tuple[tuple[str, int], ...]
    initial: np.ndarray
    steps: tuple[object, ...]

    def unitaries(self) -> list[np.ndarray]:
        return [s.matrix for s in self.steps if isinstance(s, UnitaryStep)]

    def read_point(self, variable: str) -> ReadPoint:
        for s in self.steps:
            if isinstance(s, ReadPoint) and s.variable == variable:
                return s
        raise UnrealizedVariableError(variable, dict(self.settings))

    def net_unitary(self) -> np.ndarray:
        """Product of all compiled unitaries, embedded on the full space."""
        n = len(self.scenario.registers)
        dim = 2 ** n
        total = np.eye(dim, dtype=complex)
        for step in self.steps:
            if isinstance(step, UnitaryStep):
                cols = [apply_matrix_vec(total[:, j].copy(), step.matrix,
                                         step.positions, n) for j in range(dim)]
                total = np.column_stack(cols)
        return total


def _resolve_settings(scenario: Scenario,
                      settings: Mapping[str, int] | None) -> dict[str, int]:
    assignment = dict(settings or {})
    for s in scenario.settings:
        if s.name not in assignment:
            raise ScenarioError(f"setting {s.name!r} not assigned")
        if assignment[s.name] not in s.values:
            raise ScenarioError(f"setting {s.name!r} cannot take value "
                                f"{assignment[s.name]!r}")
    for name in assignment:
        if name not in scenario.setting_names():
            raise ScenarioError(f"unknown setting {name!r}")
    return assignment


def _initial_vector(scenario: Scenario, event: Event,
                    override: "StateVector | None" = None) -> np.ndarray:
    """Full initial state in declared register order; memories start at |0>."""
    prep = event.state
    prep_labels = list(prep.registers)
    if override is not None:
        if list(override.labels()) != prep_labels:
            raise ScenarioError(
                f"override state registers {override.labels()} do not match "
                f"prepared registers {tuple(prep_labels)}")
        vec = override.amplitudes
    else:
        vec = prep.vector()
    all_labels = list(scenario.register_labels())
    rest = [lab for lab in all_labels if lab not in prep_labels]
    full = vec
    for _ in rest:
        full = np.kron(full, np.array([1.0, 0.0], dtype=complex))
    # reorder from (prep_labels + rest) to declared order
    current = prep_labels + rest
    perm = [current.index(lab) for lab in all_labels]
    n = len(all_labels)
    return full.reshape((2,) * n).transpose(perm).reshape(-1)


def _basis(event: Event) -> qcore.ProjectiveBasis:
    return named_basis(event.basis)


def compile_circuit(scenario: Scenario, settings: Mapping[str, int] | None = None,
                    copy_mode: str = "classical",
                    initial: "StateVector | None" = None) -> Program:
    """Resolve guards and lower events to unitaries and read points.

    friend_measure events become measurement dilations followed by a
    read point on the memory register; undo events become the adjoint of
    the dilation they reference; copy events become classical reads of
    the source's memory (or a CNOT plus a read when copy_mode is
    "unitary"); super_measure events become projective read points.
    """
    if copy_mode not in ("classical", "unitary"):
        raise ScenarioError(f"unknown copy mode {copy_mode!r}")
    assignment = _resolve_settings(scenario, settings)
    labels = list(scenario.register_labels())
    reg_by_label = {r.label: r for r in scenario.registers}

    def positions(labs: Sequence[str]) -> tuple[int, ...]:
        return tuple(labels.index(l) for l in labs)

    steps: list[object] = []
    initial_vec: np.ndarray | None = None
    dilations: dict[str, tuple[int, UnitaryStep]] = {}
    writes: dict[str, int] = {}  # register label -> index in steps of last write

    for event in scenario.ordered_events():
        if not event.realized(assignment):
            continue
        if event.kind == "prepare":
            initial_vec = _initial_vector(scenario, event, initial)
        elif event.kind == "friend_measure":
            basis = _basis(event)
            sys_regs = [reg_by_label[l] for l in event.systems]
            mem_regs = [reg_by_label[l] for l in event.memories]
            if basis.n_qubits == 1:
                u = qcore.measurement_dilation(basis, sys_regs[0], mem_regs[0])
            else:
                u = qcore.dilation_unitary(basis, sys_regs, mem_regs)
            step = UnitaryStep(event, u.matrix,
                               positions(event.systems + event.memories))
            steps.append(step)
            dilations[event.id] = (len(steps) - 1, step)
            for lab in event.memories:
                writes[lab] = len(steps) - 1
            if event.outcome:
                steps.append(_memory_read(event, event.outcome, basis,
                                          event.memories, positions))
        elif event.kind == "undo":
            target = scenario.event_by_id(event.target)
            if event.target not in dilations:
                raise ScenarioError(f"undo {event.id!r}: target {event.target!r} "
                                    f"not realized under {assignment}")
            dil_index, dil = dilations[event.target]
            for lab in target.memories:
                if writes.get(lab, -1) > dil_index:
                    raise ScenarioError(
                        f"undo {event.id!r}: memory register {lab!r} was reused "
                        f"after the measurement being reversed")
            steps.append(UnitaryStep(event, dil.matrix.conj().T, dil.positions))
        elif event.kind == "copy":
            mems = scenario.memory_registers(event.source)
            source_measure = _latest_measure_into(scenario, assignment, event, mems)
            basis = _basis(source_measure) if source_measure else None
            out_labels = basis.labels if basis else ("0", "1")
            if copy_mode == "classical":
                if event.outcome:
                    steps.append(_memory_read(event, event.outcome,
                                              basis, tuple(mems), positions,
                                              out_labels))
            else:
                if event.memory is None:
                    raise ScenarioError(f"copy {event.id!r} has no destination "
                                        f"register for unitary copying")
                src = mems[0]
                u = qcore.cnot(reg_by_label[src], reg_by_label[event.memory])
                steps.append(UnitaryStep(event, u.matrix,
                                         positions((src, event.memory))))
                writes[event.memory] = len(steps) - 1
                if event.outcome:
                    steps.append(_memory_read(event, event.outcome, basis,
                                              (event.memory,), positions,
                                              out_labels))
        elif event.kind == "super_measure":
            basis = _basis(event)
            projs = tuple(basis.projectors())
            steps.append(ReadPoint(event, event.outcome or event.id,
                                   basis.labels, projs, positions(event.systems)))
    if initial_vec is None:
        raise ScenarioError("scenario has no realized prepare event")
    return Program(scenario, tuple(sorted(assignment.items())), initial_vec,
                   tuple(steps))


def _memory_read(event: Event, variable: str, basis, memories: Sequence[str],
                 positions, labels: "tuple[str, ...] | None" = None) -> ReadPoint:
    """Computational-basis read of memory registers, labeled by outcome."""
    k = len(memories)
    dim = 2 ** k
    projs = []
    for idx in range(dim):
        p = np.zeros((dim, dim), dtype=complex)
        p[idx, idx] = 1.0
        projs.append(p)
    if labels is None:
        labels = basis.labels if basis is not None else tuple(str(i) for i in range(dim))
    return ReadPoint(event, variable, tuple(labels), tuple(projs),
                     positions(tuple(memories)))


def _latest_measure_into(scenario: Scenario, assignment: Mapping[str, int],
                         copy_event: Event, mems: Sequence[str]) -> Event | None:
    """The most recent realized friend_measure writing the copied memory."""
    best = None
    for e in scenario.ordered_events():
        if e.kind != "friend_measure" or not e.realized(assignment):
            continue
        if e.tick >= copy_event.tick:
            continue
        if set(e.memories) & set(mems):
            best = e
    return best


# ---------------------------------------------------------------------------
# correlation tables


class CorrelationTable:
    """Joint probabilities over an outcome-variable tuple.

    Entries are exact Fractions when snapping succeeded and floats
    otherwise.  Probabilities must be nonnegative and sum to one within
    1e-10 (before snapping).
    """

    def __init__(self, variables: Sequence[str],
                 labels: Mapping[str, Sequence[str]],
                 entries: Mapping[tuple, "Fraction | float"],
                 settings: Mapping[str, int] | None = None,
                 accessibility=None):
        self.variables = tuple(variables)
        self.labels = {v: tuple(labels[v]) for v in self.variables}
        self.entries = dict(entries)
        self.settings = dict(settings) if settings else {}
        self.accessibility = accessibility
        total = 0.0
        for key, p in self.entries.items():
            if float(p) < -SUM_TOL:
                raise ValueError(f"negative probability {p!r} at {key}")
            total += float(p)
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    def assignments(self) -> list[tuple]:
        return list(itertools.product(*(self.labels[v] for v in self.variables)))

    def prob(self, assignment: tuple) -> "Fraction | float":
        return self.entries.get(tuple(assignment), Fraction(0))

    @property
    def is_exact(self) -> bool:
        return all(isinstance(p, Fraction) for p in self.entries.values())

    def zeros(self) -> list[tuple]:
        return [a for a in self.assignments()
                if isinstance(self.prob(a), Fraction) and self.prob(a) == 0]

    def supports(self) -> list[tuple]:
        return [a for a in self.assignments() if float(self.prob(a)) > 0]

    def marginal(self, keep: Sequence[str]) -> "CorrelationTable":
        keep = tuple(keep)
        idx = [self.variables.index(v) for v in keep]
        entries: dict[tuple, object] = {}
        for a in self.assignments():
            key = tuple(a[i] for i in idx)
            entries[key] = entries.get(key, Fraction(0)) + self.prob(a)
        return CorrelationTable(keep, {v: self.labels[v] for v in keep},
                                entries, self.settings)

    def equal_entries(self, other: "CorrelationTable") -> bool:
        """Exact equality of distributions (variables and labels aligned)."""
        if self.variables != other.variables or self.labels != other.labels:
            return False
        return all(self.prob(a) == other.prob(a) for a in self.assignments())

    def __repr__(self):
        cond = f" | {self.settings}" if self.settings else ""
        return f"CorrelationTable({', '.join(self.variables)}{cond})"


def _run_pure(program: Program, chosen: Mapping[str, int]) -> float:
    """Squared norm of the projected path for one outcome assignment.

    chosen maps variable names to outcome indices; read points for
    unqueried variables are skipped, which is the two-time definition of
    their marginal.
    """
    n = len(program.scenario.registers)
    vec = program.initial
    for step in program.steps:
        if isinstance(step, UnitaryStep):
            vec = apply_matrix_vec(vec, step.matrix, step.positions, n)
        elif step.variable in chosen:
            proj = step.projectors[chosen[step.variable]]
            vec = apply_matrix_vec(vec, proj, step.positions, n)
    return clamp_probability(float(np.vdot(vec, vec).real))


def _run_density(program: Program, chosen: Mapping[str, int],
                 rho0: np.ndarray) -> float:
    n = len(program.scenario.registers)
    rho = rho0
    for step in program.steps:
        if isinstance(step, UnitaryStep):
            rho = apply_unitary_density(rho, step.matrix, step.positions, n)
        elif step.variable in chosen:
            proj = step.projectors[chosen[step.variable]]
            rho = sandwich_density(rho, proj, step.positions, n)
    return clamp_probability(float(np.trace(rho).real))


def _initial_density(scenario: Scenario, prep_event: Event,
                     override: DensityOperator) -> np.ndarray:
    labels = list(scenario.register_labels())
    prep_labels = list(prep_event.state.registers)
    if list(override.labels()) != prep_labels:
        raise ScenarioError("override density registers do not match the prepare event")
    rho = override.matrix
    rest = [lab for lab in labels if lab not in prep_labels]
    zero = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    for _ in rest:
        rho = np.kron(rho, zero)
    current = prep_labels + rest
    perm = [current.index(lab) for lab in labels]
    n = len(labels)
    t = rho.reshape((2,) * (2 * n))
    return t.transpose(perm + [p + n for p in perm]).reshape(rho.shape)


def event_distribution(scenario: Scenario,
                       settings: Mapping[str, int] | None = None,
                       variables: Sequence[str] = (),
                       initial: "StateVector | DensityOperator | None" = None,
                       decohere_agents: Sequence[str] = (),
                       copy_mode: str = "classical",
                       snap: bool = True) -> CorrelationTable:
    """Joint two-time distribution over the requested outcome variables.

    Raises UnrealizedVariableError when a requested variable's event is
    guarded off under the given settings.  decohere_agents lists agents
    whose (unqueried) friend measurements should be treated as actually
    collapsed; their outcomes are summed over instead of staying
    unitary, which is how an agent models observers on the classical
    side of their cut.
    """
    variables = tuple(variables)
    if not variables:
        raise ValueError("need at least one outcome variable")
    override_state = initial if isinstance(initial, StateVector) else None
    program = compile_circuit(scenario, settings, copy_mode, override_state)

    aux: list[str] = []
    for agent in decohere_agents:
        for e in scenario.events:
            if (e.kind == "friend_measure" and e.agent == agent and e.outcome
                    and e.realized(dict(program.settings))
                    and e.outcome not in variables and e.outcome not in aux):
                aux.append(e.outcome)
    queried = variables + tuple(aux)

    points = {v: program.read_point(v) for v in queried}
    labels = {v: points[v].labels for v in queried}

    rho0 = None
    if isinstance(initial, DensityOperator):
        prep = next(e for e in scenario.events if e.kind == "prepare")
        rho0 = _initial_density(scenario, prep, initial)

    entries: dict[tuple, float] = {}
    for combo in itertools.product(*(range(len(labels[v])) for v in queried)):
        chosen = dict(zip(queried, combo))
        if rho0 is not None:
            p = _run_density(program, chosen, rho0)
        else:
            p = _run_pure(program, chosen)
        key = tuple(labels[v][chosen[v]] for v in queried)
        entries[key] = p

    snapped: dict[tuple, object] = {}
    for key, p in entries.items():
        snapped[key] = snap_probability(p) if snap else p

    table = CorrelationTable(queried, labels, snapped,
                             dict(program.settings))
    if aux:
        table = table.marginal(variables)

    accessibility = None
    if len(variables) == 2:
        from ewflab.scenario.accessibility import classify_accessibility
        try:
            accessibility = classify_accessibility(scenario, variables,
                                                   dict(program.settings))
        except UnrealizedVariableError:
            accessibility = None
    return CorrelationTable(table.variables, table.labels, table.entries,
                            table.settings, accessibility)


def simulate_final_state(scenario: Scenario,
                         settings: Mapping[str, int] | None = None) -> np.ndarray:
    """Final state vector after all compiled unitaries (no projections)."""
    program = compile_circuit(scenario, settings)
    n = len(scenario.registers)
    vec = program.initial
    for step in program.steps:
        if isinstance(step, UnitaryStep):
            vec = apply_matrix_vec(vec, step.matrix, step.positions, n)
    return vec


# ---------------------------------------------------------------------------
# behaviors


class Behavior:
    """p(a,b|x,y) for binary settings and binary outcomes.

    No-signaling is checked on request, never enforced.
    """

    def __init__(self, tables: Mapping[tuple[int, int], CorrelationTable],
                 setting_names: tuple[str, str] = ("x", "y"),
                 variable_names: tuple[str, str] = ("a", "b")):
        self.setting_names = setting_names
        self.variable_names = variable_names
        self.tables = dict(tables)
        for xy in itertools.product((0, 1), repeat=2):
            if xy not in self.tables:
                raise ValueError(f"missing context {xy}")

    @classmethod
    def from_scenario(cls, scenario: Scenario,
                      variables: tuple[str, str] = ("a", "b"),
                      settings: tuple[str, str] = ("x", "y")) -> "Behavior":
        tables = {}
        for x, y in itertools.product((0, 1), repeat=2):
            tables[(x, y)] = event_distribution(
                scenario, {settings[0]: x, settings[1]: y}, variables)
        return cls(tables, settings, variables)

    @classmethod
    def from_entries(cls, entries: Mapping[tuple[int, int], Mapping[tuple, object]],
                     labels: Mapping[tuple[int, int], tuple[Sequence[str], Sequence[str]]],
                     variable_names: tuple[str, str] = ("a", "b")) -> "Behavior":
        tables = {}
        for xy, table_entries in entries.items():
            a_labels, b_labels = labels[xy]
            tables[xy] = CorrelationTable(
                variable_names,
                {variable_names[0]: a_labels, variable_names[1]: b_labels},
                table_entries, {"x": xy[0], "y": xy[1]})
        return cls(tables, variable_names=variable_names)

    def table(self, x: int, y: int) -> CorrelationTable:
        return self.tables[(x, y)]

    def prob(self, x: int, y: int, a, b):
        return self.tables[(x, y)].prob((a, b))

    def outcome_labels(self, x: int, y: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
        t = self.tables[(x, y)]
        return (t.labels[t.variables[0]], t.labels[t.variables[1]])

    def no_signaling_violation(self) -> float:
        """Largest marginal discrepancy across contexts (0 for no-signaling)."""
        worst = 0.0
        for x in (0, 1):
            m0 = self.tables[(x, 0)].marginal(self.tables[(x, 0)].variables[:1])
            m1 = self.tables[(x, 1)].marginal(self.tables[(x, 1)].variables[:1])
            for key in m0.entries:
                worst = max(worst, abs(float(m0.prob(key)) - float(m1.prob(key))))
        for y in (0, 1):
            m0 = self.tables[(0, y)].marginal(self.tables[(0, y)].variables[1:])
            m1 = self.tables[(1, y)].marginal(self.tables[(1, y)].variables[1:])
            for key in m0.entries:
                worst = max(worst, abs(float(m0.prob(key)) - float(m1.prob(key))))
        return worst


def pr_box() -> Behavior:
    """a xor b = x.y with uniform marginals; outcomes labeled 0/1."""
    entries = {}
    labels = {}
    for x, y in itertools.product((0, 1), repeat=2):
        table = {}
        for a, b in itertools.product((0, 1), repeat=2):
            ok = (a ^ b) == (x * y)
            table[(str(a), str(b))] = Fraction(1, 2) if ok else Fraction(0)
        entries[(x, y)] = table
        labels[(x, y)] = (("0", "1"), ("0", "1"))
    return Behavior.from_entries(entries, labels)


def deterministic_local_behavior(a0: str, a1: str, b0: str, b1: str) -> Behavior:
    """The local deterministic point with the given per-setting outcomes."""
    outcomes = {0: ("0", "1"), 1: ("+", "-")}
    choice = {("a", 0): a0, ("a", 1): a1, ("b", 0): b0, ("b", 1): b1}
    entries = {}
    labels = {}
    for x, y in itertools.product((0, 1), repeat=2):
        table = {}
        for a in outcomes[x]:
            for b in outcomes[y]:
                hit = (a == choice[("a", x)]) and (b == choice[("b", y)])
                table[(a, b)] = Fraction(1) if hit else Fraction(0)
        entries[(x, y)] = table
        labels[(x, y)] = (outcomes[x], outcomes[y])
    return Behavior.from_entries(entries, labels)


# ---------------------------------------------------------------------------
# scenario-level checks


def stalkee_predictions(input_state: "StateVector | None" = None):
    """Superobserver vs collapsed-branch predictions for the entangled outcome.

    The superobserver applies the Born rule to the dilated state and
    always predicts the dilated-plus projector with the probability of
    that overlap; an observer who takes their own measurement to have
    collapsed the state averages the same probability over the branches.
    Returns the pair (superobserver, friend) of snapped probabilities.
    """
    if input_state is None:
        input_state = qcore.plus_state("S")
    if input_state.n_qubits != 1:
        raise ValueError("expected a single-qubit input state")
    sys_reg = input_state.registers[0]
    mem_reg = Register("F", role="friend-memory", owner="Friend")
    basis = qcore.computational_basis()
    v = qcore.dilation_isometry(basis, sys_reg, mem_reg).matrix
    target = v @ qcore.plus_state(sys_reg.label).amplitudes  # the entangled ket
    dilated = v @ input_state.amplitudes
    wigner = abs(np.vdot(target, dilated)) ** 2
    friend = 0.0
    for idx, ket in enumerate(basis.kets):
        amp = np.vdot(ket, input_state.amplitudes)
        weight = abs(amp) ** 2
        if weight == 0.0:
            continue
        branch = np.zeros(4, dtype=complex)
        branch[idx * 2 + idx] = 1.0  # |b_k>|k> for the computational basis
        friend += weight * abs(np.vdot(target, branch)) ** 2
    return snap_probability(clamp_probability(float(wigner))), \
        snap_probability(clamp_probability(float(friend)))


def tracking_check(scenario: Scenario, copy_ref: str) -> bool:
    """Whether the copied outcome tracks its source exactly (p = delta).

    copy_ref names either the copy event's id or its outcome variable.
    Checked under every setting assignment that realizes the copy.
    """
    copies = [e for e in scenario.events if e.kind == "copy"
              and copy_ref in (e.id, e.outcome)]
    if not copies:
        raise NoCopyEventError(f"no copy event matching {copy_ref!r}")
    ok = True
    for copy_event in copies:
        source_var = None
        mems = scenario.memory_registers(copy_event.source)
        for e in scenario.events:
            if e.kind == "friend_measure" and set(e.memories) & set(mems):
                source_var = e.outcome
        if source_var is None:
            raise NoCopyEventError(f"copy {copy_event.id!r} has no measured source")
        for assignment in scenario.setting_assignments():
            if not copy_event.realized(assignment):
                continue
            table = event_distribution(scenario, assignment,
                                       (source_var, copy_event.outcome))
            for src_val, copy_val in table.assignments():
                p = table.prob((src_val, copy_val))
                if src_val != copy_val and p != 0:
                    ok = False
    return ok


@dataclass(frozen=True)
class InvarianceCheck:
    description: str
    passed: bool
    detail: str = ""


def local_agency_checks(scenario: Scenario,
                        friend_pair: tuple[str, str] = ("c", "d"),
                        cross_pairs: Sequence[tuple[tuple[str, str], str]] = (
                            (("c", "b"), "x"), (("a", "d"), "y")),
                        ) -> list[InvarianceCheck]:
    """Setting-marginal invariance of the computed tables.

    The friends' pair table must be identical across every setting
    assignment, and each cross pair's table must not depend on the named
    remote setting.  Equality is exact (on snapped rationals).
    """
    checks: list[InvarianceCheck] = []
    assignments = scenario.setting_assignments()

    reference = None
    passed = True
    for assignment in assignments:
        t = event_distribution(scenario, assignment, friend_pair)
        if reference is None:
            reference = t
        elif not reference.equal_entries(t):
            passed = False
    checks.append(InvarianceCheck(
        f"p{friend_pair} identical across all setting assignments", passed))

    for (pair, remote) in cross_pairs:
        passed = True
        groups: dict[tuple, CorrelationTable] = {}
        for assignment in assignments:
            try:
                t = event_distribution(scenario, assignment, pair)
            except UnrealizedVariableError:
                continue
            key = tuple(sorted((k, v) for k, v in assignment.items()
                               if k != remote))
            if key in groups and not groups[key].equal_entries(t):
                passed = False
            groups.setdefault(key, t)
        checks.append(InvarianceCheck(
            f"p{pair} independent of setting {remote!r}", passed))
    return checks
