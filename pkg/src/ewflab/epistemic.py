"""Nested-knowledge inference for the fixed-measurement Hardy scenario.

Statements are nested "agent knows" formulas over outcome atoms and
implications.  Each agent computes Born-rule zeros with observers on
their classical side treated as actually collapsed and observers on
their quantum side treated unitarily (their Heisenberg cut); a
consistency rule then lets an agent adopt another agent's knowledge
when everyone involved sits on their classical side.  Forward chaining
to a fixed point either derives an agent knowing two different values
for one outcome, or it does not; every rule and seed can be ablated.

Knowledge is monotone: nothing is retracted when a measurement is later
reversed, so the timing of undo operations plays no role here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from ewflab.scenario.engine import event_distribution
from ewflab.scenario.model import Scenario

DEFAULT_DEPTH_BOUND = 3


class DepthBoundExceededError(RuntimeError):
    """A derivation produced a statement nested deeper than the bound."""


class CutTableError(ValueError):
    """Malformed cut table (self-quantum agent, or missing agent)."""


# ---------------------------------------------------------------------------
# statements


@dataclass(frozen=True)
class Atom:
    variable: str
    value: str

    def render(self) -> str:
        return f"{self.variable}={self.value}"

    @property
    def depth(self) -> int:
        return 0


@dataclass(frozen=True)
class Implies:
    antecedent: "Atom | Implies"
    consequent: "Atom | Implies"

    def __post_init__(self):
        for side in (self.antecedent, self.consequent):
            if isinstance(side, Knows):
                raise ValueError("knowledge operators cannot appear inside =>")

    def render(self) -> str:
        return f"{self.antecedent.render()} => {self.consequent.render()}"

    @property
    def depth(self) -> int:
        return 0


@dataclass(frozen=True)
class Knows:
    agent: str
    body: "Atom | Implies | Knows"

    def render(self) -> str:
        return f"K[{self.agent}]({self.body.render()})"

    @property
    def depth(self) -> int:
        return 1 + self.body.depth


Statement = Atom | Implies | Knows


def atoms_of(statement: Statement) -> list[Atom]:
    if isinstance(statement, Atom):
        return [statement]
    if isinstance(statement, Implies):
        return atoms_of(statement.antecedent) + atoms_of(statement.consequent)
    return atoms_of(statement.body)


# ---------------------------------------------------------------------------
# cut tables


@dataclass(frozen=True)
class CutTable:
    """Who each agent treats as a quantum system, plus outcome ownership."""

    quantum: tuple[tuple[str, frozenset[str]], ...]
    owners: tuple[tuple[str, str], ...]  # outcome variable -> owning agent

    @classmethod
    def build(cls, quantum: Mapping[str, Iterable[str]],
              owners: Mapping[str, str]) -> "CutTable":
        for agent, others in quantum.items():
            if agent in others:
                raise CutTableError(f"agent {agent!r} cannot view itself as quantum")
        return cls(tuple(sorted((a, frozenset(q)) for a, q in quantum.items())),
                   tuple(sorted(owners.items())))

    def agents(self) -> list[str]:
        return [a for a, _ in self.quantum]

    def quantum_side(self, agent: str) -> frozenset[str]:
        for a, q in self.quantum:
            if a == agent:
                return q
        raise CutTableError(f"cut table has no entry for agent {agent!r}")

    def views_classically(self, observer: str, subject: str) -> bool:
        return subject not in self.quantum_side(observer)

    def owner(self, variable: str) -> str:
        for v, a in self.owners:
            if v == variable:
                return a
        raise CutTableError(f"no owner recorded for outcome {variable!r}")

    def with_quantum(self, observer: str, subject: str) -> "CutTable":
        """Copy with one more agent moved to the observer's quantum side."""
        if observer == subject:
            raise CutTableError(f"agent {observer!r} cannot view itself as quantum")
        updated = {a: set(q) for a, q in self.quantum}
        updated[observer].add(subject)
        return CutTable.build(updated, dict(self.owners))


# ---------------------------------------------------------------------------
# knowledge bases with provenance


@dataclass(frozen=True)
class Provenance:
    kind: str  # "seed" or "derived"
    family: str | None = None
    rule: str | None = None
    premises: tuple[Statement, ...] = ()


class KnowledgeBase:
    """Duplicate-free statement set with replayable provenance.

    owners, when known (set by seed_knowledge), maps each outcome
    variable to the agent who observed it; contradiction detection uses
    it to report the agent contradicted about their own outcome.
    """

    def __init__(self, owners: Mapping[str, str] | None = None):
        self._entries: dict[Statement, Provenance] = {}
        self.owners: dict[str, str] = dict(owners or {})

    def add(self, statement: Statement, provenance: Provenance) -> bool:
        if statement in self._entries:
            return False
        self._entries[statement] = provenance
        return True

    def __contains__(self, statement: Statement) -> bool:
        return statement in self._entries

    def __len__(self):
        return len(self._entries)

    def statements(self) -> list[Statement]:
        return list(self._entries)

    def provenance(self, statement: Statement) -> Provenance:
        return self._entries[statement]

    def seeds(self) -> list[Statement]:
        return [s for s, p in self._entries.items() if p.kind == "seed"]

    def copy(self) -> "KnowledgeBase":
        kb = KnowledgeBase(self.owners)
        kb._entries = dict(self._entries)
        return kb

    def without_family(self, family: str) -> "KnowledgeBase":
        """Drop a seed family (including its protocol-knowledge copies)."""
        kb = KnowledgeBase(self.owners)
        for s, p in self._entries.items():
            if p.kind == "seed" and p.family == family:
                continue
            kb._entries[s] = p
        return kb


# ---------------------------------------------------------------------------
# inference rules


@dataclass(frozen=True)
class InferenceRule:
    """Named rule: premises and side conditions are encoded in apply().

    apply yields (conclusion, premises) pairs; side conditions consult
    only the cut table.
    """

    name: str
    apply: Callable[[KnowledgeBase, CutTable], Iterable[tuple[Statement, tuple[Statement, ...]]]]


def _rule_consistency_atom(kb: KnowledgeBase, cuts: CutTable):
    for s in kb.statements():
        if (isinstance(s, Knows) and isinstance(s.body, Knows)
                and isinstance(s.body.body, Atom)):
            w, u, atom = s.agent, s.body.agent, s.body.body
            if (cuts.views_classically(w, u)
                    and cuts.views_classically(w, cuts.owner(atom.variable))):
                yield Knows(w, atom), (s,)


def _rule_consistency_implication(observer_conclusion: bool):
    def apply(kb: KnowledgeBase, cuts: CutTable):
        for s in kb.statements():
            if (isinstance(s, Knows) and isinstance(s.body, Knows)
                    and isinstance(s.body.body, Implies)):
                w, u, impl = s.agent, s.body.agent, s.body.body
                owners_ok = all(cuts.views_classically(w, cuts.owner(a.variable))
                                for a in atoms_of(impl))
                if cuts.views_classically(w, u) and owners_ok:
                    holder = w if observer_conclusion else u
                    yield Knows(holder, impl), (s,)
    return apply


def _rule_modus_ponens(kb: KnowledgeBase, cuts: CutTable):
    by_agent: dict[str, list[Knows]] = {}
    for s in kb.statements():
        if isinstance(s, Knows) and not isinstance(s.body, Knows):
            by_agent.setdefault(s.agent, []).append(s)
    for agent, stmts in by_agent.items():
        implications = [s for s in stmts if isinstance(s.body, Implies)]
        bodies = {s.body for s in stmts}
        for imp in implications:
            if imp.body.antecedent in bodies:
                premise = Knows(agent, imp.body.antecedent)
                yield Knows(agent, imp.body.consequent), (premise, imp)


def _rule_transitivity(kb: KnowledgeBase, cuts: CutTable):
    by_agent: dict[str, list[Knows]] = {}
    for s in kb.statements():
        if isinstance(s, Knows) and isinstance(s.body, Implies):
            by_agent.setdefault(s.agent, []).append(s)
    for agent, stmts in by_agent.items():
        for s1, s2 in itertools.product(stmts, stmts):
            if s1.body.consequent == s2.body.antecedent:
                conclusion = Implies(s1.body.antecedent, s2.body.consequent)
                if conclusion.antecedent != conclusion.consequent:
                    yield Knows(agent, conclusion), (s1, s2)


def _rule_nested_lifting(kb: KnowledgeBase, cuts: CutTable):
    # every agent can reproduce another agent's reasoning, i.e. the
    # implications the other agent derived; knowledge of another agent's
    # raw outcome values travels only through seeded protocol statements
    agents = cuts.agents()
    for s in kb.statements():
        if isinstance(s, Knows) and isinstance(s.body, Implies):
            for w in agents:
                if w != s.agent:
                    yield Knows(w, s), (s,)


RULE_CONSISTENCY_ATOM = "consistency-atom"
RULE_CONSISTENCY_IMPLICATION = "consistency-implication"
RULE_MODUS_PONENS = "modus-ponens"
RULE_TRANSITIVITY = "transitivity"
RULE_NESTED_LIFTING = "nested-lifting"

CONSISTENCY_RULES = (RULE_CONSISTENCY_ATOM, RULE_CONSISTENCY_IMPLICATION)


def default_rules(consistency_concludes: str = "observer") -> list[InferenceRule]:
    """The standard five-rule set.

    consistency_concludes selects who holds the adopted implication:
    "observer" (the outer agent, the form every step of the argument
    actually needs) or "source" (the inner agent, the literal reading of
    the implication-form consistency rule).
    """
    if consistency_concludes not in ("observer", "source"):
        raise ValueError(f"unknown consistency mode {consistency_concludes!r}")
    return [
        InferenceRule(RULE_CONSISTENCY_ATOM, _rule_consistency_atom),
        InferenceRule(RULE_CONSISTENCY_IMPLICATION,
                      _rule_consistency_implication(
                          consistency_concludes == "observer")),
        InferenceRule(RULE_MODUS_PONENS, _rule_modus_ponens),
        InferenceRule(RULE_TRANSITIVITY, _rule_transitivity),
        InferenceRule(RULE_NESTED_LIFTING, _rule_nested_lifting),
    ]


def ablate(rules: Sequence[InferenceRule], names: Iterable[str]) -> list[InferenceRule]:
    """Remove rules by name; "consistency" removes both consistency forms."""
    drop: set[str] = set()
    for name in names:
        if name == "consistency":
            drop.update(CONSISTENCY_RULES)
        else:
            drop.add(name)
    known = {r.name for r in default_rules()} | {"consistency"}
    unknown = set(names) - known
    if unknown:
        raise ValueError(f"unknown rule names {sorted(unknown)}")
    return [r for r in rules if r.name not in drop]


# ---------------------------------------------------------------------------
# seeding from a scenario


@dataclass(frozen=True)
class WingStructure:
    """The four-agent chain structure of a fixed-measurement scenario."""

    friend_left: tuple[str, str]   # (agent, outcome variable)
    friend_right: tuple[str, str]
    super_left: tuple[str, str]
    super_right: tuple[str, str]

    def owners(self) -> dict[str, str]:
        return {var: agent for agent, var in
                (self.friend_left, self.friend_right,
                 self.super_left, self.super_right)}


def wing_structure(scenario: Scenario) -> WingStructure | None:
    """Identify the two-wing friend/superobserver structure, if present."""
    friend_measures = [e for e in scenario.events if e.kind == "friend_measure"
                       and scenario.agent(e.agent).role == "friend"]
    supers = [e for e in scenario.events if e.kind == "super_measure"]
    if len(friend_measures) != 2 or len(supers) != 2:
        return None
    sites = [e.site for e in friend_measures]
    if len(set(sites)) != 2:
        return None
    left, right = sites
    def pick(events, site):
        return next(e for e in events if e.site == site)
    fl, fr = pick(friend_measures, left), pick(friend_measures, right)
    sl, sr = pick(supers, left), pick(supers, right)
    return WingStructure((fl.agent, fl.outcome), (fr.agent, fr.outcome),
                         (sl.agent, sl.outcome), (sr.agent, sr.outcome))


def standard_cuts(scenario: Scenario) -> CutTable:
    """The cut placement under which every agent's seed is computable.

    Each superobserver treats the friend whose measurement they undo as
    quantum; the friend reasoning toward the far superobserver treats
    the far friend as quantum; the far superobserver treats both friends
    as quantum; the remaining friend needs no quantum systems at all.
    """
    wings = wing_structure(scenario)
    if wings is None:
        raise ValueError("scenario lacks the two-wing structure")
    (charlie, _), (debbie, _) = wings.friend_left, wings.friend_right
    (alice, _), (bob, _) = wings.super_left, wings.super_right
    return CutTable.build(
        {alice: {charlie}, bob: {charlie, debbie},
         charlie: {debbie}, debbie: set()},
        wings.owners())


def _implication_seed(scenario: Scenario, cuts: CutTable, knower: str,
                      own_var: str, other_var: str):
    """Born-rule zeros of the (own, other) pair, computed under the
    knower's cut, turned into implications with the knower's own outcome
    as antecedent."""
    decohere = []
    for event in scenario.events:
        if event.kind != "friend_measure" or event.outcome in (own_var, other_var):
            continue
        if cuts.views_classically(knower, event.agent):
            decohere.append(event.agent)
    table = event_distribution(scenario, variables=(own_var, other_var),
                               decohere_agents=decohere)
    implications = []
    for own_val, other_val in table.assignments():
        if table.prob((own_val, other_val)) == 0:
            negated = [l for l in table.labels[other_var] if l != other_val]
            implications.append(Implies(Atom(own_var, own_val),
                                        Atom(other_var, negated[0])))
    return implications


def seed_knowledge(scenario: Scenario, cuts: CutTable,
                   postselect: Mapping[str, str] | None = None) -> KnowledgeBase:
    """Seed each agent's Born-rule implications plus post-selection atoms.

    Follows the reasoning cycle super_left -> friend_right -> friend_left
    -> super_right: each agent knows the implications licensed by the
    zeros of the pair (their own outcome, the next agent's outcome),
    computed under their own cut.  Post-selection defaults to the
    support fact refuted by the possibilistic chain, when there is one.
    Every seeded statement is mirrored as protocol knowledge
    K[W](K[U](s)) for every other agent W.
    """
    wings = wing_structure(scenario)
    kb = KnowledgeBase(wings.owners() if wings else None)
    if wings is None:
        return kb
    for agent in scenario.agents:
        cuts.quantum_side(agent.name)  # raises CutTableError when missing

    cycle = [wings.super_left, wings.friend_right, wings.friend_left,
             wings.super_right]
    seeded: list[tuple[str, Statement]] = []
    for (agent, var), (_, next_var) in zip(cycle, cycle[1:]):
        for impl in _implication_seed(scenario, cuts, agent, var, next_var):
            seeded.append((f"implication:{agent}", Knows(agent, impl)))

    if postselect is None:
        postselect = _chain_postselection(scenario, wings)
    for var, value in sorted((postselect or {}).items()):
        owner = cuts.owner(var)
        seeded.append((f"postselect:{owner}", Knows(owner, Atom(var, value))))

    agents = [a.name for a in scenario.agents]
    for family, statement in seeded:
        kb.add(statement, Provenance("seed", family))
        for w in agents:
            if w != statement.agent:
                kb.add(Knows(w, statement), Provenance("seed", family))
    return kb


def _chain_postselection(scenario: Scenario, wings: WingStructure):
    """Post-select on the support fact the implication chain refutes."""
    from ewflab import possibilistic

    pairs = [
        (wings.friend_left[1], wings.friend_right[1]),
        (wings.friend_left[1], wings.super_right[1]),
        (wings.super_left[1], wings.friend_right[1]),
        (wings.super_left[1], wings.super_right[1]),
    ]
    tables = [event_distribution(scenario, variables=pair) for pair in pairs]
    report = possibilistic.find_contradiction(
        possibilistic.extract_implications(tables))
    if report is None:
        return None
    (u, uv), (w, wv) = report.support.literals()
    return {u: uv, w: wv}


# ---------------------------------------------------------------------------
# forward chaining


def infer_fixpoint(kb: KnowledgeBase, rules: Sequence[InferenceRule],
                   cuts: CutTable,
                   depth_bound: int = DEFAULT_DEPTH_BOUND) -> KnowledgeBase:
    """Forward-chain the rules to a fixed point.

    Termination is guaranteed by the depth bound and the finite outcome
    alphabet; a rule whose conclusion exceeds the bound is an error, not
    a silent truncation.  The result is independent of rule order.
    """
    if depth_bound < 2:
        raise ValueError("depth bound must be at least 2")
    for s in kb.statements():
        if s.depth > depth_bound:
            raise DepthBoundExceededError(f"seed {s.render()} exceeds depth "
                                          f"{depth_bound}")
    out = kb.copy()
    changed = True
    while changed:
        changed = False
        for rule in rules:
            for conclusion, premises in list(rule.apply(out, cuts)):
                if conclusion in out:
                    continue
                if conclusion.depth > depth_bound:
                    raise DepthBoundExceededError(
                        f"rule {rule.name} derived {conclusion.render()} at "
                        f"depth {conclusion.depth} > bound {depth_bound}")
                out.add(conclusion, Provenance("derived", None, rule.name,
                                               tuple(premises)))
                changed = True
    return out


@dataclass(frozen=True)
class Contradiction:
    agent: str
    variable: str
    values: frozenset[str]
    statements: tuple[Statement, ...]

    def render(self) -> str:
        vals = ", ".join(sorted(self.values))
        return f"{self.agent} knows both values {{{vals}}} for outcome {self.variable}"


def detect_contradiction(kb: KnowledgeBase) -> Contradiction | None:
    """An agent knowing two different values of an outcome they observed.

    When the knowledge base records outcome ownership, only an agent's
    knowledge about their own outcome counts (the symmetric protocol
    seeding also leaves remote agents doubly informed, which is a
    consequence, not the core inconsistency); without ownership
    information any doubly-known outcome is reported.
    """
    known: dict[tuple[str, str], dict[str, Statement]] = {}
    for s in kb.statements():
        if isinstance(s, Knows) and isinstance(s.body, Atom):
            key = (s.agent, s.body.variable)
            known.setdefault(key, {})[s.body.value] = s
    for (agent, variable), values in sorted(known.items()):
        if kb.owners and kb.owners.get(variable) != agent:
            continue
        if len(values) > 1:
            return Contradiction(agent, variable, frozenset(values),
                                 tuple(values[v] for v in sorted(values)))
    return None


# ---------------------------------------------------------------------------
# explanations


@dataclass(frozen=True)
class DerivationTree:
    statement: Statement
    provenance: Provenance
    children: tuple["DerivationTree", ...]

    def derived_steps(self) -> int:
        return (0 if self.provenance.kind == "seed" else 1) + \
            sum(c.derived_steps() for c in self.children)

    def rule_sequence(self) -> list[str]:
        """Rules applied, in dependency (topological) order."""
        seq: list[str] = []
        for c in self.children:
            seq.extend(c.rule_sequence())
        if self.provenance.kind == "derived":
            seq.append(self.provenance.rule)
        return seq

    def linearize(self) -> list["DerivationTree"]:
        """Seeds first, then each rule application after its premises."""
        order: list[DerivationTree] = []
        seen: set[Statement] = set()

        def visit(node: "DerivationTree"):
            for child in node.children:
                visit(child)
            if node.statement not in seen:
                seen.add(node.statement)
                order.append(node)

        visit(self)
        return order

    def to_markdown(self) -> str:
        lines = []
        for i, node in enumerate(self.linearize(), 1):
            if node.provenance.kind == "seed":
                origin = f"seed ({node.provenance.family})"
            else:
                origin = f"by {node.provenance.rule}"
            lines.append(f"{i}. {node.statement.render()}  [{origin}]")
        return "\n".join(lines)


def explain(kb: KnowledgeBase, statement: Statement) -> DerivationTree:
    """Provenance tree of a statement, down to its seeds."""
    if statement not in kb:
        raise KeyError(f"statement {statement.render()} not in the knowledge base")
    prov = kb.provenance(statement)
    children = tuple(explain(kb, p) for p in prov.premises)
    return DerivationTree(statement, prov, children)
