"""Command-line driver.

Commands load a built-in or file scenario, run one analysis, and emit
tables, certificates, and derivations as CSV or Markdown.  Exit codes:
0 = analysis ran and found no contradiction or infeasibility, 2 = a
contradiction or infeasibility was established (the expected outcome
for the no-go demonstrations, so CI can assert it), 1 = usage or input
error.  Identical invocations (including --seed) produce byte-identical
output.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from ewflab import epistemic, possibilistic
from ewflab import feasibility as fea
from ewflab.qcore import DensityOperator, Register, format_number
from ewflab.scenario import (
    Scenario,
    ScenarioError,
    UnknownScenarioError,
    UnrealizedVariableError,
    accessibility_map,
    event_distribution,
    local_agency_checks,
    lookup,
)
from ewflab.scenario import io as scenario_io
from ewflab.scenario.gao import gao_run
from ewflab.epistemic import wing_structure

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOGO = 2


class CliError(Exception):
    """User-facing input or usage problem (exit code 1)."""


def _load_scenario(ref: str) -> Scenario:
    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        problems = scenario_io.validate_file(path)
        if problems:
            raise CliError(f"invalid scenario file {ref}:\n  " +
                           "\n  ".join(problems))
        return scenario_io.load(path)
    try:
        return lookup(ref)
    except UnknownScenarioError as exc:
        raise CliError(str(exc.args[0])) from None


def _parse_settings(text: str | None) -> dict[str, int]:
    if not text:
        return {}
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise CliError(f"bad settings fragment {part!r}, expected name=value")
        name, value = part.split("=", 1)
        try:
            out[name.strip()] = int(value)
        except ValueError:
            raise CliError(f"setting value {value!r} is not an integer") from None
    return out


def _default_settings(scenario: Scenario, given: dict[str, int]) -> dict[str, int]:
    """Fill unspecified settings with their largest value (the undo branch)."""
    assignment = dict(given)
    for s in scenario.settings:
        assignment.setdefault(s.name, max(s.values))
    return assignment


def _standard_pairs(scenario: Scenario) -> list[tuple[str, str]]:
    wings = wing_structure(scenario)
    if wings is not None:
        c, d = wings.friend_left[1], wings.friend_right[1]
        a, b = wings.super_left[1], wings.super_right[1]
        return [(c, d), (c, b), (a, d), (a, b)]
    return []


def _pair_tables(scenario: Scenario, settings: dict[str, int]):
    pairs = _standard_pairs(scenario)
    if pairs:
        return [event_distribution(scenario, settings, pair) for pair in pairs]
    variables = scenario.outcome_variables()
    if not variables:
        raise CliError(f"scenario {scenario.name!r} declares no outcome variables")
    return [event_distribution(scenario, settings, variables)]


def _implication_text(table, assignment) -> str:
    if len(table.variables) != 2:
        return ""
    p = table.prob(assignment)
    u, v = table.variables
    alpha, beta = assignment
    if isinstance(p, Fraction) and p == 0:
        negated = [l for l in table.labels[v] if l != beta][0]
        return f"{u}={alpha} => {v}={negated}"
    return ""


def _settings_text(settings: dict[str, int]) -> str:
    return ",".join(f"{k}={v}" for k, v in sorted(settings.items())) or "-"


def _tables_csv(tables) -> str:
    lines = ["settings,variables,assignment,probability"]
    for table in tables:
        for assignment in table.assignments():
            lines.append(",".join([
                _settings_text(table.settings),
                " ".join(table.variables),
                " ".join(assignment),
                format_number(table.prob(assignment)),
            ]))
    return "\n".join(lines) + "\n"


def _tables_markdown(tables) -> str:
    blocks = []
    for table in tables:
        header = f"### p({', '.join(table.variables)})"
        cond = _settings_text(table.settings)
        if cond != "-":
            header += f" given {cond}"
        lines = [header, "", "| settings | prediction | implication |",
                 "| --- | --- | --- |"]
        for assignment in table.assignments():
            pred = (f"p({', '.join(f'{v}={a}' for v, a in zip(table.variables, assignment))})"
                    f" = {format_number(table.prob(assignment))}")
            lines.append(f"| {cond} | {pred} | "
                         f"{_implication_text(table, assignment)} |")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_tables(args) -> int:
    scenario = _load_scenario(args.scenario)
    settings = _parse_settings(args.settings)
    if args.vars:
        variables = tuple(v.strip() for v in args.vars.split(","))
        tables = [event_distribution(
            scenario, _default_settings(scenario, settings), variables)]
    elif scenario.settings and not settings:
        tables = []
        for assignment in scenario.setting_assignments():
            tables.extend(_pair_tables(scenario, assignment))
    else:
        tables = _pair_tables(scenario, _default_settings(scenario, settings))
    text = _tables_csv(tables) if args.format == "csv" else _tables_markdown(tables)
    _emit(text, args.out)
    return EXIT_OK


def cmd_contradiction(args) -> int:
    scenario = _load_scenario(args.scenario)
    settings = _default_settings(scenario, _parse_settings(args.settings))
    pairs = _standard_pairs(scenario)
    if not pairs:
        raise CliError(f"scenario {scenario.name!r} has no two-wing structure "
                       f"to chain over")
    tables = [event_distribution(scenario, settings, pair) for pair in pairs]
    graph = possibilistic.extract_implications(tables)
    report = possibilistic.find_contradiction(graph)
    if report is None:
        _emit("no contradiction\n", args.out)
        return EXIT_OK
    _emit(report.to_markdown() + "\n", args.out)
    return EXIT_NOGO


def cmd_lf_check(args) -> int:
    scenario = _load_scenario(args.scenario)
    lines = ["# Setting-marginal invariance", ""]
    ok = True
    for check in local_agency_checks(scenario):
        ok = ok and check.passed
        lines.append(f"- {check.description}: {'pass' if check.passed else 'FAIL'}")
    lines.append("")
    settings = _default_settings(scenario, {})
    tables = [event_distribution(scenario, settings, pair)
              for pair in _standard_pairs(scenario)]
    graph = possibilistic.extract_implications(tables)
    report = possibilistic.find_contradiction(graph)
    lines.append(f"# Chain at {_settings_text(settings)}")
    lines.append("")
    if report is None:
        lines.append("no contradiction")
        _emit("\n".join(lines) + "\n", args.out)
        return EXIT_OK if ok else EXIT_ERROR
    lines.append(report.to_markdown())
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_NOGO


def _load_cuts(scenario: Scenario, path: str | None) -> epistemic.CutTable:
    if path is None:
        return epistemic.standard_cuts(scenario)
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read cut table {path}: {exc}") from None
    wings = wing_structure(scenario)
    if wings is None:
        raise CliError("cut tables apply to two-wing scenarios only")
    return epistemic.CutTable.build(
        {agent: set(quantum) for agent, quantum in data.items()},
        wings.owners())


def cmd_epistemic(args) -> int:
    scenario = _load_scenario(args.scenario)
    cuts = _load_cuts(scenario, args.cuts)
    try:
        rules = epistemic.ablate(epistemic.default_rules(), args.ablate or [])
    except ValueError as exc:
        raise CliError(str(exc)) from None
    kb = epistemic.seed_knowledge(scenario, cuts)
    for family in args.drop_seed or []:
        kb = kb.without_family(family)
    fixpoint = epistemic.infer_fixpoint(kb, rules, cuts)
    lines = [f"seeds: {len(kb.seeds())}",
             f"fixpoint statements: {len(fixpoint)}", ""]
    contradiction = epistemic.detect_contradiction(fixpoint)
    if contradiction is None:
        lines.append("no contradiction")
        _emit("\n".join(lines) + "\n", args.out)
        return EXIT_OK
    lines.append(f"contradiction: {contradiction.render()}")
    lines.append("")
    for statement in contradiction.statements:
        tree = epistemic.explain(fixpoint, statement)
        lines.append(f"## Derivation of {statement.render()}")
        lines.append("")
        lines.append(tree.to_markdown())
        lines.append("")
    _emit("\n".join(lines), args.out)
    return EXIT_NOGO


def _certificate_json(result: fea.MarginalFeasibility) -> str:
    if result.feasible:
        names = result.spec.variables
        payload = {
            "status": "feasible",
            "witness": {
                ",".join(f"{n}={v}" for n, v in zip(names, key)):
                    format_number(p)
                for key, p in sorted(result.joint.items())},
        }
    else:
        payload = {
            "status": "infeasible",
            "farkas_multipliers": result.result.certificate.to_strings(),
            "verified": result.verify(),
        }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def cmd_feasibility(args) -> int:
    scenario = _load_scenario(args.scenario)
    pairs = _standard_pairs(scenario)
    if not pairs:
        raise CliError(f"scenario {scenario.name!r} has no two-wing structure")
    settings = _default_settings(scenario, _parse_settings(args.settings))
    drop = None
    if args.drop:
        drop = tuple(v.strip() for v in args.drop.split(","))
        if drop not in pairs:
            raise CliError(f"--drop {args.drop!r} is not one of the pairwise laws")
    spec = fea.scenario_marginal_spec(scenario, pairs, settings, drop=drop)
    result = fea.pairwise_marginal_feasibility(spec)
    if not result.result.verify(result.lp):
        raise RuntimeError("certificate failed exact re-verification")
    _emit(_certificate_json(result), args.out)
    return EXIT_OK if result.feasible else EXIT_NOGO


def cmd_gao(args) -> int:
    result = gao_run(args.policy, args.k, args.trials, args.seed, args.foliation)
    lines = [f"policy: {args.policy}",
             f"variables: {' '.join(result.variables)}"]
    if result.exact is not None:
        lines.append("exact law:")
        for key in sorted(result.exact):
            lines.append(f"  {' '.join(key)}: {format_number(result.exact[key])}")
    lines.append(f"empirical ({result.trials} trials, seed {args.seed}):")
    for key in sorted(result.counts):
        lines.append(f"  {' '.join(key)}: {format_number(result.frequency(key))}")
    last = result.variables[-2]
    anti = sum(result.counts.get(k, 0) for k in result.counts
               if k[-2] != k[-1]) / result.trials
    lines.append(f"empirical p({last} != {result.variables[-1]}): "
                 f"{format_number(anti)}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _random_density(rng) -> DensityOperator:
    import numpy as np
    g = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    mat = g @ g.conj().T
    mat /= np.trace(mat).real
    return DensityOperator(mat, (Register("S"),))


def cmd_guerin(args) -> int:
    import numpy as np
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.samples):
        report = fea.guerin_marginal_check(_random_density(rng))
        worst = max(worst, report.max_discrepancy)
    pair = fea.incompatible_sharp_pair()
    verdict = fea.povm_joint_feasibility(pair)
    lines = [
        f"sequential marginals: {args.samples} random states, "
        f"max |circuit - closed form| = {worst:.3e}",
        f"joint POVM for (computational, plus_minus): "
        f"{'feasible' if verdict.feasible else 'infeasible'}",
        f"  commuting bases: {verdict.commuting}",
        f"  max-min-eigenvalue oracle: {verdict.max_min_eigenvalue:.12g} "
        f"(agrees: {verdict.oracle_agrees()})",
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_NOGO if not verdict.feasible else EXIT_OK


def cmd_validate(args) -> int:
    problems = scenario_io.validate_file(args.file)
    if not problems:
        sys.stdout.write("ok\n")
        return EXIT_OK
    for p in problems:
        sys.stdout.write(f"{p}\n")
    return EXIT_ERROR


def cmd_report(args) -> int:
    scenario = _load_scenario(args.scenario)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    nogo = False

    sections = [f"# {scenario.name}", ""]

    settings = _default_settings(scenario, {})
    tables = _pair_tables(scenario, settings)
    sections.append("## Outcome tables")
    sections.append("")
    sections.append(_tables_markdown(tables).rstrip())
    (out_dir / "tables.csv").write_text(_tables_csv(tables), encoding="utf-8",
                                        newline="\n")

    sections.append("")
    sections.append("## Accessibility")
    sections.append("")
    amap = accessibility_map(scenario, settings)
    if amap:
        sections.append("| pair | verdict |")
        sections.append("| --- | --- |")
        for (u, v), res in sorted(amap.items()):
            sections.append(f"| ({u}, {v}) | {res.describe()} |")
    else:
        sections.append("single outcome, nothing to classify")

    pairs = _standard_pairs(scenario)
    if pairs:
        pair_tables = [event_distribution(scenario, settings, p) for p in pairs]
        graph = possibilistic.extract_implications(pair_tables)
        report = possibilistic.find_contradiction(graph)
        sections.append("")
        sections.append("## Possibilistic chain")
        sections.append("")
        if report is None:
            sections.append("no contradiction")
        else:
            nogo = True
            sections.append(report.to_markdown())

        spec = fea.scenario_marginal_spec(scenario, pairs, settings)
        result = fea.pairwise_marginal_feasibility(spec)
        sections.append("")
        sections.append("## Joint-distribution feasibility")
        sections.append("")
        sections.append(f"all pairwise laws simultaneously: "
                        f"{'feasible' if result.feasible else 'infeasible'} "
                        f"(verified: {result.verify()})")
        (out_dir / "certificate.json").write_text(_certificate_json(result),
                                                  encoding="utf-8", newline="\n")
        if not result.feasible:
            nogo = True

    (out_dir / "report.md").write_text("\n".join(sections) + "\n",
                                       encoding="utf-8", newline="\n")
    sys.stdout.write(f"wrote {out_dir / 'report.md'}\n")
    return EXIT_NOGO if nogo else EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ewflab",
        description="Extended Wigner's friend scenario workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, scenario_default=None):
        if scenario_default is None:
            p.add_argument("--scenario", required=True,
                           help="built-in name or scenario JSON file")
        else:
            p.add_argument("--scenario", default=scenario_default)
        p.add_argument("--out", help="write output to this path")

    p = sub.add_parser("tables", help="Born-rule outcome tables")
    add_common(p)
    p.add_argument("--settings", help="e.g. x=1,y=1")
    p.add_argument("--vars", help="comma-separated outcome variables")
    p.add_argument("--format", choices=("csv", "md"), default="csv")

    p = sub.add_parser("contradiction", help="possibilistic implication chain")
    add_common(p)
    p.add_argument("--settings", help="defaults to every setting at its "
                                      "largest value")

    p = sub.add_parser("lf-check", help="setting-marginal invariance plus chain")
    add_common(p, "brukner_lf")

    p = sub.add_parser("epistemic", help="nested-knowledge inference engine")
    add_common(p, "pusey_masanes_fr")
    p.add_argument("--cuts", help="JSON file: agent -> list viewed as quantum")
    p.add_argument("--ablate", action="append",
                   help="disable a rule (repeatable); 'consistency' disables "
                        "both consistency forms")
    p.add_argument("--drop-seed", action="append",
                   help="remove a seed family, e.g. implication:Charlie")

    p = sub.add_parser("feasibility", help="pairwise-marginal joint LP")
    add_common(p, "pusey_masanes_fr")
    p.add_argument("--settings")
    p.add_argument("--drop", help="omit one pairwise law, e.g. c,b")

    p = sub.add_parser("gao", help="sequential measure/undo prediction policies")
    p.add_argument("--policy", choices=("collapse_ordered", "independent_born"),
                   default="collapse_ordered")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--foliation", choices=("debbie_first", "debbie_last"),
                   default="debbie_first")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("guerin", help="sequential marginals and joint POVM")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("report", help="full analysis bundle for a scenario")
    add_common(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(out_required=True)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("file")

    return parser


HANDLERS = {
    "tables": cmd_tables,
    "contradiction": cmd_contradiction,
    "lf-check": cmd_lf_check,
    "epistemic": cmd_epistemic,
    "feasibility": cmd_feasibility,
    "gao": cmd_gao,
    "guerin": cmd_guerin,
    "report": cmd_report,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    if args.command == "report" and not args.out:
        sys.stderr.write("report requires --out DIRECTORY\n")
        return EXIT_ERROR
    try:
        return HANDLERS[args.command](args)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR
    except (ScenarioError, UnrealizedVariableError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
