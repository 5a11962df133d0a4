"""Command line interface.

Subcommands: analyze, sweep, oracle, galerkin, validate, scenarios-list,
export. Problems come from a bundled scenario (--scenario, with repeatable
--param K=V) or a JSON problem file (--input). Reports are CSV (default) or
JSON, written to stdout or --output, and are byte-identical across runs of
the same configuration on the same build.

Exit codes: 0 success, 2 bad input, 3 every scheduled alpha singular,
4 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analyzer import (
    AlphaSchedule,
    Decision,
    OracleDecision,
    SweepReport,
    Verdict,
    alpha_sweep,
    decide,
    range_oracle,
)
from .galerkin import SubspaceFamily, coordinate_family, diagonal_steps, galerkin_sweep, sine_family
from .hilbert import ProblemInstance, ValidationError
from .problemfile import ProblemFileError, load_problem, save_problem
from .scenarios import (
    EXPECTED_VERDICTS,
    SCENARIO_DESCRIPTIONS,
    SCENARIO_PARAMS,
    Scenario,
    build_scenario,
    scenario_names,
)

__all__ = ["main", "build_parser"]

HEADER = "# finapprox v1"
EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_SINGULAR = 3
EXIT_INTERNAL = 4

log = logging.getLogger("finapprox")


def _fmt(value) -> str:
    """Shortest round-trip decimal for floats; plain str otherwise."""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (np.floating,)):
        return repr(float(value))
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _vector_csv(v: np.ndarray) -> str:
    return ",".join(repr(float(x)) for x in v)


def _parse_param(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise ValidationError(f"--param expects K=V, got {text!r}")
    key, raw = text.split("=", 1)
    key = key.strip()
    raw = raw.strip()
    if not key:
        raise ValidationError(f"--param expects a nonempty key, got {text!r}")
    value: object
    try:
        value = int(raw)
    except ValueError:
        try:
            value = float(raw)
        except ValueError:
            value = raw
    return key, value


def _load(args) -> tuple[ProblemInstance, Optional[SubspaceFamily], dict[str, str]]:
    """Resolve --scenario/--input into a problem, optional family, and source tags."""
    if getattr(args, "scenario", None) and getattr(args, "input", None):
        raise ValidationError("give either --scenario or --input, not both")
    if getattr(args, "scenario", None):
        params = dict(_parse_param(p) for p in (args.param or []))
        scenario = build_scenario(args.scenario, **params)
        source = {"scenario": scenario.name}
        if params:
            source["params"] = ",".join(f"{k}={v}" for k, v in sorted(params.items()))
        return scenario.problem, scenario.family, source
    if getattr(args, "input", None):
        problem = load_problem(args.input)
        return problem, None, {"input": str(args.input)}
    raise ValidationError("a problem source is required: --scenario NAME or --input PATH")


def _schedule(args) -> AlphaSchedule:
    return AlphaSchedule(alpha0=args.alpha0, ratio=args.ratio, count=args.count)


def _write(text: str, output: Optional[str]) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        path = Path(output)
        if path.parent and not path.parent.exists():
            raise ValidationError(f"output directory {path.parent} does not exist")
        path.write_text(text)


def _sweep_rows(report: SweepReport) -> list[str]:
    rows = ["alpha,norm_indicator,norm_residual,norm_constraint_residual,singular"]
    for r in report.records:
        rows.append(
            f"{_fmt(r.alpha)},{_fmt(r.norm_indicator)},{_fmt(r.norm_residual)},"
            f"{_fmt(r.norm_constraint_residual)},{_fmt(r.singular)}"
        )
    return rows


def _sweep_json(report: SweepReport) -> list[dict]:
    return [
        {
            "alpha": r.alpha,
            "norm_indicator": None if r.singular else r.norm_indicator,
            "norm_residual": None if r.singular else r.norm_residual,
            "norm_constraint_residual": None if r.singular else r.norm_constraint_residual,
            "singular": r.singular,
        }
        for r in report.records
    ]


def _oracle_json(oracle: OracleDecision) -> dict:
    return {
        "decomposed_solvable": oracle.decomposed_solvable,
        "constrained_solvable": oracle.constrained_solvable,
        "agree": oracle.agree,
        "exact_part_residual": oracle.exact_part_residual,
        "complement_residual": oracle.complement_residual,
        "feasible": oracle.feasible,
        "distance": None if oracle.distance == float("inf") else oracle.distance,
    }


def _source_comments(source: dict[str, str]) -> list[str]:
    return [f"# {key}={value}" for key, value in source.items()]


def _cmd_sweep(args) -> int:
    problem, _family, source = _load(args)
    report = alpha_sweep(problem, _schedule(args), jobs=args.jobs)
    if args.format == "json":
        payload = {
            "version": "finapprox v1",
            "command": "sweep",
            "source": source,
            "schedule": {"alpha0": args.alpha0, "ratio": args.ratio, "count": args.count},
            "records": _sweep_json(report),
        }
        _write(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.output)
    else:
        lines = [HEADER, "# command=sweep", *_source_comments(source), *_sweep_rows(report)]
        _write("\n".join(lines) + "\n", args.output)
    if not report.nonsingular_records():
        return EXIT_SINGULAR
    return EXIT_OK


def _cmd_analyze(args) -> int:
    problem, _family, source = _load(args)
    report = alpha_sweep(problem, _schedule(args), jobs=args.jobs)
    decision = decide(report, decision_tol=args.tol_decision)
    oracle = range_oracle(problem) if problem.operator is not None else None
    agreement: Optional[bool] = None
    if oracle is not None and decision.verdict in (Verdict.SOLVABLE, Verdict.NOT_SOLVABLE):
        agreement = oracle.constrained_solvable == (decision.verdict is Verdict.SOLVABLE)

    if args.format == "json":
        payload = {
            "version": "finapprox v1",
            "command": "analyze",
            "source": source,
            "schedule": {"alpha0": args.alpha0, "ratio": args.ratio, "count": args.count},
            "records": _sweep_json(report),
            "verdict": decision.verdict.value,
            "witness": None if decision.witness is None else [float(x) for x in decision.witness],
            "oracle": None if oracle is None else _oracle_json(oracle),
            "agreement": agreement,
        }
        _write(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.output)
    else:
        lines = [HEADER, "# command=analyze", *_source_comments(source)]
        lines.append(f"# verdict={decision.verdict.value}")
        if decision.witness is not None:
            lines.append(f"# witness={_vector_csv(decision.witness)}")
        if oracle is not None:
            lines.append(f"# oracle_constrained_solvable={_fmt(oracle.constrained_solvable)}")
            lines.append(f"# oracle_decomposed_solvable={_fmt(oracle.decomposed_solvable)}")
            lines.append(f"# oracle_distance={_fmt(oracle.distance)}")
        if agreement is not None:
            lines.append(f"# agreement={_fmt(agreement)}")
        lines.extend(_sweep_rows(report))
        _write("\n".join(lines) + "\n", args.output)
    if decision.verdict is Verdict.SINGULAR:
        return EXIT_SINGULAR
    return EXIT_OK


def _cmd_oracle(args) -> int:
    problem, _family, source = _load(args)
    oracle = range_oracle(problem)
    if args.format == "json":
        payload = {
            "version": "finapprox v1",
            "command": "oracle",
            "source": source,
            "oracle": _oracle_json(oracle),
        }
        _write(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.output)
    else:
        lines = [HEADER, "# command=oracle", *_source_comments(source), "key,value"]
        for key, value in _oracle_json(oracle).items():
            lines.append(f"{key},{_fmt(value) if value is not None else 'inf'}")
        _write("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _pick_family(args, problem: ProblemInstance, family: Optional[SubspaceFamily]) -> SubspaceFamily:
    if getattr(args, "family", None):
        if args.family == "sine":
            return sine_family(problem.ambient_dim)
        if args.family == "coordinate":
            return coordinate_family(problem.ambient_dim)
        raise ValidationError(f"unknown family {args.family!r} (choose 'sine' or 'coordinate')")
    if family is not None:
        return family
    raise ValidationError(
        "this problem has no subspace family; pass --family sine|coordinate "
        "or use a scenario that provides one"
    )


def _cmd_galerkin(args) -> int:
    problem, family, source = _load(args)
    chosen = _pick_family(args, problem, family)
    steps = diagonal_steps(count=args.count, max_n=chosen.max_n, alpha0=args.alpha0, ratio=args.ratio)
    report = galerkin_sweep(problem, chosen, steps, jobs=args.jobs)
    if args.format == "json":
        payload = {
            "version": "finapprox v1",
            "command": "galerkin",
            "source": source,
            "family": chosen.description,
            "records": [
                {
                    "step": r.step,
                    "n": r.n,
                    "alpha": r.alpha,
                    "residual": None if r.singular else r.norm_residual,
                    "constraint_residual_n": None if r.singular else r.norm_constraint_residual,
                    "constraint_residual_target": r.norm_constraint_residual_target,
                    "singular": r.singular,
                }
                for r in report.records
            ],
        }
        _write(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.output)
    else:
        lines = [HEADER, "# command=galerkin", *_source_comments(source)]
        lines.append(f"# family={chosen.description}")
        lines.append("step,n,alpha,residual,constraint_residual_n,constraint_residual_target,singular")
        for r in report.records:
            target = "" if r.norm_constraint_residual_target is None else _fmt(r.norm_constraint_residual_target)
            lines.append(
                f"{r.step},{r.n},{_fmt(r.alpha)},{_fmt(r.norm_residual)},"
                f"{_fmt(r.norm_constraint_residual)},{target},{_fmt(r.singular)}"
            )
        _write("\n".join(lines) + "\n", args.output)
    if all(r.singular for r in report.records):
        return EXIT_SINGULAR
    return EXIT_OK


def _cmd_validate(args) -> int:
    problem, _family, source = _load(args)
    record = problem.validation
    lines = [HEADER, "# command=validate", *_source_comments(source), "key,value"]
    pairs = [
        ("ambient_dim", problem.ambient_dim),
        ("control_dim", problem.control_dim),
        ("operator_present", problem.operator is not None),
        ("gram_symmetry_defect", record.gram_symmetry_defect),
        ("gram_min_eigenvalue", record.gram_min_eigenvalue),
        ("gram_factor_defect", record.gram_factor_defect if record.gram_factor_defect is not None else ""),
        ("constraint_symmetry_defect", record.constraint_symmetry_defect),
        ("constraint_idempotency_defect", record.constraint_idempotency_defect),
        ("constraint_is_projector", record.constraint_is_projector),
        ("constraint_supplied_raw", record.constraint_supplied_raw),
        ("representable", record.representable),
        ("representable_rank", record.representable_rank),
    ]
    for key, value in pairs:
        lines.append(f"{key},{_fmt(value) if value != '' else ''}")
    _write("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _cmd_scenarios_list(args) -> int:
    lines = []
    for name in scenario_names():
        lines.append(name)
        lines.append(f"  expected verdict: {EXPECTED_VERDICTS[name]}")
        lines.append(f"  parameters: {SCENARIO_PARAMS[name]}")
        lines.append(f"  {SCENARIO_DESCRIPTIONS[name]}")
    _write("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _cmd_export(args) -> int:
    if not args.scenario:
        raise ValidationError("export needs --scenario NAME")
    params = dict(_parse_param(p) for p in (args.param or []))
    scenario = build_scenario(args.scenario, **params)
    if args.output in (None, "-"):
        raise ValidationError("export needs --output PATH for the problem file")
    save_problem(scenario.problem, args.output)
    log.info("wrote %s", args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finapprox",
        description=(
            "Decide and construct finite-approximate solutions of constrained "
            "linear operator equations."
        ),
        epilog="exit codes: 0 ok, 2 bad input, 3 all alphas singular, 4 internal error",
    )
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_source(p: argparse.ArgumentParser) -> None:
        p.add_argument("--scenario", help="bundled scenario name (see scenarios-list)")
        p.add_argument(
            "--param",
            action="append",
            metavar="K=V",
            help="scenario parameter, repeatable",
        )
        p.add_argument("--input", help="path to a JSON problem file")

    def add_schedule(p: argparse.ArgumentParser) -> None:
        p.add_argument("--alpha0", type=float, default=1.0, help="first alpha (default 1.0)")
        p.add_argument("--ratio", type=float, default=0.1, help="geometric ratio (default 0.1)")
        p.add_argument("--count", type=int, default=8, help="number of steps (default 8)")

    def add_output(p: argparse.ArgumentParser) -> None:
        p.add_argument("--output", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv", help="report format")

    p_analyze = sub.add_parser("analyze", help="sweep, verdict, witness, and oracle cross-check")
    add_source(p_analyze)
    add_schedule(p_analyze)
    add_output(p_analyze)
    p_analyze.add_argument("--tol-decision", type=float, default=None, dest="tol_decision",
                           help="override the relative decision threshold")
    p_analyze.add_argument("--jobs", type=int, default=1, help="parallel alpha solves")
    p_analyze.set_defaults(func=_cmd_analyze)

    p_sweep = sub.add_parser("sweep", help="regularized solves along the alpha schedule")
    add_source(p_sweep)
    add_schedule(p_sweep)
    add_output(p_sweep)
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel alpha solves")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_oracle = sub.add_parser("oracle", help="range-criterion verdicts from the operator")
    add_source(p_oracle)
    add_output(p_oracle)
    p_oracle.set_defaults(func=_cmd_oracle)

    p_galerkin = sub.add_parser("galerkin", help="diagonal sweep over a nested subspace family")
    add_source(p_galerkin)
    add_schedule(p_galerkin)
    add_output(p_galerkin)
    p_galerkin.add_argument("--family", choices=("sine", "coordinate"), default=None,
                            help="family for problem-file inputs")
    p_galerkin.add_argument("--jobs", type=int, default=1, help="parallel steps")
    p_galerkin.set_defaults(func=_cmd_galerkin)

    p_validate = sub.add_parser("validate", help="structural checks and defect norms")
    add_source(p_validate)
    add_output(p_validate)
    p_validate.set_defaults(func=_cmd_validate)

    p_list = sub.add_parser("scenarios-list", help="catalog of bundled scenarios")
    add_output(p_list)
    p_list.set_defaults(func=_cmd_scenarios_list)

    p_export = sub.add_parser("export", help="write a scenario as a JSON problem file")
    p_export.add_argument("--scenario", required=True, help="bundled scenario name")
    p_export.add_argument("--param", action="append", metavar="K=V", help="scenario parameter")
    p_export.add_argument("--output", required=True, help="problem file path")
    p_export.set_defaults(func=_cmd_export)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (ValidationError, ProblemFileError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
