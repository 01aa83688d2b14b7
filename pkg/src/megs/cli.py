"""Command-line interface: classify, quotient tables, checks, orders, witnesses, suite.

Exit codes: 0 when every verdict matches its prediction, 1 when a verdict
deviates from the prediction, 2 when a degree guard or bounded search gives
out, 3 on input errors.  All output is deterministic for a fixed
configuration, so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from .chains import ChainStore, DEFAULT_DEGREE_GUARD, DegreeGuardError, quotient
from .checks import (
    CHECK_NAMES,
    CheckError,
    CheckReport,
    DEFAULT_SEED,
    run_check,
    run_suite,
)
from .datum import DatumError, NumericalDatum, classify
from .words import ExceedsCap, GuardExceeded, WordError, order, parse_word

EXIT_OK = 0
EXIT_DEVIATION = 1
EXIT_GUARD = 2
EXIT_INPUT = 3


@dataclass
class RunConfig:
    """Parsed command configuration; every emitted report records the seed."""

    command: str
    datum_text: str
    level: int | None
    aux_level: int | None
    cache_dir: str | None
    degree_guard: int
    seed: int
    json_report: str | None
    word: str | None = None
    cap: int | None = None
    kind: str | None = None
    check: str | None = None
    samples: int = 20


def _load_datum(value: str) -> NumericalDatum:
    """Accept a path to a datum file or the datum text itself."""
    if os.path.exists(value):
        with open(value) as fh:
            value = fh.read()
    return NumericalDatum.from_text(value)


def _write_json(path: str | None, payload: dict) -> None:
    if path is None:
        return
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _report_exit(report: CheckReport) -> int:
    if report.verdict == "GuardExceeded":
        return EXIT_GUARD
    if not report.as_predicted:
        return EXIT_DEVIATION
    return EXIT_OK


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


def cmd_classify(cfg: RunConfig) -> int:
    datum = _load_datum(cfg.datum_text)
    cls = classify(datum)
    lines = [
        f"datum: {datum.canonical_line()}",
        f"generators: {datum.total_generators}",
        f"joint-span-dimension: {cls.dimV}",
        f"torsion: {_yes(cls.torsion)}",
        f"constant-class: {_yes(cls.in_G_class)}",
        f"symmetric-class: {_yes(cls.in_S_class)}",
        f"exceptional-class: {_yes(cls.in_E_class)}",
        f"branch-over-derived: {_yes(cls.branch_over_derived)}",
        f"branch-over-gamma3-only: {_yes(cls.branch_over_gamma3_only)}",
        f"not-branch: {_yes(cls.not_branch)}",
        f"csp: {cls.csp}",
        "reasons:",
    ]
    lines.extend(f"  - {reason}" for reason in cls.reasons)
    text = "\n".join(lines)
    print(text)
    _write_json(
        cfg.json_report,
        {
            "command": "classify",
            "seed": cfg.seed,
            "datum": datum.canonical_line(),
            "generators": datum.total_generators,
            "joint_span_dimension": cls.dimV,
            "torsion": cls.torsion,
            "constant_class": cls.in_G_class,
            "symmetric_class": cls.in_S_class,
            "exceptional_class": cls.in_E_class,
            "branch_over_derived": cls.branch_over_derived,
            "branch_over_gamma3_only": cls.branch_over_gamma3_only,
            "not_branch": cls.not_branch,
            "csp": cls.csp,
            "reasons": list(cls.reasons),
        },
    )
    return EXIT_OK


def cmd_quotient(cfg: RunConfig) -> int:
    datum = _load_datum(cfg.datum_text)
    if cfg.level is None or cfg.level < 1:
        raise CheckError("quotient needs --level >= 1")
    store = ChainStore(cfg.cache_dir)
    q = quotient(datum, cfg.level, degree_guard=cfg.degree_guard, store=store)
    dims = q.full().dims()
    total = sum(dims)
    p = datum.p
    lines = [
        f"datum: {datum.canonical_line()}",
        f"level: {cfg.level}",
        f"order: {p}^{total}",
        "layers:",
    ]
    rows = []
    prefix = 0
    for k in range(1, cfg.level + 1):
        layer = dims[k - 1]
        prefix += layer
        rows.append({"k": k, "quotient": prefix, "kernel": total - prefix, "layer": layer})
        lines.append(
            f"  k={k}: quotient {p}^{prefix}, kernel {p}^{total - prefix}, layer {p}^{layer}"
        )
    print("\n".join(lines))
    _write_json(
        cfg.json_report,
        {
            "command": "quotient",
            "seed": cfg.seed,
            "datum": datum.canonical_line(),
            "level": cfg.level,
            "p": p,
            "order_exponent": total,
            "layers": rows,
        },
    )
    return EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    datum = _load_datum(cfg.datum_text)
    store = ChainStore(cfg.cache_dir)
    report = run_check(
        cfg.check,
        datum,
        level=cfg.level,
        aux_level=cfg.aux_level,
        word=cfg.word,
        seed=cfg.seed,
        samples=cfg.samples,
        store=store,
        degree_guard=cfg.degree_guard,
    )
    print(report.to_text())
    _write_json(
        cfg.json_report,
        {"command": "check", "seed": cfg.seed, "report": report.to_json()},
    )
    return _report_exit(report)


def cmd_order(cfg: RunConfig) -> int:
    datum = _load_datum(cfg.datum_text)
    word = parse_word(cfg.word, datum)
    cap = cfg.cap if cfg.cap is not None else datum.p**12
    lines = [f"datum: {datum.canonical_line()}", f"word: {cfg.word}"]
    payload = {
        "command": "order",
        "seed": cfg.seed,
        "datum": datum.canonical_line(),
        "word": cfg.word,
        "cap": cap,
    }
    try:
        value = order(word, datum, cap=cap)
        lines.append(f"order: {value}")
        payload["order"] = value
    except ExceedsCap:
        lines.append(f"order: exceeds cap {cap}")
        payload["order"] = None
        payload["exceeds_cap"] = True
    print("\n".join(lines))
    _write_json(cfg.json_report, payload)
    return EXIT_OK


def _branch_text(element, datum) -> str:
    from .words import word_to_text

    if element.children is None:
        if element.word.is_empty():
            return "1"
        return word_to_text(element.word, datum)
    inner = ", ".join(_branch_text(child, datum) for child in element.children)
    head = f"a^{element.alpha} " if element.alpha % datum.p else ""
    return f"{head}({inner})"


def cmd_witness(cfg: RunConfig) -> int:
    datum = _load_datum(cfg.datum_text)
    store = ChainStore(cfg.cache_dir)
    if cfg.kind == "no-csp":
        from .checks import check_csp_witness_dependent, dependent_witness

        level = cfg.level if cfg.level is not None else 3
        aux = cfg.aux_level if cfg.aux_level is not None else level + 2
        report = check_csp_witness_dependent(
            datum, level, aux, store=store, degree_guard=cfg.degree_guard
        )
        _, _, element = dependent_witness(datum, level)
    elif cfg.kind == "exceptional":
        from .checks import check_csp_witness_exceptional, exceptional_witness

        level = cfg.level if cfg.level is not None else 2
        aux = cfg.aux_level if cfg.aux_level is not None else level + 2
        report = check_csp_witness_exceptional(
            datum, level, aux, store=store, degree_guard=cfg.degree_guard
        )
        _, element = exceptional_witness(datum, level)
    else:
        raise CheckError(f"unknown witness kind {cfg.kind!r}; known: no-csp, exceptional")
    witness_text = _branch_text(element, datum)
    print(f"witness-element: {witness_text}")
    print(report.to_text())
    _write_json(
        cfg.json_report,
        {
            "command": "witness",
            "seed": cfg.seed,
            "kind": cfg.kind,
            "witness_element": witness_text,
            "report": report.to_json(),
        },
    )
    return _report_exit(report)


def cmd_suite(cfg: RunConfig) -> int:
    store = ChainStore(cfg.cache_dir)
    rows = run_suite(store=store, degree_guard=cfg.degree_guard, seed=cfg.seed)
    lines = [f"suite: {len(rows)} checks, seed {cfg.seed}"]
    worst = EXIT_OK
    predicted = 0
    for name, report in rows:
        status = "as predicted" if report.as_predicted else "UNEXPECTED"
        predicted += report.as_predicted
        aux = f" m={report.aux_level}" if report.aux_level is not None else ""
        lines.append(
            f"{name:16s} {report.check:24s} n={report.level}{aux} -> "
            f"{report.verdict} [{status}]"
        )
        code = _report_exit(report)
        if code == EXIT_DEVIATION or (code == EXIT_GUARD and worst != EXIT_DEVIATION):
            worst = code
    lines.append(f"summary: {predicted} of {len(rows)} checks as predicted")
    print("\n".join(lines))
    _write_json(
        cfg.json_report,
        {
            "command": "suite",
            "seed": cfg.seed,
            "rows": [
                {"name": name, "report": report.to_json()} for name, report in rows
            ],
            "summary": {"total": len(rows), "as_predicted": predicted},
        },
    )
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="megs",
        description=(
            "Groups acting on the p-adic rooted tree from a numerical datum: "
            "classification, congruence quotients, finite-level checks."
        ),
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--datum",
        required=False,
        help="datum file path or inline text, e.g. 'p = 3; E1 = (1, 2)'",
    )
    common.add_argument("--level", type=int, default=None, help="tree depth n")
    common.add_argument(
        "--aux-level", type=int, default=None, help="second depth m where a check uses one"
    )
    common.add_argument(
        "--modulus-guard",
        type=int,
        default=DEFAULT_DEGREE_GUARD,
        help="largest permitted number of tree leaves (default %(default)s)",
    )
    common.add_argument("--cache-dir", default=None, help="directory for chain caching")
    common.add_argument(
        "--seed", type=int, default=DEFAULT_SEED, help="seed for sampled certificates"
    )
    common.add_argument(
        "--json-report", default=None, help="also write a JSON report to this path"
    )

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[common], help="print the datum's classification")
    sub.add_parser(
        "quotient", parents=[common], help="print quotient orders and kernel layers"
    )
    p_check = sub.add_parser("check", parents=[common], help="run one finite-level check")
    p_check.add_argument("check", choices=CHECK_NAMES, metavar="check")
    p_check.add_argument("--word", default=None, help="witness word for checks that take one")
    p_check.add_argument(
        "--samples", type=int, default=20, help="sample count for seeded certificates"
    )
    p_order = sub.add_parser("order", parents=[common], help="order of a word's image")
    p_order.add_argument("word", help="word, e.g. 'a b[1,1]^2'")
    p_order.add_argument("--cap", type=int, default=None, help="give up above this order")
    p_witness = sub.add_parser(
        "witness", parents=[common], help="build and certify a congruence-defect witness"
    )
    p_witness.add_argument("kind", choices=["no-csp", "exceptional"], metavar="kind")
    sub.add_parser("suite", parents=[common], help="run the default check matrix")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    if args.command != "suite" and not args.datum:
        raise CheckError(f"{args.command} needs --datum")
    return RunConfig(
        command=args.command,
        datum_text=args.datum or "",
        level=args.level,
        aux_level=args.aux_level,
        cache_dir=args.cache_dir,
        degree_guard=args.modulus_guard,
        seed=args.seed,
        json_report=args.json_report,
        word=getattr(args, "word", None),
        cap=getattr(args, "cap", None),
        kind=getattr(args, "kind", None),
        check=getattr(args, "check", None),
        samples=getattr(args, "samples", 20),
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    handlers = {
        "classify": cmd_classify,
        "quotient": cmd_quotient,
        "check": cmd_check,
        "order": cmd_order,
        "witness": cmd_witness,
        "suite": cmd_suite,
    }
    try:
        return handlers[args.command](_config(args))
    except DegreeGuardError as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except GuardExceeded as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (DatumError, WordError, CheckError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
