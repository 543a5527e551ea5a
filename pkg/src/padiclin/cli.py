"""Command-line harness.

Subcommands: `charpoly` (characteristic polynomial at optimal jagged
precision), `eigenprec` (simple eigenvalues and their optimal precision),
`experiment` (the loss-of-precision table), `check` (cyclicity, validity
and elementary-divisor diagnostics).  Exit codes: 0 success, 2 input
error, 3 precision failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from random import Random

from .bench import (
    ExperimentConfig,
    rows_to_csv,
    rows_to_json,
    run_experiment,
    with_overrides,
)
from .compact import compact_form
from .errors import PadicError
from .matops import PMatrix
from .padic import INF
from .precision import (
    charpoly_optimal,
    cyclic_mod_p,
    eigenvalues_precision_batch,
    hensel_lift_eigenvalue,
    optimal_jagged_charpoly,
    simple_residue_roots,
    validity_check,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PRECISION = 3


def _load_matrix(path: str) -> PMatrix:
    with open(path) as fh:
        return PMatrix.from_json(json.load(fh))


def _write_out(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_charpoly(args) -> int:
    M = _load_matrix(args.matrix)
    chi, report = charpoly_optimal(M)
    print(f"chi = {chi}")
    for k, np_ in enumerate(report.nprime):
        shown = "inf" if np_ is INF else np_
        print(f"coefficient X^{k}: optimal absolute precision O({M.ctx.p}^{shown})")
    if args.out:
        _write_out(json.dumps(report.to_json(), indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_eigenprec(args) -> int:
    M = _load_matrix(args.matrix)
    rng = Random(args.seed)
    ca = compact_form(M, rng)
    roots = simple_residue_roots(ca.chi)
    if not roots:
        print("no simple residue eigenvalues", file=sys.stderr)
        return EXIT_PRECISION
    lams = [hensel_lift_eigenvalue(ca.chi, r) for r in roots]
    results = eigenvalues_precision_batch(M, ca, lams)
    payload = []
    for ep in results:
        shown = "inf" if ep.nprime is INF else ep.nprime
        print(f"lambda = {ep.lam}  N' = {shown}")
        payload.append(ep.to_json())
    if args.out:
        _write_out(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_check(args) -> int:
    M = _load_matrix(args.matrix)
    report = optimal_jagged_charpoly(M)
    print(f"cyclic: {'true' if report.cyclic_mod_p else 'false'}")
    if report.gain:
        gained = [
            f"X^{k}:+{v - report.lattice_floor}"
            for k, v in enumerate(report.nprime)
            if v is INF or v > report.lattice_floor
        ]
        print(f"gain: {' '.join(gained)}")
    else:
        print("gain: none")
    print(f"validity: {'ok' if report.validity_ok else 'not certified'} ({report.validity_detail})")
    sig = ["inf" if v is INF else str(v) for v in report.sigma_vals]
    print(f"sigma_valuations: [{', '.join(sig)}]")
    if args.out:
        _write_out(json.dumps(report.to_json(), indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_experiment(args) -> int:
    cfg = ExperimentConfig()
    if args.config:
        with open(args.config) as fh:
            cfg = ExperimentConfig.from_json(json.load(fh))
    cfg = with_overrides(
        cfg,
        p=args.p,
        n=args.n,
        prec=args.prec,
        samples=args.samples,
        seed=args.seed,
        columns=tuple(args.columns.split(",")) if args.columns else None,
        fmt=args.format,
        out=args.out,
    )
    rows = run_experiment(cfg)
    text = rows_to_csv(rows) if cfg.fmt == "csv" else rows_to_json(rows)
    _write_out(text, cfg.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="padiclin",
        description="exact p-adic linear algebra with optimal precision tracking",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("charpoly", help="characteristic polynomial at optimal precision")
    c.add_argument("matrix", help="matrix JSON file")
    c.add_argument("--out", help="write the precision report as JSON")
    c.set_defaults(func=_cmd_charpoly)

    e = sub.add_parser("eigenprec", help="simple eigenvalues and their optimal precision")
    e.add_argument("matrix", help="matrix JSON file")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", help="write the results as JSON")
    e.set_defaults(func=_cmd_eigenprec)

    k = sub.add_parser("check", help="cyclicity, validity and divisor diagnostics")
    k.add_argument("matrix", help="matrix JSON file")
    k.add_argument("--out", help="write the report as JSON")
    k.set_defaults(func=_cmd_check)

    x = sub.add_parser("experiment", help="run the loss-of-precision experiment")
    x.add_argument("config", nargs="?", help="config JSON file (flags override)")
    x.add_argument("--p", type=int)
    x.add_argument("--n", type=int)
    x.add_argument("--prec", type=int)
    x.add_argument("--samples", type=int)
    x.add_argument("--seed", type=int)
    x.add_argument("--columns", help="comma-separated subset of optimal,cr,fp")
    x.add_argument("--format", choices=("csv", "json"))
    x.add_argument("--out")
    x.set_defaults(func=_cmd_experiment)
    return ap


def cli_main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except PadicError as e:
        print(f"precision failure: {e}", file=sys.stderr)
        return EXIT_PRECISION
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(cli_main())
