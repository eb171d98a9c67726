"""
Command-line interface.

    mrdcsis screen   --manifest FILE --method {mrdc,dcsis,sis} --rule RULE --out PATH [--threads N]
    mrdcsis simulate --design FILE --methods LIST --out DIR [--threads N]
    mrdcsis sobol    --n N --dim D [--table FILE]

Exit status: 0 success, 1 configuration error, 2 data error,
3 numerical degeneracy affecting the whole run.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .errors import (
    CapabilityError,
    ConfigError,
    DegenerateInputError,
    DomainError,
    IngestionError,
    MrdcError,
    ParseError,
    ReportWriteError,
    ShapeError,
)

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_DEGENERATE = 0, 1, 2, 3
THREADS_ENV = "MRDCSIS_THREADS"

log = logging.getLogger("mrdcsis")


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _load_table(path):
    if path is None:
        return None
    from .lds import load_direction_numbers

    try:
        return load_direction_numbers(path)
    except OSError as exc:
        raise ConfigError(f"cannot read direction-number table {path}: {exc}") from exc


def cmd_screen(args) -> int:
    from .io import DatasetManifest, load_dataset, write_report
    from .screening import ThresholdRule, screen

    manifest = DatasetManifest.from_json(args.manifest)
    rule = ThresholdRule.parse(args.rule)
    table = _load_table(args.table)
    x, y, features = load_dataset(manifest)
    if args.method == "sis" and (x.shape[2] != 1 or y.shape[1] != 1):
        raise CapabilityError(
            f"SIS is univariate only; data have predictor dimension {x.shape[2]} "
            f"and response dimension {y.shape[1]}"
        )
    report = screen(x, y, rule, args.method, threads=args.threads, table=table, feature_names=features)
    config = {
        "manifest": manifest.source,
        "method": args.method,
        "rule": rule.describe(),
        "table": str(args.table) if args.table else None,
    }
    json_path, csv_path = write_report(report, args.out, config)

    print(f"method={report.method} rule={rule.describe()} n={report.n} p={report.p} "
          f"d={report.d} q={report.q} selected={len(report.selected)}")
    print(f"{'rank':>4}  {'feature':<24}{'score':>14}")
    for pos, j in enumerate(report.ranking[:20], start=1):
        mark = "*" if pos <= len(report.selected) else " "
        print(f"{pos:>4}{mark} {features[j]:<24}{report.scores[j]:>14.6g}")
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {json_path} and {csv_path} ({report.elapsed:.2f} s)", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .io import atomic_write_text
    from .simgen import SimDesign, comparison_table, run_simulation

    design = SimDesign.from_json(args.design)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise ConfigError("no methods given")
    table = _load_table(args.table)
    reports = run_simulation(design, methods, threads=args.threads, table=table)
    out = Path(args.out)
    for m, rep in reports.items():
        atomic_write_text(out / f"{m}.json", rep.to_json())
    text = comparison_table(reports)
    atomic_write_text(out / "comparison.txt", text)
    print(f"{design.example}: n={design.n} p={design.p} reps={design.reps}")
    print(text, end="")
    return EXIT_OK


def cmd_sobol(args) -> int:
    from .lds import sobol_points

    if args.n < 1:
        raise DomainError(f"--n must be >= 1, got {args.n}")
    table = _load_table(args.table)
    pts = sobol_points(args.n, args.dim, table).points
    out = sys.stdout
    for row in pts:
        out.write(",".join(repr(float(v)) for v in row))
        out.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrdcsis",
        description="Multivariate-rank distance-correlation feature screening.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("screen", help="screen a real dataset described by a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--method", choices=("mrdc", "dcsis", "sis"), default="mrdc")
    p.add_argument("--rule", default="max-ratio", help="hard:M | max-ratio | top:K | cutoff:C,KAPPA")
    p.add_argument("--out", required=True, help="report path; writes <out>.json and <out>.csv")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--table", default=None, help="Joe-Kuo direction-number file")
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("simulate", help="run a synthetic screening experiment")
    p.add_argument("--design", required=True)
    p.add_argument("--methods", default="mrdc", help="comma-separated: mrdc,dcsis,sis")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--table", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sobol", help="print Sobol' target points as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--table", default=None)
    p.set_defaults(func=cmd_sobol)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors exit 2; ours are config errors
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if getattr(args, "threads", 1) is None:
        args.threads = default_threads()
    try:
        return args.func(args)
    except (ConfigError, CapabilityError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, IngestionError, ShapeError, ReportWriteError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DegenerateInputError as exc:
        print(f"degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except MrdcError as exc:  # pragma: no cover - every subclass is mapped above
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
