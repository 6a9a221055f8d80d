"""Command line front end: ``sparsegof test | simulate | quantile``.

Exit codes: 0 = null accepted (or command succeeded), 1 = null rejected by
the combined rule, 2 = usage, input or numerical error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core_stats import chi_square_quantile
from .corrections import EpsPolicy
from .models import STATISTICS, CorrectionConfig, Independence2D, SimpleNull, run_test
from .montecarlo import (
    DEFAULT_ALPHAS,
    SimulationSpec,
    builtin_distribution,
    perturb_distribution,
    run_simulation,
)
from .tables import ContingencyTable, load_builtin, parse_table, remove_empty_margins, to_csv

SEED_ENV = "SPARSEGOF_SEED"

EXIT_ACCEPT = 0
EXIT_REJECT = 1
EXIT_ERROR = 2

LABELS = {"Q": "Q", "Qab": "Q^ab", "G": "G", "Gab": "G^ab", "RC23": "RC^2/3", "GKu": "G_Ku"}


class CliError(Exception):
    pass


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    return obj


def _dump(doc: dict) -> str:
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def _metadata(args, *, seed=None, digest=None) -> dict:
    return {
        "tool": "sparsegof",
        "version": __version__,
        "command": args.command,
        "seed": seed,
        "h": getattr(args, "h", None),
        "eps_policy": {"kind": "relative", "fraction": getattr(args, "eps_fraction", None)},
        "timestamp": None if args.no_timestamp else _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "input_digest": digest,
    }


def _read_numbers(path: str) -> tuple[np.ndarray, str]:
    text = Path(path).read_text()
    body = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    fields = [f for f in re.split(r"[\s,;]+", body) if f]
    if not fields:
        raise CliError(f"{path}: no numbers found")
    try:
        values = np.array([float(f) for f in fields])
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from None
    return values, text


def _digest(*texts: str) -> str:
    h = hashlib.sha256()
    for t in texts:
        h.update(t.encode())
    return "sha256:" + h.hexdigest()


def _load_test_input(args):
    """Return (data, model, digest, notes)."""
    notes: list[str] = []
    if args.counts:
        values, text = _read_numbers(args.counts)
        if np.any(values != np.round(values)) or np.any(values < 0):
            raise CliError(f"{args.counts}: counts must be nonnegative integers")
        counts = values.astype(np.int64)
        if args.model == "independence":
            if not args.shape:
                raise CliError("--model independence with --counts needs --shape ROWSxCOLS")
            rows, cols = args.shape
            table = ContingencyTable(counts.reshape(rows, cols))
            return _prepare_table(table, notes) + (_digest(text), notes)
        if not args.null:
            raise CliError("--counts needs --null PATH with the null probabilities")
        weights, null_text = _read_numbers(args.null)
        if np.any(weights <= 0):
            raise CliError(f"{args.null}: null weights must be strictly positive")
        if weights.size != counts.size:
            raise CliError(f"{args.null}: {weights.size} null cells for {counts.size} counts")
        return counts, SimpleNull(weights / weights.sum()), _digest(text, null_text), notes

    if args.builtin:
        table = load_builtin(args.builtin)
        text = to_csv(table)
    else:
        text = Path(args.table).read_text()
        table = parse_table(text)
    if args.model == "simple":
        raise CliError("tables are tested with --model independence")
    return _prepare_table(table, notes) + (_digest(text), notes)


def _prepare_table(table: ContingencyTable, notes: list[str]):
    cleaned, log = remove_empty_margins(table)
    if log:
        notes.append("removed empty margins: " + ", ".join(log))
    return cleaned, Independence2D(*cleaned.shape)


def _format_report(report, notes) -> str:
    lines = [
        f"model: {report.model}   n={report.n}  R={report.R}  c={report.c}  df={report.df}",
        f"threshold chi2({1 - report.alpha:g}, {report.df}) = {report.threshold:.4f}",
    ]
    for key in STATISTICS:
        verdict = "reject" if report.decisions[key] else "accept"
        lines.append(
            f"  {LABELS[key]:<7} {report.statistics[key]:>12.4f}   p={report.p_values[key]:.4g}   {verdict}"
        )
    p = report.params
    if p.fallback:
        lines.append("correction: none (a=0, b=1)")
    else:
        lines.append(f"correction: a={p.a:.6g}  b={p.b:.6g}  h={p.h:g}  eps={p.eps:.3g}")
    for note in [*notes, *report.warnings]:
        lines.append(f"note: {note}")
    lines.append("combined decision (Q^ab or G^ab): " + ("REJECT" if report.combined_reject else "accept"))
    return "\n".join(lines)


def cmd_test(args) -> int:
    data, model, digest, notes = _load_test_input(args)
    config = CorrectionConfig(h=args.h, eps_policy=EpsPolicy(args.eps_fraction))
    report = run_test(data, model, alpha=args.alpha, config=config)
    doc = {
        "metadata": _metadata(args, digest=digest),
        "report": report.as_dict(),
        "notes": notes,
    }
    if args.json == "-":
        sys.stdout.write(_dump(doc))
    else:
        if not args.quiet:
            print(_format_report(report, notes))
        if args.json:
            Path(args.json).write_text(_dump(doc))
    return EXIT_REJECT if report.combined_reject else EXIT_ACCEPT


def _distribution(name: str | None, path: str | None) -> np.ndarray:
    if path:
        weights, _ = _read_numbers(path)
        if np.any(weights < 0) or weights.sum() <= 0:
            raise CliError(f"{path}: weights must be nonnegative with a positive sum")
        return weights / weights.sum()
    return builtin_distribution(name)


def cmd_simulate(args) -> int:
    sampling = _distribution(args.dist, args.dist_file)
    if args.null_perturbed:
        null = perturb_distribution(sampling)
    elif args.null or args.null_file:
        null = _distribution(args.null, args.null_file)
    else:
        null = sampling
    seed = args.seed if args.seed is not None else int(os.environ.get(SEED_ENV, "0"))
    spec = SimulationSpec(
        sampling_dist=sampling,
        null_dist=null,
        n=args.n,
        replicates=args.reps,
        alpha_levels=tuple(args.alpha or DEFAULT_ALPHAS),
        seed=seed,
        h=args.h,
        eps_fraction=args.eps_fraction,
    )
    summary = run_simulation(spec, workers=args.workers)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    digest = _digest(json.dumps(_jsonable(spec.as_dict()), sort_keys=True))
    paths = {
        "quantiles": out / f"{args.prefix}_quantiles.csv",
        "rates": out / f"{args.prefix}_rates.csv",
        "summary": out / f"{args.prefix}_summary.json",
    }
    paths["quantiles"].write_text(summary.quantiles_csv())
    paths["rates"].write_text(summary.rates_csv())
    paths["summary"].write_text(_dump({
        "metadata": {**_metadata(args, seed=seed, digest=digest), "rng": summary.rng_algorithm},
        "summary": summary.as_dict(),
    }))
    if not args.quiet:
        print(f"{spec.replicates} replicates, n={spec.n}, R={spec.R}, mode(c)={summary.mode_c}, "
              f"fallbacks={summary.fallback_count}")
        header = "alpha   " + " ".join(f"{LABELS[s]:>8}" for s in STATISTICS)
        for label, rates in (("all replicates", summary.rejection_rates),
                             (f"c = mode(c) = {summary.mode_c}", summary.modal_rejection_rates)):
            print(f"rejection rates, {label}:")
            print(header)
            for a in spec.alpha_levels:
                print(f"{a:<7g} " + " ".join(f"{rates[a][s]:>8.3f}" for s in STATISTICS))
        for p in paths.values():
            print(f"wrote {p}")
    return EXIT_ACCEPT


def cmd_quantile(args) -> int:
    print(f"{chi_square_quantile(args.prob, args.df):.6f}")
    return EXIT_ACCEPT


def _shape(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(\d+)\s*[xX,]\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected ROWSxCOLS, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsegof", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def correction_flags(p):
        p.add_argument("--h", type=float, default=0.1, help="weight of b_max in b (default 0.1)")
        p.add_argument("--eps-fraction", type=float, default=1e-3,
                       help="eps as a fraction of the admissible a interval (default 1e-3)")
        p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from JSON output")
        p.add_argument("--quiet", action="store_true", help="suppress the human-readable summary")

    t = sub.add_parser("test", help="test a table or count vector")
    src = t.add_mutually_exclusive_group(required=True)
    src.add_argument("--table", help="CSV contingency table (header/row labels optional)")
    src.add_argument("--counts", help="file of counts separated by whitespace or commas")
    src.add_argument("--builtin", choices=("rivers", "sclerosis"), help="bundled dataset")
    t.add_argument("--null", help="null probabilities (or positive weights) for --counts")
    t.add_argument("--model", choices=("independence", "simple"), default=None,
                   help="default: independence for tables, simple for counts")
    t.add_argument("--shape", type=_shape, help="ROWSxCOLS for --counts with --model independence")
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout only)")
    correction_flags(t)
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="Monte Carlo type I error / power study")
    dist = s.add_mutually_exclusive_group(required=True)
    dist.add_argument("--dist", choices=("f1", "f2", "f3", "f4"))
    dist.add_argument("--dist-file")
    null = s.add_mutually_exclusive_group()
    null.add_argument("--null", choices=("f1", "f2", "f3", "f4"))
    null.add_argument("--null-file")
    null.add_argument("--null-perturbed", action="store_true",
                      help="test against the sampling distribution shifted by 1/300 (100 cells only)")
    s.add_argument("--n", type=int, default=400)
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    s.add_argument("--alpha", type=float, action="append", help="repeatable; default 0.01 0.05 0.1")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out-dir", default=".")
    s.add_argument("--prefix", default="simulation")
    correction_flags(s)
    s.set_defaults(func=cmd_simulate)

    q = sub.add_parser("quantile", help="chi-square quantile")
    q.add_argument("prob", type=float)
    q.add_argument("df", type=int)
    q.set_defaults(func=cmd_quantile, no_timestamp=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_ACCEPT
    if args.command == "test" and args.model is None:
        args.model = "simple" if args.counts else "independence"
    try:
        return args.func(args)
    except (CliError, ValueError, KeyError, OSError, ArithmeticError) as exc:
        print(f"sparsegof: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
