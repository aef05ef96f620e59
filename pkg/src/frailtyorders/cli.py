"""Command-line interface.

Every command prints a JSON report on stdout.  With ``--out DIR`` the
report is also written to ``DIR/report.json`` and, depending on
``--format``, curve dumps go to ``DIR/curves.csv`` and ``DIR/curves.svg``.

Exit codes: 0 success or "holds", 1 "fails" or hypotheses not met,
2 inconclusive, 3 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .ageing import AgeingClass, classify, classify_all
from .distributions import ContinuousDistribution, WeibullParams, parse_distribution, parse_mixing
from .inference import (
    Sample,
    a_diagnostics,
    anderson_darling_weibull,
    fit_frailty_a,
    fit_resilience_a,
    load_sample,
    qq_data,
    weibull_mle,
)
from .mixture import parse_model
from .monotonicity import GridSpec, Verdict
from .numerics import ConvergenceError, DomainError
from .orders import OrderRelation, check_dispersive, check_order
from .scenarios import CurveDump, bundled_leukaemia, run_scenario
from .theorems import EXAMPLE_GRID, degenerate_sanity, get_theorem, reproduce_examples, verify_theorem

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3
_VERDICT_EXIT = {Verdict.HOLDS: EXIT_OK, Verdict.FAILS: EXIT_FAIL, Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# output


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_curves_csv(dump: CurveDump, path: Path) -> None:
    with path.open("w", newline="") as fh:
        for key, value in dump.metadata.items():
            fh.write(f"# {key}: {json.dumps(_jsonable(value))}\n")
        writer = csv.writer(fh)
        names = list(dump.columns)
        writer.writerow(["x", *names])
        for i, x in enumerate(dump.x):
            writer.writerow([repr(float(x)), *(repr(float(dump.columns[n][i])) for n in names)])


def read_curves_csv(path: Path) -> CurveDump:
    meta, rows = {}, []
    with path.open() as fh:
        for line in fh:
            if line.startswith("# "):
                key, _, value = line[2:].partition(": ")
                meta[key] = json.loads(value)
            else:
                rows.append(line)
    reader = csv.reader(rows)
    header = next(reader)
    data = np.array([[float(v) for v in row] for row in reader])
    return CurveDump(data[:, 0], {n: data[:, i + 1] for i, n in enumerate(header[1:])}, meta)


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]


def write_curves_svg(dump: CurveDump, path: Path, title: str = "") -> None:
    """Minimal line chart; non-finite points break the line."""
    w, h, pad = 720, 440, 60
    x = dump.x
    ys = [np.asarray(c, dtype=float) for c in dump.columns.values()]
    finite = np.concatenate([y[np.isfinite(y)] for y in ys]) if ys else np.array([0.0])
    y_lo, y_hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    def px(v):
        return pad + (v - x[0]) / (x[-1] - x[0]) * (w - 2 * pad)

    def py(v):
        return h - pad - (v - y_lo) / (y_hi - y_lo) * (h - 2 * pad)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
             f'font-family="sans-serif" font-size="11">',
             f'<rect width="{w}" height="{h}" fill="white"/>',
             f'<text x="{w / 2}" y="20" text-anchor="middle" font-size="13">{title}</text>',
             f'<line x1="{pad}" y1="{h - pad}" x2="{w - pad}" y2="{h - pad}" stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{h - pad}" stroke="black"/>']
    for frac in np.linspace(0, 1, 5):
        xv, yv = x[0] + frac * (x[-1] - x[0]), y_lo + frac * (y_hi - y_lo)
        parts.append(f'<text x="{px(xv):.1f}" y="{h - pad + 16}" text-anchor="middle">{xv:.4g}</text>')
        parts.append(f'<text x="{pad - 6}" y="{py(yv) + 4:.1f}" text-anchor="end">{yv:.4g}</text>')
    for i, (name, y) in enumerate(zip(dump.columns, ys)):
        color = _PALETTE[i % len(_PALETTE)]
        segment: list[str] = []
        for xv, yv in zip(x, y):
            if np.isfinite(yv):
                segment.append(f"{px(xv):.2f},{py(yv):.2f}")
            elif segment:
                parts.append(f'<polyline fill="none" stroke="{color}" points="{" ".join(segment)}"/>')
                segment = []
        if segment:
            parts.append(f'<polyline fill="none" stroke="{color}" points="{" ".join(segment)}"/>')
        parts.append(f'<text x="{w - pad + 4}" y="{pad + 14 * i}" fill="{color}" '
                     f'text-anchor="end">{name}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")


def _emit(args, report: dict[str, Any], dump: CurveDump | None = None) -> None:
    text = json.dumps(_jsonable(report), indent=2, sort_keys=False)
    print(text)
    if args.out is None:
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(text + "\n")
    if dump is not None and args.format in ("csv", "svg"):
        write_curves_csv(dump, out / "curves.csv")
        if args.format == "svg":
            write_curves_svg(dump, out / "curves.svg", title=str(report.get("command", "")))


# ---------------------------------------------------------------------------
# argument helpers


def _parse_grid(text: str | None, t_text: str | None, default: GridSpec | None) -> GridSpec:
    if text is None:
        if default is None:
            raise UsageError("--grid x_lo,x_hi,n is required")
        base = default
    else:
        try:
            lo, hi, n = text.split(",")
            base = GridSpec(float(lo), float(hi), int(n))
        except ValueError as exc:
            raise UsageError(f"--grid expects x_lo,x_hi,n; got {text!r}") from exc
    ts = base.t_values
    if t_text is not None:
        try:
            ts = tuple(float(t) for t in t_text.split(","))
        except ValueError as exc:
            raise UsageError(f"--t expects comma-separated numbers; got {t_text!r}") from exc
    return GridSpec(base.x_lo, base.x_hi, base.n_x, ts, base.slack)


def _load_data(args, required: bool = True) -> Sample:
    if args.data is None:
        if required:
            raise UsageError("--data <csv> is required")
        return bundled_leukaemia()
    try:
        return load_sample(args.data)
    except OSError as exc:
        raise UsageError(f"cannot read {args.data}: {exc}") from exc


def _baseline_params(args, sample: Sample) -> WeibullParams:
    if (args.scale is None) != (args.shape is None):
        raise UsageError("--scale and --shape go together")
    if args.scale is not None:
        return WeibullParams(args.scale, args.shape)
    return weibull_mle(sample).params


def _dist_or_model(text: str) -> ContinuousDistribution:
    head = text.strip().split(maxsplit=1)[0].lower() if text.strip() else ""
    if head in ("frailty", "resilience"):
        return parse_model(text)
    return parse_distribution(text)


def _scaled_default_grid(dist: ContinuousDistribution) -> GridSpec:
    s = dist.scale
    if math.isfinite(dist.support_hi):
        lo, hi = dist.support_lo, dist.support_hi
        return GridSpec(lo + 0.02 * (hi - lo), lo + 0.6 * (hi - lo), 128)
    return GridSpec(0.05 * s, 3.0 * s, 128, tuple(np.array([0.1, 0.5, 1.0, 2.0]) * s))


# ---------------------------------------------------------------------------
# commands


def cmd_fit_baseline(args) -> int:
    sample = _load_data(args)
    fit = weibull_mle(sample)
    _emit(args, {"command": "fit-baseline", "sample": {"label": sample.label, "n": sample.n},
                 **fit.to_dict()})
    return EXIT_OK


def cmd_ad_test(args) -> int:
    sample = _load_data(args)
    params = _baseline_params(args, sample)
    ad = anderson_darling_weibull(sample, params, n_boot=args.n_boot, seed=args.seed, null=args.null)
    _emit(args, {"command": "ad-test", "scale": params.scale, "shape": params.shape, **ad.to_dict(),
                 "reject_at_5pct": ad.statistic > ad.critical_value})
    return EXIT_OK


def cmd_qq(args) -> int:
    sample = _load_data(args)
    params = _baseline_params(args, sample)
    pairs = np.array(qq_data(sample, params))
    corr = float(np.corrcoef(pairs.T)[0, 1]) if sample.n > 1 else None
    dump = None
    if sample.n > 1 and np.all(np.diff(pairs[:, 0]) > 0):
        dump = CurveDump(pairs[:, 0], {"empirical": pairs[:, 1], "diagonal": pairs[:, 0].copy()},
                         {"command": "qq", "scale": params.scale, "shape": params.shape})
    _emit(args, {"command": "qq", "scale": params.scale, "shape": params.shape,
                 "correlation": corr, "pairs": pairs.tolist()}, dump)
    return EXIT_OK


def _cmd_fit_a(args, kind) -> int:
    sample = _load_data(args)
    params = _baseline_params(args, sample)
    fitter = fit_frailty_a if kind == "frailty" else fit_resilience_a
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fit = fitter(sample, params, bracket=(args.a_lo, args.a_hi))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    diag = a_diagnostics(kind, sample, params, fit.a, (args.a_lo, args.a_hi))
    _emit(args, {"command": f"fit-{kind}", "scale": params.scale, "shape": params.shape,
                 "a": fit.a, "loglik": fit.loglik, "warnings": [str(w.message) for w in caught],
                 "diagnostics": diag})
    return EXIT_OK


def cmd_classify(args) -> int:
    dist = _dist_or_model(args.dist)
    grid = _parse_grid(args.grid, args.t, _scaled_default_grid(dist))
    if args.cls:
        reports = {AgeingClass(c.upper()): classify(dist, c.upper(), grid) for c in args.cls}
    else:
        reports = classify_all(dist, grid)
    for cls, rep in reports.items():
        witness = "" if rep.witness is None else f"  x={rep.witness[0]:.6g} t={rep.witness[1]:.6g}"
        print(f"{cls.value:5s} {rep.holds.value:12s} {rep.worst_margin: .3e}{witness}", file=sys.stderr)
    _emit(args, {"command": "classify", "distribution": repr(dist), "grid": grid.describe(),
                 "classes": {c.value: r.to_dict() for c, r in reports.items()}})
    if args.cls:
        return max(_VERDICT_EXIT[r.holds] for r in reports.values())
    return EXIT_OK


def cmd_check_order(args) -> int:
    X, Y = _dist_or_model(args.x), _dist_or_model(args.y)
    rel = OrderRelation(args.rel)
    if rel is OrderRelation.disp:
        rep = check_dispersive(X, Y)
        grid_desc = None
    else:
        grid = _parse_grid(args.grid, args.t, _scaled_default_grid(X))
        rep = check_order(X, Y, rel, grid, reverse=args.reverse)
        grid_desc = grid.describe()
    _emit(args, {"command": "check-order", "x": repr(X), "y": repr(Y), "grid": grid_desc,
                 "report": rep.to_dict()})
    return _VERDICT_EXIT[rep.holds]


def cmd_verify_theorem(args) -> int:
    theorem = get_theorem(args.theorem)
    baseline = parse_distribution(args.baseline)
    mixing = parse_mixing(args.mixing)
    grid = _parse_grid(args.grid, args.t, _scaled_default_grid(baseline))
    rep = verify_theorem(theorem, baseline, mixing, grid)
    _emit(args, {"command": "verify-theorem", "baseline": repr(baseline), "mixing": repr(mixing),
                 "grid": grid.describe(), **rep.to_dict()})
    return rep.exit_code


def cmd_reproduce(args) -> int:
    if args.target == "examples":
        grid = _parse_grid(args.grid, args.t, EXAMPLE_GRID)
        results = reproduce_examples(grid)
        sanity = degenerate_sanity(grid)
        all_hold = all(r.holds for r in results)
        sanity_ok = all(r.holds is Verdict.HOLDS for r in sanity.values())
        for r in results:
            c = r.claim_report
            extra = "" if c.witness is None else f"  witness x={c.witness[0]:.6g} t={c.witness[1]:.6g}"
            print(f"Example {r.example.id}: {r.example.claim:28s} {c.holds.value}{extra}", file=sys.stderr)
        _emit(args, {"command": "reproduce examples", "grid": grid.describe(), "all_hold": all_hold,
                     "examples": [r.to_dict() for r in results],
                     "degenerate_sanity": {k: v.to_dict() for k, v in sanity.items()}})
        return EXIT_OK if all_hold and sanity_ok else EXIT_FAIL

    if args.target == "scenario2" and args.data is None:
        raise UsageError("scenario2 needs --data <bearings csv>; no bearing data is bundled")
    sample = _load_data(args, required=args.target != "scenario1")
    x_range, n_x = None, 128
    if args.grid is not None:
        g = _parse_grid(args.grid, None, None)
        x_range, n_x = (g.x_lo, g.x_hi), g.n_x
    t_values = tuple(float(t) for t in args.t.split(",")) if args.t else None
    res = run_scenario(args.target, sample, a=args.a, n_x=n_x, x_range=x_range, t_values=t_values,
                       n_boot=args.n_boot, seed=args.seed)
    _emit(args, {"command": f"reproduce {args.target}", **res.report}, res.curves)
    curve_checks = [res.checks[name] for name in list(res.checks)[:2]]
    return max(_VERDICT_EXIT[c.holds] for c in curve_checks)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="directory for report.json and curve dumps")
    common.add_argument("--format", choices=("json", "csv", "svg"), default="csv",
                        help="artifacts written to --out (default: csv)")
    common.add_argument("--seed", type=int, default=20240101, help="bootstrap seed")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", help="CSV of lifetimes, one per line, '#' comments allowed")

    params = argparse.ArgumentParser(add_help=False)
    params.add_argument("--scale", type=float, help="Weibull scale (default: fitted)")
    params.add_argument("--shape", type=float, help="Weibull shape (default: fitted)")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--grid", help="x_lo,x_hi,n")
    grid.add_argument("--t", help="comma-separated shifts")

    boot = argparse.ArgumentParser(add_help=False)
    boot.add_argument("--n-boot", type=int, default=10_000)

    p = _Parser(prog="frailtyorders", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("fit-baseline", parents=[common, data], help="Weibull MLE with 95%% intervals")
    s.set_defaults(func=cmd_fit_baseline)

    s = sub.add_parser("ad-test", parents=[common, data, params, boot], help="Anderson-Darling test")
    s.add_argument("--null", choices=("fixed", "refit"), default="fixed")
    s.set_defaults(func=cmd_ad_test)

    s = sub.add_parser("qq", parents=[common, data, params], help="QQ pairs against a Weibull law")
    s.set_defaults(func=cmd_qq)

    for kind in ("frailty", "resilience"):
        s = sub.add_parser(f"fit-{kind}", parents=[common, data, params],
                           help=f"MLE of a for the gamma {kind} model")
        s.add_argument("--a-lo", type=float, default=0.05)
        s.add_argument("--a-hi", type=float, default=20.0)
        s.set_defaults(func=lambda a, k=kind: _cmd_fit_a(a, k))

    s = sub.add_parser("classify", parents=[common, grid], help="ageing classes of a distribution")
    s.add_argument("--dist", required=True, help='e.g. "weibull scale=1 shape=2"')
    s.add_argument("--class", dest="cls", action="append",
                   choices=[c.value for c in AgeingClass] + [c.value.lower() for c in AgeingClass])
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("check-order", parents=[common, grid], help="test X <=_rel Y")
    s.add_argument("--rel", required=True, choices=[r.value for r in OrderRelation])
    s.add_argument("--x", required=True, help="distribution or model spec")
    s.add_argument("--y", required=True, help="distribution or model spec")
    s.add_argument("--reverse", action="store_true", help="require the opposite monotonicity")
    s.set_defaults(func=cmd_check_order)

    s = sub.add_parser("verify-theorem", parents=[common, grid], help="check a comparison theorem")
    s.add_argument("theorem", help="e.g. 3.1i, 4.3(ii), mit.i")
    s.add_argument("--baseline", required=True)
    s.add_argument("--mixing", required=True)
    s.set_defaults(func=cmd_verify_theorem)

    s = sub.add_parser("reproduce", parents=[common, data, grid, boot],
                       help="worked examples or a data scenario")
    s.add_argument("target", choices=("scenario1", "scenario2", "examples"))
    s.add_argument("--a", type=float, help="use this mixing parameter instead of the fitted one")
    s.set_defaults(func=cmd_reproduce)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DomainError, ValueError) as exc:
        print(f"frailtyorders: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"frailtyorders: numerical failure: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
