"""Command-line harness: synthesis, reconstruction, convergence sweeps.

Exit codes: 0 success, 1 numerical failure, 2 configuration or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import model
from .errors import ConfigurationError, ReconstructionError, StageError
from .oracles import identity_suite
from .pipeline import (ReconstructionConfig, error_report, oracle_result, reconstruct,
                       dumps_result)
from .precision import working_context
from .sweep import DEFAULT_MS, SWEEPS, SweepSpec, geometric_grid

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2

RECONSTRUCT_COLUMNS = ("M", "d", "j", "xi_true", "xi_est", "xi_err", "l", "A_true", "A_est",
                       "A_err", "sup_err_Dr", "seconds", "xi_ref", "status")


class UsageError(Exception):
    """Bad input file or flag combination (exit code 2)."""


# --------------------------------------------------------------------------
# CSV


def format_value(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def parse_value(text):
    if text == "":
        return None
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def write_csv(header, rows):
    """Header plus rows as CSV text (``\\n`` line endings, ``%.17g`` floats)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def read_csv(text):
    """Inverse of :func:`write_csv`: ``(header, rows)`` with typed values."""
    r = list(csv.reader(io.StringIO(text)))
    if not r:
        raise UsageError("empty CSV")
    return tuple(r[0]), [[parse_value(v) for v in row] for row in r[1:]]


# --------------------------------------------------------------------------
# Plot output


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def svg_loglog(series, title="", refs=(), data_csv=""):
    """Self-contained SVG log-log plot.

    ``series`` maps a label to ``(Ms, errors)``; ``refs`` holds
    ``(label, Ms, values)`` drawn dashed.  ``data_csv`` is embedded verbatim.
    """
    W, H, L, R, T, B = 640, 480, 70, 150, 40, 50
    pts = [(m, e) for ms, es in series.values() for m, e in zip(ms, es)
           if e is not None and math.isfinite(e) and e > 0]
    pts += [(m, e) for _, ms, es in refs for m, e in zip(ms, es) if math.isfinite(e) and e > 0]
    if not pts:
        raise ConfigurationError("nothing to plot")
    x0 = math.floor(math.log10(min(p[0] for p in pts)))
    x1 = math.ceil(math.log10(max(p[0] for p in pts)))
    y0 = math.floor(math.log10(min(p[1] for p in pts)))
    y1 = math.ceil(math.log10(max(p[1] for p in pts)))
    x1, y1 = max(x1, x0 + 1), max(y1, y0 + 1)

    def px(m):
        return L + (math.log10(m) - x0) / (x1 - x0) * (W - L - R)

    def py(e):
        return H - B - (math.log10(e) - y0) / (y1 - y0) * (H - T - B)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
           f"<title>{title}</title>"]
    if data_csv:
        out.append(f"<metadata><![CDATA[\n{data_csv}]]></metadata>")
    out.append(f'<rect x="{L}" y="{T}" width="{W - L - R}" height="{H - T - B}" fill="none" stroke="black"/>')
    for k in range(x0, x1 + 1):
        x = px(10 ** k)
        out.append(f'<line x1="{x:.1f}" y1="{T}" x2="{x:.1f}" y2="{H - B}" stroke="#ddd"/>')
        out.append(f'<text x="{x:.1f}" y="{H - B + 15}" text-anchor="middle">1e{k}</text>')
    for k in range(y0, y1 + 1):
        y = py(10 ** k)
        out.append(f'<line x1="{L}" y1="{y:.1f}" x2="{W - R}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{L - 5}" y="{y + 4:.1f}" text-anchor="end">1e{k}</text>')
    out.append(f'<text x="{(L + W - R) / 2}" y="{H - 12}" text-anchor="middle">M</text>')
    out.append(f'<text x="{W / 2}" y="{T - 15}" text-anchor="middle">{title}</text>')

    def line(ms, es, color, dash, label, row):
        xy = [(px(m), py(e)) for m, e in zip(ms, es) if e is not None and math.isfinite(e) and e > 0]
        if not xy:
            return
        d = " ".join(f"{x:.1f},{y:.1f}" for x, y in xy)
        extra = ' stroke-dasharray="5,4"' if dash else ""
        out.append(f'<polyline points="{d}" fill="none" stroke="{color}"{extra}/>')
        if not dash:
            out.extend(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="2.5" fill="{color}"/>' for x, y in xy)
        ly = T + 12 + 16 * row
        out.append(f'<line x1="{W - R + 10}" y1="{ly - 4}" x2="{W - R + 30}" y2="{ly - 4}" '
                   f'stroke="{color}"{extra}/>')
        out.append(f'<text x="{W - R + 35}" y="{ly}">{label}</text>')

    row = 0
    for i, (label, (ms, es)) in enumerate(series.items()):
        line(ms, es, _COLORS[i % len(_COLORS)], False, label, row)
        row += 1
    for i, (label, ms, es) in enumerate(refs):
        line(ms, es, _COLORS[i % len(_COLORS)], True, label, row)
        row += 1
    out.append("</svg>")
    return "\n".join(out) + "\n"


def gnuplot_script(data_file, columns, title=""):
    """gnuplot commands plotting every column of ``data_file`` against ``M``."""
    plots = ", ".join(f"'{data_file}' using 1:{i + 2} with linespoints title '{c}'"
                      for i, c in enumerate(columns))
    return (f"set datafile separator ','\nset logscale xy\nset key outside\n"
            f"set xlabel 'M'\nset ylabel 'error'\nset title '{title}'\n"
            f"plot {plots}\n")


# --------------------------------------------------------------------------
# Config files


def _load_json(path):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise UsageError(f"{path}: expected a JSON object")
    return doc


def _check_schema(doc, path):
    if doc.get("schema") != model.SCHEMA_VERSION:
        raise UsageError(f"{path}: unsupported schema {doc.get('schema')!r}")


def synth_from_config(doc):
    """Test function described by a synth config (keys ``K``, ``d1``, ``N``, ``seed``,
    optional ``bounds`` and ``xis``)."""
    try:
        K, d1, seed = int(doc["K"]), int(doc["d1"]), int(doc.get("seed", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"synth config needs integer K, d1 and seed ({exc})") from exc
    N = int(doc.get("N", 2 * 1024 + 16))
    return model.synth_random(K, d1, N, seed, doc.get("bounds"), doc.get("xis"))


# --------------------------------------------------------------------------
# Subcommands


def cmd_synth(args):
    doc = _load_json(args.config)
    _check_schema(doc, args.config)
    f = synth_from_config(doc)
    text = model.dumps_function(f)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    s = f.singular
    print(f"K={s.K} d1={s.d1} seed={f.seed} xis={[round(float(x), 6) for x in s.xis]} "
          f"smooth coefficients={len(f.smooth.coeffs)}", file=sys.stderr)
    return EXIT_OK


def _reconstruct_rows(f, res, rep, M, seconds):
    rows = []
    d = res.config.d
    for jt, pi in enumerate(rep.matching):
        t = f.singular.jumps[jt]
        e = res.jumps[pi]
        for l in range(d + 1):
            rows.append([M, d, jt, t.xi, float(e.xi), rep.xi_errors[jt], l, t.magnitudes[l],
                         float(e.magnitudes[l]), rep.magnitude_errors[jt][l], rep.sup_error,
                         seconds, float(M) ** (-d - 2), "ok"])
    return rows


def cmd_reconstruct(args):
    path = Path(args.function)
    if not path.is_file():
        raise UsageError(f"no such file: {args.function}")
    try:
        f = model.loads_function(path.read_text())
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{args.function}: not a test function file ({exc})") from exc
    K = args.K if args.K is not None else f.singular.K
    d = args.d if args.d is not None else max(0, f.singular.d1 // 2 - 1)
    cfg = ReconstructionConfig(K, d, f.singular.d1, args.M, {"J3": args.J3} if args.J3 else {},
                               args.localize_single)
    ctx = working_context(args.dps)
    N = cfg.window_halfwidth()
    t0 = time.perf_counter()
    window = model.fourier_window(f, -N, N, ctx=ctx)
    status, code, rows = "ok", EXIT_OK, []
    try:
        res = oracle_result(f, window, cfg) if args.oracle else reconstruct(window, cfg, ctx)
        seconds = time.perf_counter() - t0
        rep = error_report(res, f, args.r, args.grid)
        rows = _reconstruct_rows(f, res, rep, args.M, seconds)
        if args.result:
            Path(args.result).write_text(dumps_result(res))
    except ReconstructionError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        status = f"{type(exc).__name__}: {exc}".replace("\n", " ")
        if isinstance(exc, StageError):
            status = f"{exc.stage}: {exc.cause}"
        rows = [[args.M, d, None, None, None, None, None, None, None, None, None,
                 time.perf_counter() - t0, float(args.M) ** (-d - 2), status]]
        code = EXIT_NUMERICAL
    text = write_csv(RECONSTRUCT_COLUMNS, rows)
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        sys.stdout.write(text)
    if code:
        print(f"reconstruction failed: {status}", file=sys.stderr)
    return code


def _reference_lines(kind, cfg, Ms, med):
    d = int(cfg.get("d", 0))
    refs = []
    orders = {"xi": -d - 2 if kind != "prony" else -2, "sup": -d - 1}
    orders.update({f"A{l}c": l - d - 1 for l in range(d + 1)})
    orders.update({f"A{l}": l - d - 1 for l in range(d + 1)})
    for q, order in orders.items():
        if q in med:
            vals = med[q]
            i = next((i for i, v in enumerate(vals) if math.isfinite(v) and v > 0), None)
            if i is None:
                continue
            c = vals[i] * Ms[i] ** (-order)
            refs.append((f"M^{order} ({q})", Ms, [c * m ** order for m in Ms]))
    return refs


def run_sweep(kind, spec, out_prefix=None, title=None, fit_range=(None, None)):
    """Run a sweep and write ``<prefix>.csv``, ``_trials.csv``, ``_fits.csv``, ``.svg``, ``.gp``.

    Returns ``(result, fits)`` where ``fits`` maps each quantity to a
    :class:`SlopeFit` or to the error message when no fit was possible.
    """
    result = SWEEPS[kind](spec)
    Ms = list(spec.Ms)
    qs = list(result.quantities)
    med = {q: result.median(q) for q in qs}
    n_ok = [sum(1 for r in result.records if r.M == M and r.status == "ok") for M in Ms]
    rows = [[M] + [med[q][i] for q in qs] + [n_ok[i]] for i, M in enumerate(Ms)]
    median_csv = write_csv(["M"] + qs + ["n_ok"], rows)
    trials = sorted(result.records, key=lambda r: (r.M, r.trial))
    trial_csv = write_csv(["M", "trial"] + qs + ["status"],
                          [[r.M, r.trial] + [r.values.get(q) for q in qs] + [r.status] for r in trials])
    fits, fit_rows = {}, []
    for q in qs:
        try:
            fit = result.fit(q, *fit_range)
            fits[q] = fit
            fit_rows.append([q, fit.slope, fit.intercept, fit.r2, len(fit.points), fit.floor])
        except ConfigurationError as exc:
            fits[q] = str(exc)
            fit_rows.append([q, None, None, None, 0, None])
    fit_csv = write_csv(["quantity", "slope", "intercept", "r2", "points", "floor"], fit_rows)
    if out_prefix:
        base = Path(out_prefix)
        base.parent.mkdir(parents=True, exist_ok=True)
        Path(f"{base}.csv").write_text(median_csv)
        Path(f"{base}_trials.csv").write_text(trial_csv)
        Path(f"{base}_fits.csv").write_text(fit_csv)
        title = title or f"{kind} sweep"
        series = {q: (Ms, list(med[q])) for q in qs}
        refs = _reference_lines(kind, spec.cfg, Ms, med)
        Path(f"{base}.svg").write_text(svg_loglog(series, title, refs, median_csv))
        Path(f"{base}.gp").write_text(gnuplot_script(f"{base.name}.csv", qs, title))
    return result, fits, median_csv


def _spec_from_doc(doc, args):
    kind = doc.get("kind")
    if kind not in SWEEPS:
        raise UsageError(f"sweep kind must be one of {sorted(SWEEPS)}, got {kind!r}")
    if "Ms" in doc:
        Ms = tuple(int(m) for m in doc["Ms"])
    elif "grid" in doc:
        g = doc["grid"]
        Ms = geometric_grid(int(g["lo"]), int(g["hi"]), int(g["n"]))
    else:
        Ms = DEFAULT_MS
    trials = args.trials if args.trials is not None else int(doc.get("trials", 5))
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    return kind, SweepSpec(Ms, dict(doc.get("cfg", {})), trials, seed)


def _print_fits(fits, out=sys.stdout):
    for q, fit in fits.items():
        if isinstance(fit, str):
            print(f"{q}: no fit ({fit})", file=out)
        else:
            print(f"{q}: slope {fit.slope:.3f}  R^2 {fit.r2:.4f}  points {len(fit.points)}", file=out)


def cmd_sweep(args):
    doc = _load_json(args.config)
    _check_schema(doc, args.config)
    kind, spec = _spec_from_doc(doc, args)
    result, fits, median_csv = run_sweep(kind, spec, args.out, doc.get("title"))
    if not args.out:
        sys.stdout.write(median_csv)
    _print_fits(fits, sys.stderr if not args.out else sys.stdout)
    fails = result.failures()
    if fails:
        print(f"{len(fails)} of {len(result.records)} trials failed", file=sys.stderr)
    return EXIT_NUMERICAL if len(fails) == len(result.records) else EXIT_OK


def cmd_localize_demo(args):
    Ms = tuple(args.Ms) if args.Ms else geometric_grid(32, 1024, 9)
    cfg = {"xis": [0.0, 3.0], "target": 0, "center": 1 / 40, "E": 4 / 3, "d": 1, "d1": 6}
    spec = SweepSpec(Ms, cfg, args.trials, args.seed)
    result, _, median_csv = run_sweep("localize", spec, args.out, "localized jump at 0",
                                      (None, args.fit_max))
    if not args.out:
        sys.stdout.write(median_csv)
    fit = result.fit("xi", None, args.fit_max)
    print(f"xi: slope {fit.slope:.3f} over M <= {args.fit_max} (R^2 {fit.r2:.3f})")
    med = result.median("xi")
    beyond = [(M, e) for M, e in zip(Ms, med) if M > args.fit_max]
    if beyond:
        print("beyond the fit range: " + ", ".join(f"M={M}: {e:.2e}" for M, e in beyond))
    return EXIT_OK


def cmd_identities(args):
    checks = identity_suite(seed=args.seed, cases=args.cases)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERICAL


# --------------------------------------------------------------------------
# Entry point


def build_parser():
    p = argparse.ArgumentParser(prog="jumpfourier", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="synthesize a random test function")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("reconstruct", help="reconstruct a stored test function")
    s.add_argument("--function", required=True)
    s.add_argument("--M", type=int, required=True)
    s.add_argument("--d", type=int)
    s.add_argument("--K", type=int)
    s.add_argument("--r", type=float, default=0.2)
    s.add_argument("--J3", type=float)
    s.add_argument("--grid", type=int, default=4096)
    s.add_argument("--dps", type=int, help="decimal digits of the single-jump stage")
    s.add_argument("--oracle", action="store_true", help="use the true jump parameters")
    s.add_argument("--localize-single", action="store_true",
                   help="multiply by a bump even when there is only one jump")
    s.add_argument("--csv")
    s.add_argument("--result")
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("sweep", help="error versus M with order fits")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="output prefix")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("localize-demo", help="two jumps at 0 and 3, bump around 0")
    s.add_argument("--Ms", type=int, nargs="+")
    s.add_argument("--trials", type=int, default=5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--fit-max", type=int, default=256)
    s.add_argument("--out")
    s.set_defaults(func=cmd_localize_demo)

    s = sub.add_parser("identities", help="run the combinatorial identity suite")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cases", type=int, default=500)
    s.set_defaults(func=cmd_identities)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ReconstructionError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
