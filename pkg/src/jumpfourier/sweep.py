"""Convergence studies: error versus cutoff ``M`` and log-log order fits."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import model
from .bump import bump_window, make_bump
from .eckhoff import resolve_jump
from .errors import ConfigurationError, ReconstructionError
from .localize import bump_range, localized_coeffs
from .pipeline import ReconstructionConfig, error_report, reconstruct
from .precision import machine_eps, working_context
from .prony import prony_estimate, prony_problem

DEFAULT_MS = (16, 23, 32, 45, 64, 91, 128, 181, 256, 362, 512, 724, 1024)
FLOOR_FACTOR = 100.0


def geometric_grid(lo, hi, n):
    """``n`` integers spaced geometrically from ``lo`` to ``hi`` (both included)."""
    if n < 2 or lo < 1 or hi <= lo:
        raise ConfigurationError("need n >= 2 and 1 <= lo < hi")
    vals = np.rint(np.exp(np.linspace(math.log(lo), math.log(hi), n))).astype(int)
    if len(set(vals.tolist())) != n:
        raise ConfigurationError(f"grid {lo}..{hi} too narrow for {n} distinct points")
    return tuple(int(v) for v in vals)


@dataclass(frozen=True)
class SlopeFit:
    quantity: str
    slope: float
    intercept: float
    r2: float
    points: tuple  # (M, error) pairs actually used
    floor: float = 0.0

    def predict(self, M):
        return 10 ** (self.intercept + self.slope * math.log10(M))


def fit_slope(Ms, errors, quantity="error", floor=None):
    """Least-squares fit of ``log10(error)`` against ``log10(M)``.

    Points with non-finite errors or errors below ``floor`` (default
    ``100 * eps`` of double precision) are excluded.  At least two points
    must remain.
    """
    floor = FLOOR_FACTOR * machine_eps() if floor is None else float(floor)
    pts = [(int(m), float(e)) for m, e in zip(Ms, errors)
           if math.isfinite(float(e)) and float(e) > floor]
    if len(pts) < 2:
        raise ConfigurationError(f"{quantity}: fewer than two points above the floor {floor:.3g}")
    x = np.log10([p[0] for p in pts])
    y = np.log10([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 1.0
    return SlopeFit(quantity, float(slope), float(intercept), r2, tuple(pts), floor)


@dataclass(frozen=True)
class SweepSpec:
    """Cutoffs, configuration template and trial count of one study.

    ``trial`` number ``t`` uses the function synthesized with seed ``seed + t``.
    """

    Ms: tuple
    cfg: dict
    trials: int = 5
    seed: int = 0

    def __post_init__(self):
        Ms = tuple(int(m) for m in self.Ms)
        if len(Ms) < 2 or any(b <= a for a, b in zip(Ms, Ms[1:])):
            raise ConfigurationError("Ms must be ascending with at least two values")
        if self.trials < 1:
            raise ConfigurationError("trials must be positive")
        object.__setattr__(self, "Ms", Ms)


@dataclass(frozen=True)
class SweepRecord:
    M: int
    trial: int
    values: dict
    status: str = "ok"
    seconds: float = 0.0


@dataclass
class SweepResult:
    spec: SweepSpec
    records: list
    quantities: tuple
    eps: float = field(default_factory=machine_eps)

    def median(self, quantity):
        """Median over successful trials per ``M`` (NaN where every trial failed)."""
        out = []
        for M in self.spec.Ms:
            vals = [r.values[quantity] for r in self.records
                    if r.M == M and r.status == "ok" and quantity in r.values]
            vals = [v for v in vals if math.isfinite(v)]
            out.append(float(np.median(vals)) if vals else math.nan)
        return np.array(out)

    def failures(self):
        return [r for r in self.records if r.status != "ok"]

    def fit(self, quantity, lo=None, hi=None):
        Ms = np.array(self.spec.Ms)
        med = self.median(quantity)
        keep = np.ones(len(Ms), dtype=bool)
        if lo is not None:
            keep &= Ms >= lo
        if hi is not None:
            keep &= Ms <= hi
        return fit_slope(Ms[keep], med[keep], quantity, FLOOR_FACTOR * self.eps)


def _run(spec, quantities, trial_fn, eps):
    import time

    records = []
    for M in spec.Ms:
        for t in range(spec.trials):
            t0 = time.perf_counter()
            try:
                vals = trial_fn(M, spec.seed + t)
                status = "ok"
            except ReconstructionError as exc:
                vals, status = {}, type(exc).__name__
            records.append(SweepRecord(M, t, vals, status, time.perf_counter() - t0))
    if records and all(r.status != "ok" for r in records):
        warnings.warn("every trial of the sweep failed", RuntimeWarning, stacklevel=3)
    return SweepResult(spec, records, tuple(quantities), eps)


def _functions(spec, K, d1, xis=None, width=2):
    n = width * max(spec.Ms) + 16
    b = spec.cfg.get("bounds")
    return {spec.seed + t: model.synth_random(K, d1, n, spec.seed + t, b, xis)
            for t in range(spec.trials)}


def eckhoff_sweep(spec):
    """Single-jump resolution straight from the coefficients of ``f``.

    ``spec.cfg`` keys: ``d``, ``d1``, optional ``dps`` (working digits),
    ``bounds``.  Quantities: ``xi``, ``A{l}`` (real parts) and ``A{l}c``
    (complex solution before the real part is taken).
    """
    d, d1 = int(spec.cfg["d"]), int(spec.cfg["d1"])
    ctx = working_context(spec.cfg.get("dps"))
    fns = _functions(spec, 1, d1, width=1)

    def trial(M, seed):
        f = fns[seed]
        w = model.fourier_window(f, M, M + d + 1, ctx=ctx)
        est = resolve_jump(w, d, M, ctx)
        true = f.singular.jumps[0]
        vals = {"xi": float(abs(model.wrap_angle(float(est.xi - true.xi))))}
        for l in range(d + 1):
            vals[f"A{l}"] = float(abs(est.magnitudes[l] - true.magnitudes[l]))
            vals[f"A{l}c"] = float(abs(est.diagnostics["magnitudes_complex"][l] - true.magnitudes[l]))
        return vals

    qs = ["xi"] + [f"A{l}" for l in range(d + 1)] + [f"A{l}c" for l in range(d + 1)]
    return _run(spec, qs, trial, machine_eps(ctx))


def pipeline_sweep(spec):
    """Full reconstruction.  ``spec.cfg`` keys: ``K``, ``d``, ``d1``, ``r``,
    optional ``dps``, ``bounds``, ``xis``, ``grid``.  Quantities: ``sup``,
    ``xi`` (largest location error), ``A{l}`` (largest over jumps)."""
    c = spec.cfg
    K, d, d1, r = int(c["K"]), int(c["d"]), int(c["d1"]), float(c.get("r", 0.2))
    ctx = working_context(c.get("dps"))
    fns = _functions(spec, K, d1, c.get("xis"))

    def trial(M, seed):
        f = fns[seed]
        cfg = ReconstructionConfig(K, d, d1, M, c.get("bounds") or {})
        N = cfg.window_halfwidth()
        res = reconstruct(model.fourier_window(f, -N, N, ctx=ctx), cfg, ctx)
        rep = error_report(res, f, r, int(c.get("grid", 4096)))
        vals = {"sup": rep.sup_error, "xi": max(rep.xi_errors)}
        for l in range(d + 1):
            vals[f"A{l}"] = max(m[l] for m in rep.magnitude_errors)
        return vals

    qs = ["sup", "xi"] + [f"A{l}" for l in range(d + 1)]
    # the sup error is evaluated in double whatever the working precision
    return _run(spec, qs, trial, machine_eps())


def prony_sweep(spec):
    """Order-zero location estimates.  ``spec.cfg`` keys: ``K``, ``d1``,
    optional ``xis``, ``bounds``.  Quantity ``xi``: largest matched error."""
    c = spec.cfg
    K, d1 = int(c["K"]), int(c["d1"])
    fns = _functions(spec, K, d1, c.get("xis"), width=1)

    def trial(M, seed):
        f = fns[seed]
        w = model.fourier_window(f, M, M + 2 * K - 1)
        est = prony_estimate(prony_problem(w, K, M, c.get("bounds")))
        true = f.singular.xis
        err = max(float(np.min(model.circular_distance(np.array(est.xis), x))) for x in true)
        return {"xi": err}

    return _run(spec, ["xi"], trial, machine_eps())


def localize_sweep(spec):
    """Resolution of one jump after multiplication by a bump.

    ``spec.cfg`` keys: ``xis`` (true jumps), ``target`` (index of the jump
    to resolve), ``center``, ``E``, ``t`` (default ``2E/3``), ``d``, ``d1``.
    Quantities ``xi`` and ``A{l}`` for the targeted jump.
    """
    c = spec.cfg
    xis = tuple(float(x) for x in c["xis"])
    d, d1 = int(c["d"]), int(c["d1"])
    E = float(c["E"])
    bump = make_bump(float(c["center"]), E, float(c.get("t", 2 * E / 3)))
    target = int(c.get("target", 0))
    fns = _functions(spec, len(xis), d1, xis)

    def trial(M, seed):
        f = fns[seed]
        fw = model.fourier_window(f, -2 * M, 2 * M)
        lo, hi = bump_range(M, d)
        lw = localized_coeffs(fw, bump_window(bump, lo, hi), M, d, target, bump)
        est = resolve_jump(lw.coeffs, d, M)
        true = f.singular.jumps[target]
        vals = {"xi": float(model.circular_distance(float(est.xi), true.xi))}
        for l in range(d + 1):
            vals[f"A{l}"] = float(abs(est.magnitudes[l] - true.magnitudes[l]))
        return vals

    return _run(spec, ["xi"] + [f"A{l}" for l in range(d + 1)], trial, machine_eps())


SWEEPS = {"eckhoff": eckhoff_sweep, "pipeline": pipeline_sweep,
          "prony": prony_sweep, "localize": localize_sweep}
