"""End-to-end reconstruction: coarse locations, localization, single-jump
resolution, and reassembly ``f~ = Psi~ + Phi~``."""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import model
from .eckhoff import JumpEstimate, resolve_jump
from .errors import (AccuracyError, ConfigurationError, ConvergenceError, IllPosedError,
                     MatchingError, ReconstructionError, StageError)
from .localize import identity_window, localize_all
from .model import DEFAULT_BOUNDS, FourierWindow, Jump, SingularPart, TWO_PI
from .prony import prony_estimate, prony_problem


def default_order(d1):
    """Reconstruction order ``floor(d1/2) - 1``, the most accurate choice in practice."""
    return max(0, d1 // 2 - 1)


@dataclass(frozen=True)
class ReconstructionConfig:
    K: int
    d: int
    d1: int
    M: int
    bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    localize_single: bool = False

    def __post_init__(self):
        b = dict(DEFAULT_BOUNDS)
        b.update(self.bounds or {})
        object.__setattr__(self, "bounds", b)
        if self.K < 1:
            raise ConfigurationError("K must be at least 1")
        if self.d < 0 or 2 * self.d + 1 > self.d1:
            raise ConfigurationError(f"need 0 <= d and 2d+1 <= d1 (d={self.d}, d1={self.d1})")
        if self.M < 4 * (self.d + 2):
            raise ConfigurationError(f"M={self.M} must be at least 4(d+2)={4 * (self.d + 2)}")

    @classmethod
    def make(cls, K, d1, M, d=None, bounds=None, localize_single=False):
        return cls(K, default_order(d1) if d is None else d, d1, M, bounds or {}, localize_single)

    def window_halfwidth(self):
        """Largest coefficient index any stage may touch (including the Prony retry at 2M)."""
        return 2 * self.M + max(self.d + 1, 2 * self.K - 1)

    def to_dict(self):
        return {"K": self.K, "d": self.d, "d1": self.d1, "M": self.M, "bounds": dict(self.bounds),
                "localize_single": self.localize_single}


@dataclass(frozen=True)
class ReconstructionResult:
    jumps: tuple
    smooth_coeffs: FourierWindow
    config: ReconstructionConfig
    timings: dict = field(default_factory=dict, compare=False)
    coarse: tuple = ()

    @property
    def singular(self):
        js = tuple(Jump(float(j.xi), tuple(float(a) for a in j.magnitudes)) for j in self.jumps)
        # oracle results may carry more orders than the configured d
        return SingularPart(js, len(js[0].magnitudes) - 1 if js else self.config.d)

    @property
    def xis(self):
        return np.array([float(j.xi) for j in self.jumps])


def _stage(name, fn, partial):
    try:
        return fn()
    except ReconstructionError as exc:
        raise StageError(name, exc, dict(partial)) from exc


def _coarse_locations(f_window, cfg):
    M = cfg.M
    last = None
    for m in (M, 2 * M):
        if not f_window.covers(m, m + 2 * cfg.K - 1):
            break
        try:
            return prony_estimate(prony_problem(f_window, cfg.K, m, cfg.bounds))
        except (AccuracyError, IllPosedError, ConvergenceError) as exc:
            last = exc
    raise last if last is not None else ConfigurationError("window too short for the Prony stage")


def reconstruct(f_window, cfg, ctx=None):
    """Reconstruct from the symmetric coefficient window.

    Parameters
    ----------
    f_window : FourierWindow
        Must cover ``[-N, N]`` with ``N = cfg.window_halfwidth()``.
    cfg : ReconstructionConfig
    ctx : mpmath context, optional
        Working precision of the single-jump stage.  The other stages run in
        double; an extended context only helps when ``f_window`` holds
        extended-precision values.

    Returns
    -------
    ReconstructionResult

    Raises
    ------
    StageError
        Carries the failing stage name and all partial results.
    """
    N = cfg.window_halfwidth()
    if not f_window.covers(-N, N):
        raise ConfigurationError(
            f"coefficient window must cover [-{N}, {N}], holds [{f_window.first_index}, {f_window.last_index}]")
    M, d = cfg.M, cfg.d
    partial, timings = {}, {}

    t0 = time.perf_counter()
    coarse = _stage("prony", lambda: _coarse_locations(f_window, cfg), partial)
    partial["coarse"] = coarse
    timings["prony"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if cfg.K == 1 and not cfg.localize_single:
        # nothing to separate; a bump would only add edge content
        windows = [identity_window(f_window, M, d)]
    else:
        windows = _stage("localize", lambda: localize_all(f_window, coarse.xis, cfg.bounds["J3"],
                                                          cfg.d1, M, d), partial)
    timings["localize"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    jumps = []
    partial["jumps"] = jumps
    for lw in windows:
        jumps.append(_stage("eckhoff", lambda: resolve_jump(lw.coeffs, d, M, ctx), partial))
    timings["eckhoff"] = time.perf_counter() - t0
    jumps.sort(key=lambda j: float(j.xi))

    t0 = time.perf_counter()
    res = _stage("reassemble", lambda: _reassemble(f_window, jumps, cfg, coarse.xis), partial)
    timings["reassemble"] = time.perf_counter() - t0
    return ReconstructionResult(res.jumps, res.smooth_coeffs, cfg, timings, res.coarse)


def _reassemble(f_window, jumps, cfg, coarse=()):
    M = cfg.M
    d = len(jumps[0].magnitudes) - 1 if jumps else cfg.d
    xs = [float(j.xi) for j in jumps]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise AccuracyError("two windows resolved the same jump")
    sing = SingularPart(tuple(Jump(float(j.xi), tuple(float(a) for a in j.magnitudes))
                              for j in jumps), d)
    ks = np.arange(-M, M + 1)
    cf = f_window.slice(-M, M).as_array()
    vals = cf - model.singular_fourier(sing, d, ks)
    vals[:M] = np.conj(vals[:M:-1])
    return ReconstructionResult(tuple(jumps), FourierWindow(-M, vals, True), cfg, {}, tuple(coarse))


def oracle_result(truth, f_window, cfg, orders=None):
    """Result assembled from the true jump parameters (self-test of the reassembly path).

    ``orders`` limits the magnitudes used per jump; by default every order
    present in ``truth`` is subtracted, leaving exactly its smooth part.
    """
    n = len(truth.singular.jumps[0].magnitudes) if orders is None else int(orders)
    jumps = [JumpEstimate(j.omega, j.xi, tuple(j.magnitudes[:n])) for j in truth.singular.jumps]
    return _reassemble(f_window, jumps, cfg)


def eval_reconstruction(res, x):
    """``sum_{|k|<=M} c_k(Psi~) e^{ikx} + sum_j sum_l A~_{l,j} V_l(x; xi~_j)``."""
    M = res.config.M
    c = res.smooth_coeffs.slice(0, M).as_array() if res.smooth_coeffs.first_index <= 0 else None
    val = model.eval_trig(c, x) + model.eval_singular(res.singular, x)
    return val if np.ndim(val) else float(val)


# --------------------------------------------------------------------------
# Error reporting


@dataclass(frozen=True)
class ErrorReport:
    xi_errors: tuple
    magnitude_errors: tuple  # per jump, per order l
    sup_error: float
    r: float
    grid_size: int
    matching: tuple = ()


def match_jumps(est, true, threshold):
    """Optimal bijection minimizing the total circular distance.

    Returns ``perm`` with ``est[perm[j]]`` paired to ``true[j]``.
    """
    est = np.asarray(est, dtype=float)
    true = np.asarray(true, dtype=float)
    if est.size != true.size:
        raise MatchingError(f"{est.size} estimated jumps for {true.size} true jumps")
    if est.size > 8:
        raise MatchingError("brute-force matching supports at most 8 jumps")
    best, best_cost = None, math.inf
    for perm in itertools.permutations(range(est.size)):
        cost = float(np.sum(model.circular_distance(est[list(perm)], true)))
        if cost < best_cost:
            best, best_cost = perm, cost
    dists = model.circular_distance(est[list(best)], true) if est.size else np.array([])
    if dists.size and dists.max() > threshold:
        raise MatchingError(f"jump matched at distance {dists.max():.3g} > {threshold:.3g}")
    return tuple(best)


def error_report(res, truth, r, grid=4096):
    """Jump and sup-norm errors against the ground truth.

    The sup error is taken over a uniform grid of ``[-pi, pi)`` with points
    closer than ``r`` to a true jump removed.
    """
    if grid < 256:
        raise ConfigurationError("grid must have at least 256 points")
    truth_x = truth.singular.xis
    perm = match_jumps(res.xis, truth_x, res.config.bounds["J3"] / 4)
    xi_err, mag_err = [], []
    for jt, pi in enumerate(perm):
        e = res.jumps[pi]
        t = truth.singular.jumps[jt]
        xi_err.append(float(model.circular_distance(float(e.xi), t.xi)))
        L = min(len(e.magnitudes), len(t.magnitudes))
        mag_err.append(tuple(abs(float(e.magnitudes[l]) - t.magnitudes[l]) for l in range(L)))
    x = -math.pi + TWO_PI * np.arange(grid) / grid
    mask = np.ones(grid, dtype=bool)
    for xi in truth_x:
        mask &= model.circular_distance(x, xi) >= r
    if not mask.any():
        raise ConfigurationError(f"no grid point farther than r={r} from the jumps")
    diff = np.abs(eval_reconstruction(res, x[mask]) - model.eval(truth, x[mask]))
    return ErrorReport(tuple(xi_err), tuple(mag_err), float(diff.max()), float(r), int(grid), perm)


# --------------------------------------------------------------------------
# Serialization


def result_to_dict(res):
    sm = res.smooth_coeffs.slice(0, res.config.M).as_array()
    return {
        "schema": model.SCHEMA_VERSION,
        "config": res.config.to_dict(),
        "jumps": [{"xi": float(j.xi), "magnitudes": [float(a) for a in j.magnitudes],
                   "diagnostics": _diag_to_dict(j.diagnostics)} for j in res.jumps],
        "smooth": {"coeffs": [{"k": k, "re": float(c.real), "im": float(c.imag)}
                              for k, c in enumerate(sm)]},
        "coarse": [float(x) for x in res.coarse],
        "timings": dict(res.timings),
    }


def _diag_to_dict(diag):
    out = {}
    rs = diag.get("root_set")
    if rs is not None:
        out["roots"] = [[float(complex(z).real), float(complex(z).imag)] for z in rs.roots]
        out["root_residuals"] = [float(r) for r in rs.residuals]
    for key in ("roots", "root_residuals"):
        # already in serialized form after a round trip
        if key in diag and key not in out:
            out[key] = diag[key]
    if "predicted_spurious" in diag:
        out["predicted_spurious"] = [[float(complex(z).real), float(complex(z).imag)]
                                     for z in diag["predicted_spurious"]]
    for key in ("magnitude_residual", "clamped"):
        if key in diag:
            out[key] = diag[key]
    return out


def _diag_from_dict(doc):
    out = dict(doc)
    if "predicted_spurious" in out:
        out["predicted_spurious"] = [complex(re, im) for re, im in out["predicted_spurious"]]
    return out


def result_from_dict(doc):
    if doc.get("schema") != model.SCHEMA_VERSION:
        raise ConfigurationError(f"unsupported schema {doc.get('schema')!r}")
    c = doc["config"]
    cfg = ReconstructionConfig(int(c["K"]), int(c["d"]), int(c["d1"]), int(c["M"]), c["bounds"],
                               bool(c.get("localize_single", False)))
    jumps = tuple(JumpEstimate(complex(math.cos(j["xi"]), -math.sin(j["xi"])), float(j["xi"]),
                               tuple(float(a) for a in j["magnitudes"]), _diag_from_dict(j.get("diagnostics", {})))
                  for j in doc["jumps"])
    M = cfg.M
    pos = np.zeros(M + 1, dtype=complex)
    for e in doc["smooth"]["coeffs"]:
        pos[int(e["k"])] = complex(e["re"], e["im"])
    vals = np.concatenate([np.conj(pos[:0:-1]), pos])
    return ReconstructionResult(jumps, FourierWindow(-M, vals, True), cfg,
                                dict(doc.get("timings", {})), tuple(doc.get("coarse", ())))


def dumps_result(res):
    return json.dumps(result_to_dict(res), indent=1, sort_keys=True) + "\n"


def loads_result(text):
    return result_from_dict(json.loads(text))
