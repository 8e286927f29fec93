"""Smooth bump ``g = b_r * m_s``: a box of width ``r`` convolved with a scaled mollifier.

The mollifier is ``Psi(y) = exp(-1/(1-y^2))`` on ``(-1, 1)``, normalized by
its mass ``Delta``; ``m_s(x) = Psi(x/s) / (s Delta)``.  The bump is one on
the flat interval of width ``t`` around its center and vanishes outside
``[xi - E, xi + E]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError
from .model import FourierWindow

SHRINK = 0.999
_QUAD_TOL = 1e-14
_quad_log = {}


def mollifier(y):
    """``exp(-1/(1-y^2))`` inside ``(-1, 1)``, zero outside."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    inside = np.abs(y) < 1
    out[inside] = np.exp(-1.0 / (1.0 - y[inside] ** 2))
    return out if out.ndim else float(out)


def _trapezoid_transform(w, n):
    # h * sum Psi(y_j) cos(w y_j) over y_j = j h in (-1, 1); by Poisson summation
    # the error is the transform at 2 pi / h - w, which decays like exp(-sqrt(2 x)).
    h = 1.0 / n
    y = np.arange(1, n) * h
    psi = np.exp(-1.0 / (1.0 - y * y))
    w = np.atleast_1d(np.asarray(w, dtype=float))
    out = np.empty(w.shape)
    step = max(1, 2_000_000 // n)
    for a in range(0, w.size, step):
        out[a:a + step] = h * (math.exp(-1.0) + 2.0 * (np.cos(np.multiply.outer(w[a:a + step], y)) @ psi))
    return out


def mollifier_transform(w):
    """``int_{-1}^{1} exp(iwy) Psi(y) dy`` for an array of real ``w``.

    Trapezoid rule on a uniform grid, refined by doubling until two
    successive values agree to ``1e-14`` (absolute).  The node count depends only on
    ``max |w|`` and is recorded in ``quadrature_log()``.

    Returns
    -------
    values : ndarray of float
        The transform is real and even in ``w``.
    """
    w = np.abs(np.atleast_1d(np.asarray(w, dtype=float)))
    wmax = float(w.max()) if w.size else 0.0
    n = 2 ** max(5, math.ceil(math.log2((wmax + 1200.0) / (2 * math.pi))))
    prev = _trapezoid_transform(w, n)
    while True:
        n *= 2
        cur = _trapezoid_transform(w, n)
        if np.max(np.abs(cur - prev)) <= _QUAD_TOL or n >= 2 ** 16:
            break
        prev = cur
    _quad_log[wmax] = n
    return cur


def quadrature_log():
    """Mapping ``max |w| -> node count`` of past transform evaluations."""
    return dict(_quad_log)


@lru_cache(maxsize=1)
def mollifier_mass():
    """``Delta = int_{-1}^{1} exp(-1/(1-x^2)) dx``, about 0.443994."""
    return float(mollifier_transform(0.0)[0])


def mollifier_fc(w):
    """``(1 / 2 pi Delta) int exp(iwy) Psi(y) dy``; scalar or array ``w``."""
    val = mollifier_transform(w) / (2 * math.pi * mollifier_mass())
    return val if np.ndim(w) else float(val[0])


def bump_params(E, t):
    """Optimal mollifier scale and box width ``(s*, r*)`` for half-support ``E``, flat width ``t``."""
    if not (t > 0 and 2 * E > t):
        raise ConfigurationError(f"bump geometry needs 2E > t > 0 (E={E}, t={t})")
    return (E - t / 2) / 3, 2 * (E + t) / 3


@dataclass(frozen=True)
class BumpSpec:
    """Geometry of one bump.

    ``s`` and ``r`` must satisfy ``s + t/2 < r/2`` and ``2s + r/2 < E``.
    """

    xi: float
    E: float
    t: float
    s: float
    r: float

    def __post_init__(self):
        if not (self.t > 0 and 2 * self.E > self.t and self.s > 0):
            raise ConfigurationError("bump geometry needs 2E > t > 0 and s > 0")
        if not (self.s + self.t / 2 < self.r / 2 and 2 * self.s + self.r / 2 < self.E):
            raise ConfigurationError("bump compatibility conditions violated")

    @property
    def delta(self):
        return mollifier_mass()


def make_bump(xi, E, t, shrink=SHRINK):
    """Bump with the optimal ``r*`` and ``s = shrink * s*`` (strict compatibility)."""
    s, r = bump_params(E, t)
    return BumpSpec(float(xi), float(E), float(t), s * shrink, r)


def bump_fc(spec, k):
    """Fourier coefficients ``c_k(g)`` from the closed formula; ``k`` scalar or array.

    For ``k != 0``, ``-i exp(-ik(r/2 + xi)) (exp(ikr) - 1)/k`` times the
    mollifier factor at ``ks``; ``c_0 = r / 2 pi``.
    """
    k_arr = np.asarray(k)
    kf = k_arr.astype(float)
    safe = np.where(k_arr == 0, 1.0, kf)
    # exp(ikr) - 1 = 2i sin(kr/2) exp(ikr/2), evaluated without cancellation
    box = -1j * np.exp(-1j * kf * (spec.r / 2 + spec.xi)) \
        * (2j * np.sin(kf * spec.r / 2) * np.exp(1j * kf * spec.r / 2)) / safe
    box = np.where(k_arr == 0, spec.r, box)
    vals = box * mollifier_fc(np.atleast_1d(kf * spec.s)).reshape(k_arr.shape)
    vals = np.where(k_arr == 0, spec.r / (2 * math.pi), vals)
    return vals if vals.ndim else complex(vals)


def bump_window(spec, lo, hi):
    """``c_k(g)`` for ``k`` in ``[lo, hi]`` in one pass."""
    ks = np.arange(lo, hi + 1)
    return FourierWindow(lo, bump_fc(spec, ks), symmetric=lo == -hi)


def bump_eval(spec, x):
    """Pointwise ``g(x)`` from its definition (quadrature of the mollifier)."""
    x = np.asarray(x, dtype=float)
    u = (x - spec.xi + math.pi) % (2 * math.pi) - math.pi
    a = np.clip((u - spec.r / 2) / spec.s, -1.0, 1.0)
    b = np.clip((u + spec.r / 2) / spec.s, -1.0, 1.0)
    nodes, weights = np.polynomial.legendre.leggauss(64)
    # composite Gauss-Legendre over [a, b] on 16 panels
    out = np.zeros_like(u)
    edges = np.linspace(0.0, 1.0, 17)
    for p0, p1 in zip(edges[:-1], edges[1:]):
        lo = a + (b - a) * p0
        hi = a + (b - a) * p1
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        y = mid[..., None] + half[..., None] * nodes
        out += half * (mollifier(y) @ weights)
    return out / mollifier_mass()
