"""Simultaneous polynomial root finding (Aberth-Ehrlich with Newton polishing).

The iteration is written with plain arithmetic operators, so the same code
runs on Python complex numbers or on ``mpmath`` numbers of any precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ConvergenceError
from .precision import is_double, resolve

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class ComplexPolynomial:
    """Dense polynomial, coefficients in ascending powers.

    Trailing zero coefficients are stripped so that ``degree`` always
    refers to a nonzero leading coefficient.
    """

    coeffs: tuple

    def __post_init__(self):
        c = list(self.coeffs)
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if not c or c[-1] == 0:
            raise ConfigurationError("zero polynomial")
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, z):
        out = 0
        for a in reversed(self.coeffs):
            out = out * z + a
        return out

    def derivative(self):
        if self.degree == 0:
            return _RawPoly((0 * self.coeffs[0],))
        return ComplexPolynomial(tuple(j * a for j, a in enumerate(self.coeffs) if j))

    def norm(self):
        return sum(abs(a) for a in self.coeffs)


class _RawPoly(ComplexPolynomial):
    # a polynomial that may be identically zero (derivative of a constant)
    def __post_init__(self):
        pass


@dataclass(frozen=True)
class RootSet:
    """Roots with their normalized residuals.

    ``residuals[i]`` is ``|p(z_i)| / sum_j |a_j| |z_i|^j``, the relative
    backward error of the root; ``derivatives[i]`` is ``|p'(z_i)| / ||p||``.
    """

    roots: tuple
    residuals: tuple
    derivatives: tuple
    iterations: int = 0

    def __len__(self):
        return len(self.roots)


def _horner_with_derivative(coeffs, z):
    p = coeffs[-1]
    dp = 0 * p
    scale = abs(p)
    az = abs(z)
    for a in reversed(coeffs[:-1]):
        dp = dp * z + p
        p = p * z + a
        scale = scale * az + abs(a)
    return p, dp, scale


def roots(p, tol=None, maxiter=200, ctx=None):
    """All roots of ``p`` counted with multiplicity.

    Parameters
    ----------
    p : ComplexPolynomial or sequence
        Coefficients in ascending powers.
    tol : float, optional
        Per-degree residual tolerance; every root must satisfy
        ``residual <= tol * degree``.  Defaults to ``1e-13`` in double
        precision and ``1000 * eps`` in an extended context.
    maxiter : int
        Maximum number of Aberth sweeps.
    ctx : mpmath context, optional
        Arithmetic to use; ``None`` means double precision.

    Returns
    -------
    RootSet

    Raises
    ------
    ConvergenceError
        If the residual test still fails after ``maxiter`` sweeps.
    """
    if not isinstance(p, ComplexPolynomial):
        p = ComplexPolynomial(tuple(p))
    ctx = resolve(ctx)
    n = p.degree
    if n < 1:
        raise ConfigurationError("polynomial degree must be at least 1")
    double = is_double(ctx)
    eps = float(ctx.eps)
    if tol is None:
        tol = 1e-13 if double else 1000 * eps
    if double:
        a = [complex(c) for c in p.coeffs]
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in a):
            raise ConfigurationError("non-finite polynomial coefficient")
    else:
        a = [ctx.mpc(c) for c in p.coeffs]
    # zero roots are split off exactly
    nzero = 0
    while a[nzero] == 0:
        nzero += 1
    a = a[nzero:]
    lead = a[-1]
    a = [c / lead for c in a]
    m = len(a) - 1
    found = [0 * a[0]] * nzero
    its = 0
    if m > 0:
        z, its = _aberth(a, m, tol, maxiter, ctx, eps)
        found.extend(z)
    coeffs = list(p.coeffs)
    pnorm = sum(abs(c) for c in coeffs)
    res, der = [], []
    for zi in found:
        val, dval, scale = _horner_with_derivative(coeffs, zi)
        res.append(float(abs(val) / scale) if scale else 0.0)
        der.append(float(abs(dval) / pnorm))
    return RootSet(tuple(found), tuple(res), tuple(der), its)


def _aberth(a, m, tol, maxiter, ctx, eps):
    radius = abs(a[0]) ** (ctx.mpf(1) / m)
    if radius == 0:
        radius = ctx.mpf(1)
    z = [radius * ctx.expj(GOLDEN_ANGLE * i + 0.4) for i in range(m)]
    done = [False] * m
    best = list(z)
    best_worst = math.inf
    for it in range(1, maxiter + 1):
        worst = 0.0
        moved = 0.0
        for i in range(m):
            if done[i]:
                continue
            p, dp, scale = _horner_with_derivative(a, z[i])
            r = abs(p) / scale if scale else 0
            if r <= 4 * eps:
                done[i] = True
                continue
            worst = max(worst, float(r))
            if dp == 0:
                z[i] = z[i] * (1 + 16 * eps) + 16 * eps
                continue
            ratio = p / dp
            s = sum(1 / (z[i] - z[j]) for j in range(m) if j != i and z[i] != z[j])
            w = ratio / (1 - ratio * s)
            z[i] = z[i] - w
            step = float(abs(w) / max(abs(z[i]), 1e-300))
            moved = max(moved, step)
            if step <= 2 * eps:
                done[i] = True
        if worst < best_worst:
            best_worst, best = worst, list(z)
        if all(done) or moved <= 2 * eps:
            break
    z = [_polish(a, zi, eps) for zi in z]
    res = []
    for zi in z:
        p, _, scale = _horner_with_derivative(a, zi)
        res.append(float(abs(p) / scale) if scale else 0.0)
    if max(res) > tol * m:
        raise ConvergenceError(
            f"Aberth iteration did not reach residual {tol * m:.3g} (worst {max(res):.3g})",
            best=best, residuals=res)
    return z, it


def _polish(a, z, eps, steps=3):
    # Newton steps, kept only while the backward error decreases
    p, dp, scale = _horner_with_derivative(a, z)
    r = abs(p) / scale if scale else 0
    for _ in range(steps):
        if r == 0 or dp == 0:
            break
        zn = z - p / dp
        pn, dpn, scn = _horner_with_derivative(a, zn)
        rn = abs(pn) / scn if scn else 0
        if rn >= r:
            break
        z, p, dp, r = zn, pn, dpn, rn
    return z


def closest_to_unit_circle(rs):
    """Root with the smallest distance ``| |z| - 1 |``.

    Distances within ``64 eps`` of the minimum count as ties; ties go to the
    root with the larger ``|p'(z)|`` (better conditioned), then to the
    smaller index.
    """
    if not rs.roots:
        raise ConfigurationError("empty root set")
    dist = [float(abs(abs(z) - 1)) for z in rs.roots]
    dmin = min(dist)
    cands = [i for i, dv in enumerate(dist) if dv - dmin <= 64 * np.finfo(float).eps]
    best = max(cands, key=lambda i: (rs.derivatives[i], -i))
    return rs.roots[best]


def companion_roots(coeffs):
    """Eigenvalues of the companion matrix (reference implementation for tests)."""
    c = np.asarray(coeffs, dtype=complex)
    while c.size > 1 and c[-1] == 0:
        c = c[:-1]
    return np.roots(c[::-1])
