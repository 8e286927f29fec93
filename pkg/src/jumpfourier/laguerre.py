"""Generalized Laguerre polynomials and their roots."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import NumericalError, UnsupportedDegreeError
from .polyroot import roots
from .precision import working_context


def _gen_binom(x, m):
    # C(x, m) for rational or real x, integer m >= 0
    out = Fraction(1) if isinstance(x, (int, Fraction)) else 1.0
    for i in range(m):
        out = out * (x - i) / (i + 1)
    return out


@dataclass(frozen=True)
class LaguerreBasis:
    """Ascending coefficients of ``L_n^(alpha)(x) = sum_m C(n+alpha, n-m) (-x)^m / m!``."""

    alpha: object
    n: int
    coeffs: tuple


@lru_cache(maxsize=None)
def laguerre_basis(alpha, n):
    if n < 0 or n > 20:
        raise UnsupportedDegreeError(f"Laguerre degree {n} outside [0, 20]")
    a = Fraction(alpha) if float(alpha).is_integer() else float(alpha)
    coeffs = tuple(_gen_binom(n + a, n - m) * (-1) ** m / math.factorial(m) for m in range(n + 1))
    return LaguerreBasis(alpha, n, coeffs)


def laguerre_eval(alpha, n, x):
    """``L_n^(alpha)(x)`` by Horner's rule."""
    out = 0.0
    for c in reversed(laguerre_basis(alpha, n).coeffs):
        out = out * x + float(c)
    return out


@lru_cache(maxsize=None)
def laguerre_roots(n, alpha=1):
    """Roots of ``L_n^(alpha)`` in ascending order.

    The monomial form is ill-conditioned for larger ``n``, so the shared
    root finder runs in 50-digit arithmetic on the exact rational
    coefficients; the roots are rounded to double at the end.
    """
    if n < 1 or n > 15:
        raise UnsupportedDegreeError(f"Laguerre root degree {n} outside [1, 15]")
    ctx = working_context(50)
    coeffs = [ctx.mpf(c.numerator) / c.denominator if isinstance(c, Fraction) else ctx.mpf(c)
              for c in laguerre_basis(alpha, n).coeffs]
    rs = roots(coeffs, ctx=ctx)
    out = []
    for z in rs.roots:
        if abs(z.imag) > 1e-10 * max(1.0, abs(z)):
            raise NumericalError(f"Laguerre root {z} is not real")
        out.append(float(z.real))
    return tuple(sorted(out))
