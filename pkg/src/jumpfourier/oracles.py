"""Independent combinatorial identities used as test oracles.

These are deliberately naive: direct sums, exact integers where the inputs
allow it, no shared code with the reconstruction path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class Sequence:
    """Wrapper around a pure function of an integer index."""

    evaluator: Callable

    def __call__(self, k):
        return self.evaluator(k)


def polynomial_sequence(coeffs):
    """``k -> sum_n coeffs[n] k^n``; exact when the coefficients are integers or fractions."""
    coeffs = tuple(coeffs)
    return Sequence(lambda k: sum(c * k ** n for n, c in enumerate(coeffs)))


def difference_power(g, d, k):
    """``d``-th forward difference ``(-1)^d sum_j (-1)^j C(d, j) g(k + j)``."""
    if d < 0:
        raise ConfigurationError("d must be non-negative")
    total = 0
    for j in range(d + 1):
        total += (-1) ** j * math.comb(d, j) * g(k + j)
    return (-1) ** d * total


def script_F(d, t, s):
    """``sum_{j=s}^{d+1} (-1)^j C(j, s) C(d+1, j) j^(d-t)`` in exact integers."""
    if not (0 <= t <= d and 0 <= s <= d + 1):
        raise ConfigurationError(f"script_F needs 0 <= t <= d and 0 <= s <= d+1 (d={d}, t={t}, s={s})")
    return sum((-1) ** j * math.comb(j, s) * math.comb(d + 1, j) * j ** (d - t)
               for j in range(s, d + 2))


def script_F_subdiagonal(d, s):
    """Closed form of ``script_F(d, s-1, s)``: ``(-1)^(d+1) (d+1-s)! C(d+1, s)``."""
    return (-1) ** (d + 1) * math.factorial(d + 1 - s) * math.comb(d + 1, s)


def binom_fraction_sum(l, d, k, exact=False):
    """``sum_{j=0}^{d} (-1)^j C(d, j) / (k + j)^l``.

    The terms cancel heavily for large ``k``; the sum is accumulated in
    rationals and rounded once at the end.  ``exact=True`` returns the
    ``Fraction``.
    """
    if l < 1 or d < 0 or k <= d:
        raise ConfigurationError(f"need l >= 1, d >= 0, k > d (l={l}, d={d}, k={k})")
    val = sum(Fraction((-1) ** j * math.comb(d, j), (k + j) ** l) for j in range(d + 1))
    return val if exact else float(val)


def basic_recurrence_residual(omega, a_coeffs, n, k):
    """Residual of ``sum_j (-1)^j C(n+1, j) b_{k+j} omega^(n+1-j)`` for ``b_k = omega^k P(k)``.

    ``P`` has coefficients ``a_coeffs`` (ascending) and degree at most ``n``.
    Returns ``(residual, scale)`` where ``scale`` is the sum of the absolute
    values of the terms.
    """
    if len(a_coeffs) > n + 1:
        raise ConfigurationError(f"polynomial of degree {len(a_coeffs) - 1} exceeds n={n}")

    def b(m):
        return omega ** m * sum(a * m ** p for p, a in enumerate(a_coeffs))

    terms = [(-1) ** j * math.comb(n + 1, j) * b(k + j) * omega ** (n + 1 - j) for j in range(n + 2)]
    return sum(terms), sum(abs(t) for t in terms)


# --------------------------------------------------------------------------
# Suite


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    passed: bool
    detail: str


def identity_suite(seed=0, cases=500, max_d=8):
    """Run every identity over its stated range; one :class:`IdentityCheck` each."""
    rng = np.random.default_rng(seed)
    out = []

    bad = [(d, t, s) for d in range(max_d + 1) for s in range(d + 2) for t in range(d + 1)
           if t >= s and script_F(d, t, s) != 0]
    out.append(IdentityCheck("script_F vanishes for t >= s", not bad, f"{len(bad)} violations"))
    bad = [(d, s) for d in range(max_d + 1) for s in range(1, d + 2)
           if script_F(d, s - 1, s) != script_F_subdiagonal(d, s)]
    out.append(IdentityCheck("script_F closed form at t = s-1", not bad, f"{len(bad)} violations"))

    bad = 0
    for _ in range(cases):
        n = int(rng.integers(0, 7))
        coeffs = [int(c) for c in rng.integers(-50, 51, n + 1)]
        if coeffs[-1] == 0:
            coeffs[-1] = 1
        g = polynomial_sequence(coeffs)
        k = int(rng.integers(-100, 101))
        if difference_power(g, n, k) != coeffs[-1] * math.factorial(n):
            bad += 1
        if difference_power(g, n + 1, k) != 0:
            bad += 1
    out.append(IdentityCheck("difference_power on polynomials", bad == 0, f"{bad} violations"))

    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(0, 6))
        omega = complex(np.exp(1j * rng.uniform(-math.pi, math.pi)))
        a = list(rng.uniform(-2, 2, n + 1) + 1j * rng.uniform(-2, 2, n + 1))
        k = int(rng.integers(0, 101))
        res, scale = basic_recurrence_residual(omega, a, n, k)
        worst = max(worst, abs(res) / scale if scale else abs(res))
    out.append(IdentityCheck("basic recurrence residual", bool(worst <= 1e-9), f"max relative {worst:.3g}"))

    ks = np.unique(np.rint(np.geomspace(100, 1e5, 25)).astype(int))
    devs = []
    for l in range(1, 4):
        for d in range(1, 4):
            vals = [binom_fraction_sum(l, d, int(k)) for k in ks]
            slope = np.polyfit(np.log10(ks), np.log10(np.abs(vals)), 1)[0]
            devs.append(abs(slope + d + l))
    out.append(IdentityCheck("binom_fraction_sum decay order", bool(max(devs) <= 0.05),
                             f"max slope deviation {max(devs):.3g}"))
    return out
