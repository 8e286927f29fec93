"""High-order resolution of a single jump from a few Fourier coefficients.

With ``r_k = 2 pi (ik)^{d+1} c_k`` the singular part of a function with one
jump at ``xi`` gives ``r_k ~ omega^k sum_l (ik)^{d-l} A_l`` where
``omega = exp(-i xi)``.  A ``(d+1)``-fold difference annihilates the
polynomial factor, so ``omega`` is approximately a root of the eliminant

    q(z) = sum_{j=0}^{d+1} (-1)^j C(d+1, j) r_{M+j} z^{d+1-j}.

Once ``omega`` is known the magnitudes solve a Vandermonde system whose
inverse factors as ``V_M^{-1} = S_{M,d} V_0^{-1}``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import ConditioningError, ConfigurationError
from .laguerre import laguerre_roots
from .polyroot import ComplexPolynomial, closest_to_unit_circle, roots
from .precision import is_double, rational, resolve


@dataclass(frozen=True)
class RkSequence:
    d: int
    start: int
    values: tuple


@dataclass(frozen=True)
class JumpEstimate:
    """Estimated jump.

    ``xi`` and ``magnitudes`` keep the working precision of the solve
    (``float`` in double, ``mpf`` in an extended context).
    """

    omega: object
    xi: object
    magnitudes: tuple
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def d(self):
        return len(self.magnitudes) - 1


def rk(window, d, k, ctx=None):
    """``r_k = 2 pi (ik)^{d+1} c_k``."""
    if k < 1:
        raise ConfigurationError("r_k is defined for k >= 1")
    c = window[k]
    if ctx is not None and not is_double(ctx):
        return 2 * ctx.pi * ctx.mpc(0, k) ** (d + 1) * c
    return 2 * math.pi * (1j * k) ** (d + 1) * complex(c)


def rk_sequence(window, d, M, ctx=None):
    window.require(M, M + d + 1, "eliminant")
    return RkSequence(d, M, tuple(rk(window, d, M + j, ctx) for j in range(d + 2)))


def eliminant(window, d, M, ctx=None):
    """Degree ``d+1`` eliminant polynomial (ascending coefficients)."""
    r = rk_sequence(window, d, M, ctx).values
    # coefficient of z^{d+1-j} is (-1)^j C(d+1, j) r_{M+j}
    coeffs = [0] * (d + 2)
    for j in range(d + 2):
        coeffs[d + 1 - j] = (-1) ** j * math.comb(d + 1, j) * r[j]
    if coeffs[-1] == 0:
        raise ConditioningError("leading eliminant coefficient r_M vanishes")
    return ComplexPolynomial(tuple(coeffs))


def locate_jump(window, d, M, ctx=None):
    """Root of the eliminant closest to the unit circle.

    Returns
    -------
    omega : complex or mpc
    diagnostics : dict
        ``root_set`` and ``predicted_spurious``.
    """
    if M < 1:
        raise ConfigurationError("M must be at least 1")
    q = eliminant(window, d, M, ctx)
    scale = max(abs(c) for c in q.coeffs)
    lead = abs(q.coeffs[-1])
    eps = float(resolve(ctx).eps)
    if not scale or lead <= 1e3 * eps * scale:
        raise ConditioningError(f"eliminant leading coefficient {float(lead):.3g} is negligible")
    qn = ComplexPolynomial(tuple(c / scale for c in q.coeffs))
    rs = roots(qn, ctx=ctx)
    omega = closest_to_unit_circle(rs)
    diag = {"root_set": rs, "predicted_spurious": predicted_spurious(omega, d, M)}
    return omega, diag


def predicted_spurious(omega, d, M):
    """Asymptotic positions ``omega / (1 - phi_i / M)`` of the off-circle roots.

    ``phi_i`` are the roots of ``L_d^(1)``.  Empty for ``d = 0``.
    """
    if M < 1:
        raise ConfigurationError("M must be at least 1")
    if d == 0:
        return []
    return [omega / (1 - phi / M) for phi in laguerre_roots(d, 1)]


# --------------------------------------------------------------------------
# Structured Vandermonde solve


@dataclass(frozen=True)
class ShiftMatrix:
    """Upper triangular ``S_{k,d}`` with ``S[m][n] = (-k)^{n-m} C(n, n-m)`` (0-based)."""

    d: int
    k: int

    def entry(self, m, n):
        if n < m:
            return 0
        return (-self.k) ** (n - m) * math.comb(n, n - m)

    def to_rows(self):
        return [[self.entry(m, n) for n in range(self.d + 1)] for m in range(self.d + 1)]


def shift_apply(S, v, row=False):
    """``S v`` (or ``v S`` with ``row=True``) from the closed-form entries.

    Integer or ``Fraction`` inputs stay exact.
    """
    n = S.d + 1
    if len(v) != n:
        raise ConfigurationError(f"vector of length {len(v)} does not match order {S.d}")
    if row:
        return [sum(v[m] * S.entry(m, c) for m in range(c + 1)) for c in range(n)]
    return [sum(S.entry(m, c) * v[c] for c in range(m, n)) for m in range(n)]


def vandermonde_rows(k, d):
    """Rows ``(1, k+t, ..., (k+t)^d)`` for ``t = 0..d``."""
    return [[(k + t) ** n for n in range(d + 1)] for t in range(d + 1)]


@lru_cache(maxsize=None)
def vandermonde0_inverse(d):
    """Exact inverse of ``V_0`` (nodes ``0..d``) by Gauss-Jordan over the rationals."""
    n = d + 1
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(vandermonde_rows(0, d))]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


def magnitude_inverse(k, d):
    """Exact ``S_{k,d} V_0^{-1}``, the inverse of the shifted Vandermonde matrix."""
    inv0 = vandermonde0_inverse(d)
    S = ShiftMatrix(d, k)
    cols = [shift_apply(S, [inv0[i][j] for i in range(d + 1)]) for j in range(d + 1)]
    return [[cols[j][i] for j in range(d + 1)] for i in range(d + 1)]


def solve_magnitudes(window, omega, d, M, ctx=None, return_diagnostics=False):
    """Magnitudes ``A_0..A_d`` given the jump point ``omega``.

    Solves ``V_M B = (r_{M+j} omega^{-M-j})_j`` through ``B = S_{M,d} (V_0^{-1} rhs)``
    and maps ``B_n = i^n A_{d-n}`` back.  Real parts are returned; the
    relative size of the discarded imaginary parts is reported as
    ``magnitude_residual`` and the complex solution as ``magnitudes_complex``.
    """
    c = resolve(ctx)
    window.require(M, M + d, "magnitude solve")
    rho = abs(omega)
    if not 0.5 <= rho <= 2.0:
        raise ConditioningError(f"|omega| = {float(rho):.3g} is too far from the unit circle")
    clamped = False
    lim = 10.0 / M
    if abs(rho - 1) > lim:
        warnings.warn(f"|omega| deviates from 1 by {float(abs(rho - 1)):.3g}; modulus clamped",
                      RuntimeWarning, stacklevel=2)
        rho = 1 + lim if rho > 1 else 1 - lim
        clamped = True
    xi = -c.arg(omega)
    rhs = []
    for j in range(d + 1):
        k = M + j
        val = rk(window, d, k, ctx) * c.expj(k * xi) * rho ** (-k)
        if c.isinf(val) or c.isnan(val):
            raise ConditioningError("overflow while removing the jump phase")
        rhs.append(val)
    inv0 = vandermonde0_inverse(d)
    y = [sum(rational(c, inv0[m][n]) * rhs[n] for n in range(d + 1)) for m in range(d + 1)]
    B = shift_apply(ShiftMatrix(d, M), y)
    A = [0] * (d + 1)
    for n in range(d + 1):
        A[d - n] = B[n] / (c.mpc(0, 1) ** n)
    real = tuple(c.re(a) for a in A)
    scale = max(abs(a) for a in A) or 1
    resid = float(max(abs(c.im(a)) for a in A) / scale)
    if return_diagnostics:
        return real, {"magnitude_residual": resid, "clamped": clamped,
                      "magnitudes_complex": tuple(A)}
    return real


def canonical_angle(x, ctx=None):
    """Map an angle into ``[-pi, pi)`` in the precision of ``ctx``."""
    c = resolve(ctx)
    two_pi = 2 * c.pi
    y = x + c.pi
    y = y - two_pi * c.floor(y / two_pi) - c.pi
    return -c.pi if y >= c.pi else y


def resolve_jump(window, d, M, ctx=None):
    """Location and magnitudes of the single jump seen by ``window``."""
    omega, diag = locate_jump(window, d, M, ctx)
    mags, mdiag = solve_magnitudes(window, omega, d, M, ctx, return_diagnostics=True)
    diag.update(mdiag)
    xi = canonical_angle(-resolve(ctx).arg(omega), ctx)
    return JumpEstimate(omega, xi, mags, diag)
