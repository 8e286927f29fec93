"""Piecewise-smooth test functions and their exact Fourier coefficients.

A test function is ``f = smooth + singular`` where the singular part is a
sum of periodized Bernoulli polynomials

    V_l(x; xi) = -(2 pi)^l / (l+1)! * B_{l+1}((x - xi) / 2 pi),

placed at each jump ``xi`` with weights ``A_{l}``, and the smooth part is a
finite real trigonometric sum.  Fourier coefficients use the normalization
``c_k(f) = (1/2pi) int_{-pi}^{pi} f(x) exp(-ikx) dx``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, UnsupportedDegreeError, WindowRangeError
from .precision import is_double, rational, resolve

BERNOULLI_MAX_DEGREE = 30
SCHEMA_VERSION = 1
TWO_PI = 2.0 * math.pi


# --------------------------------------------------------------------------
# Bernoulli polynomials


@lru_cache(maxsize=None)
def _bernoulli_numbers(nmax=BERNOULLI_MAX_DEGREE):
    # B_m from sum_{j<=m} C(m+1, j) B_j = 0, with B_1 = -1/2
    b = [Fraction(1)]
    for m in range(1, nmax + 1):
        acc = sum(math.comb(m + 1, j) * b[j] for j in range(m))
        b.append(-acc / (m + 1))
    return tuple(b)


@lru_cache(maxsize=None)
def bernoulli_coeffs(n):
    """Exact ascending coefficients of the Bernoulli polynomial ``B_n``.

    Parameters
    ----------
    n : int
        Degree, ``0 <= n <= 30``.

    Returns
    -------
    tuple of Fraction
    """
    if n < 0 or n > BERNOULLI_MAX_DEGREE:
        raise UnsupportedDegreeError(f"Bernoulli degree {n} outside [0, {BERNOULLI_MAX_DEGREE}]")
    b = _bernoulli_numbers()
    # B_n(x) = sum_k C(n,k) B_{n-k} x^k
    return tuple(math.comb(n, k) * b[n - k] for k in range(n + 1))


@lru_cache(maxsize=None)
def _bernoulli_float(n):
    return np.array([float(c) for c in bernoulli_coeffs(n)])


def bernoulli(n, x):
    """Evaluate ``B_n(x)`` by Horner's rule in double precision.

    ``x`` may be a scalar or an array.
    """
    c = _bernoulli_float(n)
    x = np.asarray(x, dtype=float)
    out = np.full_like(x, c[-1])
    for a in c[-2::-1]:
        out = out * x + a
    return out if out.ndim else float(out)


def _bernoulli_ctx(n, x, ctx):
    out = 0
    for a in reversed(bernoulli_coeffs(n)):
        out = out * x + rational(ctx, a)
    return out


def basis_V(l, x, xi, ctx=None):
    """Periodized Bernoulli basis ``V_l(x; xi)``.

    The argument is wrapped into ``[xi, xi + 2 pi)``, so ``V_l`` is
    right-continuous at the jump.  The l-th derivative of ``V_l`` jumps
    by one at ``xi``; all lower derivatives are continuous.

    With ``ctx`` given, ``x`` and ``xi`` are scalars evaluated in that context.
    """
    if l < 0:
        raise UnsupportedDegreeError("basis order must be nonnegative")
    if ctx is not None and not is_double(ctx):
        two_pi = 2 * ctx.pi
        u = (ctx.mpf(x) - ctx.mpf(xi)) / two_pi
        u = u - ctx.floor(u)
        return -(two_pi ** l) / math.factorial(l + 1) * _bernoulli_ctx(l + 1, u, ctx)
    u = (np.asarray(x, dtype=float) - xi) / TWO_PI
    u = u - np.floor(u)
    val = -(TWO_PI ** l) / math.factorial(l + 1) * bernoulli(l + 1, u)
    return val


# --------------------------------------------------------------------------
# Data types


@dataclass(frozen=True)
class Jump:
    xi: float
    magnitudes: tuple

    @property
    def omega(self):
        return complex(math.cos(self.xi), -math.sin(self.xi))


@dataclass(frozen=True)
class SingularPart:
    """Jump locations and magnitudes ``A_{0..d1, j}``."""

    jumps: tuple
    d1: int

    def __post_init__(self):
        jumps = tuple(Jump(float(j.xi), tuple(float(a) for a in j.magnitudes)) if isinstance(j, Jump)
                      else Jump(float(j[0]), tuple(float(a) for a in j[1])) for j in self.jumps)
        object.__setattr__(self, "jumps", jumps)
        for j in jumps:
            if len(j.magnitudes) != self.d1 + 1:
                raise ConfigurationError(
                    f"jump at {j.xi} has {len(j.magnitudes)} magnitudes, expected {self.d1 + 1}")
            if not -math.pi <= j.xi < math.pi:
                raise ConfigurationError(f"jump location {j.xi} outside [-pi, pi)")
        xs = [j.xi for j in jumps]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ConfigurationError("jump locations must be strictly increasing")

    @property
    def K(self):
        return len(self.jumps)

    @property
    def xis(self):
        return np.array([j.xi for j in self.jumps])

    def min_separation(self):
        return min_circular_separation(self.xis)

    def truncated(self, d):
        """Copy keeping magnitudes ``A_0..A_d`` only."""
        if d > self.d1:
            raise ConfigurationError(f"order {d} exceeds available d1={self.d1}")
        return SingularPart(tuple(Jump(j.xi, j.magnitudes[: d + 1]) for j in self.jumps), d)


@dataclass(frozen=True)
class SmoothPart:
    """Real trigonometric polynomial stored by its coefficients ``f_0..f_N``.

    Negative indices follow from ``f_{-k} = conj(f_k)``.
    """

    coeffs: np.ndarray
    d1: int
    R: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).copy()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        c[0] = c[0].real
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        k = np.arange(1, c.size)
        bound = self.R * k ** (-self.d1 - 2.0)
        if np.any(np.abs(c[1:]) > bound * (1 + 1e-12)):
            raise ConfigurationError("smooth coefficients violate |f_k| <= R k^(-d1-2)")

    @property
    def N(self):
        return self.coeffs.size - 1

    def coefficient(self, k):
        k = np.asarray(k)
        ak = np.abs(k)
        inside = ak <= self.N
        vals = np.where(inside, self.coeffs[np.minimum(ak, self.N)], 0)
        return np.where(k < 0, np.conj(vals), vals)


@dataclass(frozen=True)
class TestFunction:
    singular: SingularPart
    smooth: SmoothPart
    seed: int | None = None

    __test__ = False  # not a pytest class

    @property
    def d1(self):
        return self.singular.d1


@dataclass(frozen=True)
class FourierWindow:
    """Contiguous block ``c_{first}, ..., c_{first + n - 1}``.

    ``values`` is a complex numpy array in double precision, or a tuple of
    ``mpc`` numbers when produced in extended precision.
    """

    first_index: int
    values: object
    symmetric: bool = False

    def __post_init__(self):
        v = self.values
        if isinstance(v, np.ndarray) or (len(v) and isinstance(v[0], (complex, float, int, np.number))):
            v = np.asarray(v, dtype=complex).copy()
            v.setflags(write=False)
        else:
            v = tuple(v)
        object.__setattr__(self, "values", v)
        if self.symmetric:
            n = len(v)
            if n % 2 != 1 or self.first_index != -(n // 2):
                raise ConfigurationError("symmetric window must cover [-N, N]")

    @property
    def last_index(self):
        return self.first_index + len(self.values) - 1

    def covers(self, lo, hi):
        return self.first_index <= lo and hi <= self.last_index

    def require(self, lo, hi, what="window"):
        if not self.covers(lo, hi):
            raise WindowRangeError(
                f"{what} needs indices [{lo}, {hi}] but holds [{self.first_index}, {self.last_index}]")

    def __getitem__(self, k):
        if not self.first_index <= k <= self.last_index:
            raise WindowRangeError(f"index {k} outside [{self.first_index}, {self.last_index}]")
        return self.values[k - self.first_index]

    def slice(self, lo, hi):
        """Sub-window over ``[lo, hi]``."""
        self.require(lo, hi)
        a, b = lo - self.first_index, hi - self.first_index + 1
        return FourierWindow(lo, self.values[a:b], symmetric=self.symmetric and lo == -hi)

    def as_array(self):
        return np.array([complex(v) for v in self.values]) if isinstance(self.values, tuple) \
            else self.values

    def indices(self):
        return np.arange(self.first_index, self.last_index + 1)


# --------------------------------------------------------------------------
# Fourier coefficients


def singular_fourier(s, d, k, ctx=None):
    """Fourier coefficients of the singular part truncated at order ``d``.

    ``c_k = (1/2pi) sum_j exp(-i k xi_j) sum_{l<=d} A_{l,j} (ik)^{-l-1}``,
    and ``c_0 = 0``.  ``k`` may be an integer array in double precision.
    """
    if d > s.d1:
        raise ConfigurationError(f"order {d} exceeds available d1={s.d1}")
    if ctx is not None and not is_double(ctx):
        k = int(k)
        if k == 0:
            return ctx.mpc(0)
        ik = ctx.mpc(0, k)
        total = ctx.mpc(0)
        for j in s.jumps:
            inner = ctx.mpc(0)
            for a in reversed(j.magnitudes[: d + 1]):
                inner = (inner + ctx.mpf(a)) / ik
            total += ctx.expj(-k * ctx.mpf(j.xi)) * inner
        return total / (2 * ctx.pi)
    k_arr = np.asarray(k)
    kf = k_arr.astype(float)
    safe = np.where(k_arr == 0, 1.0, kf)
    inv_ik = 1.0 / (1j * safe)
    total = np.zeros(k_arr.shape, dtype=complex)
    for j in s.jumps:
        inner = np.zeros(k_arr.shape, dtype=complex)
        for a in reversed(j.magnitudes[: d + 1]):
            inner = (inner + a) * inv_ik
        total = total + np.exp(-1j * kf * j.xi) * inner
    total = np.where(k_arr == 0, 0.0, total / TWO_PI)
    return total if total.ndim else complex(total)


def exact_fourier(f, k, d_use=None, ctx=None):
    """Exact ``c_k(f)``: singular coefficients at order ``d_use`` plus ``f_k``.

    ``d_use`` defaults to the full smoothness order ``d1``.  Smooth
    coefficients beyond the stored range are zero.
    """
    d = f.d1 if d_use is None else d_use
    if ctx is not None and not is_double(ctx):
        fk = complex(f.smooth.coefficient(int(k)))
        return singular_fourier(f.singular, d, k, ctx) + ctx.mpc(fk.real, fk.imag)
    val = singular_fourier(f.singular, d, k) + f.smooth.coefficient(k)
    return val if np.ndim(val) else complex(val)


def fourier_window(f, lo, hi, d_use=None, ctx=None):
    """Exact coefficients over ``[lo, hi]`` as a :class:`FourierWindow`."""
    symmetric = lo == -hi
    if ctx is not None and not is_double(ctx):
        vals = tuple(exact_fourier(f, k, d_use, ctx) for k in range(lo, hi + 1))
        return FourierWindow(lo, vals, symmetric)
    ks = np.arange(lo, hi + 1)
    vals = exact_fourier(f, ks, d_use)
    if symmetric:
        # enforce c_{-k} = conj(c_k) bit-exactly
        n = hi
        vals[:n] = np.conj(vals[: n:-1])
    return FourierWindow(lo, vals, symmetric)


# --------------------------------------------------------------------------
# Pointwise evaluation


def eval_singular(s, x, d=None):
    d = s.d1 if d is None else d
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for j in s.jumps:
        for l, a in enumerate(j.magnitudes[: d + 1]):
            if a != 0.0:
                out = out + a * basis_V(l, x, j.xi)
    return out


def eval_trig(coeffs, x):
    """Real trigonometric sum ``sum_{|k|<=N} c_k exp(ikx)`` from ``c_0..c_N``."""
    x = np.asarray(x, dtype=float)
    coeffs = np.asarray(coeffs, dtype=complex)
    out = np.full_like(x, coeffs[0].real)
    if coeffs.size > 1:
        k = np.arange(1, coeffs.size)
        phase = np.exp(1j * np.multiply.outer(x, k))
        out = out + 2.0 * np.real(phase @ coeffs[1:])
    return out


def eval(f, x, d=None):
    """Pointwise value of a test function (singular part at order ``d``)."""
    val = eval_singular(f.singular, x, d) + eval_trig(f.smooth.coeffs, x)
    return val if np.ndim(val) else float(val)


def eval_ctx(f, x, ctx, d=None):
    """Scalar evaluation in the arithmetic of ``ctx`` (used by derivative oracles)."""
    ctx = resolve(ctx)
    d = f.d1 if d is None else d
    x = ctx.mpf(x)
    out = ctx.mpf(0)
    for j in f.singular.jumps:
        for l, a in enumerate(j.magnitudes[: d + 1]):
            out += ctx.mpf(a) * basis_V(l, x, j.xi, ctx)
    c = f.smooth.coeffs
    out += ctx.mpf(float(c[0].real))
    for k in range(1, c.size):
        out += 2 * ctx.re(ctx.mpc(c[k].real, c[k].imag) * ctx.expj(k * x))
    return out


# --------------------------------------------------------------------------
# Synthesis


DEFAULT_BOUNDS = {"J1": 0.5, "J2": 2.0, "J3": 1.0, "T": 1.0}


def circular_distance(a, b):
    d = np.abs(np.asarray(a) - np.asarray(b)) % TWO_PI
    return np.minimum(d, TWO_PI - d)


def min_circular_separation(xis):
    xis = np.sort(np.asarray(xis, dtype=float))
    if xis.size < 2:
        return math.inf
    gaps = np.diff(np.concatenate([xis, [xis[0] + TWO_PI]]))
    return float(gaps.min())


def wrap_angle(x):
    """Map to ``[-pi, pi)``; values already in range are returned unchanged."""
    if -math.pi <= x < math.pi:
        return x
    y = (x + math.pi) % TWO_PI - math.pi
    return -math.pi if y >= math.pi else y


def synth_random(K, d1, M, seed, bounds=None, xis=None):
    """Random test function with ``K`` jumps and smoothness order ``d1``.

    Distributions (fixed here because only ranges are prescribed):

    * jump locations uniform on ``[-pi, pi)``, rejection-sampled until the
      circular separation is at least ``J3``;
    * ``|A_0| ~ U[J1, J2]`` with random sign, ``A_l ~ U[-J2, J2]`` for ``l >= 1``;
    * ``f_0 ~ U[-1, 1]``; ``f_k = c k^(-d1-2) exp(i theta)`` for ``1 <= k <= M``,
      ``c ~ U[0.1, 1]``, ``theta ~ U[0, 2 pi)``; stored bound ``R = 1``.

    Parameters
    ----------
    K : int
        Number of jumps.
    d1 : int
        Smoothness order; ``d1 + 1`` magnitudes per jump.
    M : int
        Number of nonzero smooth coefficients.
    seed : int
    bounds : dict, optional
        ``J1``, ``J2``, ``J3``; missing keys take defaults.
    xis : sequence of float, optional
        Fixed jump locations instead of random ones.
    """
    b = dict(DEFAULT_BOUNDS)
    b.update(bounds or {})
    J1, J2, J3 = b["J1"], b["J2"], b["J3"]
    if K < 0 or d1 < 0 or M < 0:
        raise ConfigurationError("K, d1 and M must be nonnegative")
    if not 0 < J1 <= J2:
        raise ConfigurationError("need 0 < J1 <= J2")
    if K > 1 and K * J3 >= TWO_PI:
        raise ConfigurationError(f"{K} jumps cannot be {J3} apart on the circle")
    rng = np.random.default_rng(seed)
    if xis is None:
        for _ in range(10000):
            cand = np.sort(rng.uniform(-math.pi, math.pi, K))
            if min_circular_separation(cand) >= J3:
                break
        else:
            raise ConfigurationError("could not place jumps with the requested separation")
    else:
        cand = np.sort([wrap_angle(float(x)) for x in xis])
        if len(cand) != K:
            raise ConfigurationError("number of fixed locations differs from K")
    jumps = []
    for xi in cand:
        mags = rng.uniform(-J2, J2, d1 + 1)
        mags[0] = rng.choice([-1.0, 1.0]) * rng.uniform(J1, J2)
        jumps.append(Jump(float(xi), tuple(float(a) for a in mags)))
    k = np.arange(1, M + 1)
    c = rng.uniform(0.1, 1.0, M)
    theta = rng.uniform(0.0, TWO_PI, M)
    fk = c * k ** (-d1 - 2.0) * np.exp(1j * theta)
    coeffs = np.concatenate([[rng.uniform(-1.0, 1.0)], fk])
    return TestFunction(SingularPart(tuple(jumps), d1), SmoothPart(coeffs, d1, 1.0), seed)


# --------------------------------------------------------------------------
# Serialization


def function_to_dict(f):
    return {
        "schema": SCHEMA_VERSION,
        "seed": f.seed,
        "jumps": [{"xi": j.xi, "magnitudes": list(j.magnitudes)} for j in f.singular.jumps],
        "smooth": {
            "d1": f.smooth.d1,
            "R": f.smooth.R,
            "coeffs": [{"k": k, "re": float(c.real), "im": float(c.imag)}
                       for k, c in enumerate(f.smooth.coeffs)],
        },
    }


def function_from_dict(doc):
    if doc.get("schema") != SCHEMA_VERSION:
        raise ConfigurationError(f"unsupported schema {doc.get('schema')!r}")
    try:
        jumps = tuple(Jump(float(j["xi"]), tuple(float(a) for a in j["magnitudes"]))
                      for j in doc["jumps"])
        sm = doc["smooth"]
        n = max((int(c["k"]) for c in sm["coeffs"]), default=0)
        coeffs = np.zeros(n + 1, dtype=complex)
        for c in sm["coeffs"]:
            if int(c["k"]) < 0:
                raise ConfigurationError("smooth coefficients are stored for k >= 0 only")
            coeffs[int(c["k"])] = complex(float(c["re"]), float(c["im"]))
        d1 = len(jumps[0].magnitudes) - 1 if jumps else int(sm["d1"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"malformed function document: {exc}") from exc
    return TestFunction(SingularPart(jumps, d1), SmoothPart(coeffs, int(sm["d1"]), float(sm["R"])),
                        doc.get("seed"))


def dumps_function(f):
    return json.dumps(function_to_dict(f), indent=1, sort_keys=True) + "\n"


def loads_function(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"not a valid function document: {exc}") from exc
    return function_from_dict(doc)
