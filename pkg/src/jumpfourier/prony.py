"""Order-zero location estimates of all jumps from high-index coefficients.

For large ``k``, ``r_k = 2 pi i k c_k ~ sum_j A_{0,j} omega_j^k``, an exponential
sum.  Its nodes are the roots of ``Q(z) = z^K + sum_i q_i z^i`` where the
``q_i`` solve the Hankel system ``H q = -(r_{M+K}, ..., r_{M+2K-1})``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, ConfigurationError, IllPosedError, NumericalError
from .model import DEFAULT_BOUNDS, min_circular_separation
from .polyroot import roots

KAPPA_MAX = 1e12


@dataclass(frozen=True)
class PronyProblem:
    K: int
    M: int
    rk0: tuple
    bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))

    def __post_init__(self):
        if self.K < 1:
            raise ConfigurationError("K must be at least 1")
        if len(self.rk0) != 2 * self.K:
            raise ConfigurationError(f"need {2 * self.K} values r_M..r_(M+2K-1), got {len(self.rk0)}")


@dataclass(frozen=True)
class PronyEstimate:
    xis: tuple
    omegas: tuple
    condition: float


def prony_problem(window, K, M, bounds=None):
    """Collect ``r_k = 2 pi i k c_k`` for ``k = M .. M+2K-1`` from a window."""
    window.require(M, M + 2 * K - 1, "Prony system")
    b = dict(DEFAULT_BOUNDS)
    b.update(bounds or {})
    rk0 = tuple(2 * math.pi * 1j * k * complex(window[k]) for k in range(M, M + 2 * K))
    return PronyProblem(K, M, rk0, b)


def hankel_matrix(p):
    r = np.asarray(p.rk0, dtype=complex)
    K = p.K
    return np.array([[r[m + n] for n in range(K)] for m in range(K)])


def hankel_condition(p):
    """1-norm condition number of the ``K x K`` Hankel matrix."""
    H = hankel_matrix(p)
    try:
        inv = np.linalg.inv(H)
    except np.linalg.LinAlgError:
        return math.inf
    return float(np.linalg.norm(H, 1) * np.linalg.norm(inv, 1))


def prony_estimate(p, check_separation=True):
    """Solve the Prony system and return sorted location estimates.

    Raises
    ------
    IllPosedError
        Hankel condition number above ``1e12``.
    AccuracyError
        Estimates closer than ``J3 / 3`` (raise ``M``).
    """
    K = p.K
    H = hankel_matrix(p)
    kappa = hankel_condition(p)
    if not math.isfinite(kappa) or kappa > KAPPA_MAX:
        raise IllPosedError(f"Hankel matrix numerically singular (kappa={kappa:.3g})", kappa)
    rhs = -np.asarray(p.rk0[K:], dtype=complex)
    q = np.linalg.solve(H, rhs)  # LU with partial pivoting
    rs = roots(list(q) + [1.0])
    if len(rs.roots) != K:
        raise NumericalError("root count differs from K")
    omegas = [complex(z) for z in rs.roots]
    xis = [-math.atan2(z.imag, z.real) for z in omegas]
    xis = [x if x < math.pi else -math.pi for x in xis]
    order = np.argsort(xis)
    xis = tuple(float(xis[i]) for i in order)
    omegas = tuple(omegas[i] for i in order)
    J3 = p.bounds.get("J3", DEFAULT_BOUNDS["J3"])
    if check_separation and K > 1 and min_circular_separation(xis) < J3 / 3:
        raise AccuracyError(
            f"Prony estimates separated by {min_circular_separation(xis):.3g} < J3/3; increase M")
    return PronyEstimate(xis, omegas, kappa)
