"""Fourier-domain localization of one jump by multiplication with a bump.

``h = f g`` keeps the jump of ``f`` inside the flat part of the bump ``g``
and removes every other jump.  Its coefficients are the truncated
convolution

    c~_k(h) = sum_{i=-2M}^{2M} c_i(f) c_{k-i}(g),   k = 0 .. M+d+1,

accumulated with error-free transformations (the Dot2 scheme) so that the
sum is as accurate as if computed in twice the working precision.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .bump import BumpSpec, bump_window, make_bump
from .errors import ConfigurationError, LocalizationInfeasibleError
from .model import FourierWindow, min_circular_separation

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    """``a + b = s + e`` exactly (Knuth)."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_product(a, b):
    """``a * b = p + e`` exactly (Dekker, no fused multiply-add needed)."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = al * bl - (((p - ah * bh) - al * bh) - ah * bl)
    return p, e


class _CompensatedAccumulator:
    """Running sum of real arrays with a separate error term."""

    def __init__(self, shape):
        self.s = np.zeros(shape)
        self.c = np.zeros(shape)

    def add_product(self, a, b, sign=1.0):
        p, e = two_product(a, b)
        self.s, q = two_sum(self.s, sign * p)
        self.c += q + sign * e

    def value(self):
        return self.s + self.c


def compensated_convolution(fvals, fidx, gwin, ks):
    """``sum_i f_i g_{k-i}`` for every ``k`` in ``ks``, in fixed index order.

    Parameters
    ----------
    fvals : ndarray of complex
        ``c_i(f)`` for consecutive ``i`` starting at ``fidx``.
    fidx : int
    gwin : FourierWindow
        Must cover every ``k - i`` that occurs.
    ks : ndarray of int
    """
    g = np.asarray(gwin.values)
    g0 = gwin.first_index
    re = _CompensatedAccumulator(ks.shape)
    im = _CompensatedAccumulator(ks.shape)
    for n, fi in enumerate(fvals):
        i = fidx + n
        gv = g[ks - i - g0]
        a, b = fi.real, fi.imag
        c, d = gv.real, gv.imag
        # (a + ib)(c + id) = (ac - bd) + i(ad + bc)
        re.add_product(a, c)
        re.add_product(b, d, -1.0)
        im.add_product(a, d)
        im.add_product(b, c)
    return re.value() + 1j * im.value()


@dataclass(frozen=True)
class LocalizedWindow:
    jump_index: int
    coeffs: FourierWindow
    bump: BumpSpec
    M: int


def bump_range(M, d):
    """Index range of bump coefficients needed by the truncated convolution."""
    return -(3 * M + d + 1), 3 * M + d + 1


def localized_coeffs(f_window, bump_coeffs, M, d, jump_index=0, spec=None):
    """Truncated convolution ``c~_k(h)`` for ``k = 0 .. M+d+1``.

    ``f_window`` must cover ``[-2M, 2M]``; ``bump_coeffs`` must cover every
    ``k - i``, i.e. ``[-2M, 3M+d+1]``.
    """
    if M < d + 2:
        raise ConfigurationError(f"M={M} must be at least d+2={d + 2}")
    if not f_window.covers(-2 * M, 2 * M):
        raise ConfigurationError(f"f window must cover [-{2 * M}, {2 * M}]")
    if not bump_coeffs.covers(-2 * M, 3 * M + d + 1):
        raise ConfigurationError(f"bump window must cover [-{2 * M}, {3 * M + d + 1}]")
    fw = f_window.slice(-2 * M, 2 * M)
    ks = np.arange(0, M + d + 2)
    vals = compensated_convolution(np.asarray(fw.as_array()), -2 * M, bump_coeffs, ks)
    return LocalizedWindow(jump_index, FourierWindow(0, vals), spec, M)


def identity_window(f_window, M, d, jump_index=0):
    """Localization by the constant bump ``g = 1`` (``c_0(g) = 1``, others zero)."""
    f_window.require(0, M + d + 1, "identity localization")
    return LocalizedWindow(jump_index, f_window.slice(0, M + d + 1), None, M)


def localize_all(f_window, xhats, J3, d1, M, d):
    """One localized window per coarse jump estimate.

    Each bump is centered at its estimate with half-support ``E = J3`` and
    flat width ``t = 2 J3 / 3``.
    """
    xhats = [float(x) for x in xhats]
    if len(xhats) > 1 and min_circular_separation(xhats) < J3 / 3:
        raise LocalizationInfeasibleError(
            f"coarse estimates closer than J3/3 = {J3 / 3:.3g}; bumps would overlap")
    if 2 * J3 >= 2 * np.pi:
        raise ConfigurationError("bump support 2*J3 must be shorter than the period")
    if d1 < 2 * d + 1:
        warnings.warn(f"d1={d1} below 2d+1={2 * d + 1}; accuracy orders not guaranteed",
                      RuntimeWarning, stacklevel=2)
    lo, hi = bump_range(M, d)
    out = []
    for j, xh in enumerate(xhats):
        spec = make_bump(xh, J3, 2 * J3 / 3)
        out.append(localized_coeffs(f_window, bump_window(spec, lo, hi), M, d, j, spec))
    return out
