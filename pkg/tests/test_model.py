import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jumpfourier import model
from jumpfourier.errors import ConfigurationError, UnsupportedDegreeError, WindowRangeError
from jumpfourier.model import FourierWindow, Jump, SingularPart, SmoothPart, TestFunction
from jumpfourier.precision import working_context


def gauss_panels(fn, a, b, panels=64, order=32):
    """Composite Gauss-Legendre integral of a smooth integrand on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        total = total + half * np.sum(w * fn(mid + half * x))
    return total


def quad_coefficient(f, k, panels=64):
    """c_k(f) by quadrature split at the jumps (independent of the closed formula)."""
    xs = sorted(f.singular.xis.tolist())
    # integrate over one period starting just at the first jump
    a = xs[0]
    cuts = xs + [a + 2 * math.pi]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        # shift the evaluation point into [-pi, pi); the integrand is periodic
        def g(x):
            y = (x + math.pi) % (2 * math.pi) - math.pi
            return model.eval(f, y) * np.exp(-1j * k * x)
        eps = 1e-13
        total += gauss_panels(g, lo + eps, hi - eps, panels)
    return total / (2 * math.pi)


# --- Bernoulli ------------------------------------------------------------


def test_bernoulli_examples():
    assert model.bernoulli(1, 0.5) == 0.0
    assert model.bernoulli(0, 7.3) == 1.0
    assert model.bernoulli(2, 0.0) == pytest.approx(1 / 6, abs=1e-16)


def test_bernoulli_exact_coefficients():
    assert model.bernoulli_coeffs(2) == (Fraction(1, 6), Fraction(-1), Fraction(1))
    # B_n(1) = B_n(0) for n >= 2
    for n in range(2, 31):
        c = model.bernoulli_coeffs(n)
        assert sum(c) == c[0]


def test_bernoulli_degree_limit():
    with pytest.raises(UnsupportedDegreeError):
        model.bernoulli(31, 0.1)


@given(st.integers(1, 12), st.floats(0, 1))
def test_bernoulli_derivative_identity(n, x):
    # B_n'(x) = n B_{n-1}(x), checked by central difference
    h = 1e-6
    fd = (model.bernoulli(n, x + h) - model.bernoulli(n, x - h)) / (2 * h)
    assert fd == pytest.approx(n * model.bernoulli(n - 1, x), abs=1e-5 * max(1, n ** 2))


# --- basis functions --------------------------------------------------------


def test_V0_one_sided_limits():
    xi = 0.4
    assert model.basis_V(0, xi, xi) == pytest.approx(0.5)
    assert model.basis_V(0, xi - 1e-12, xi) == pytest.approx(-0.5)


def test_V1_half_period_value():
    # frozen from an independent mpmath evaluation of B_2(1/2)
    assert model.basis_V(1, 0.3 + math.pi, 0.3) == pytest.approx(0.261799387799149436538553615273, rel=1e-14)


@pytest.mark.parametrize("l", range(0, 6))
def test_basis_derivative_jumps(l):
    # the l-th derivative of V_l jumps by one at xi; lower derivatives are continuous
    xi, h = 0.7, 1e-3

    def deriv(m, x):
        # m-th derivative of V_l is V_{l-m} (periodic Bernoulli structure)
        return model.basis_V(l - m, x, xi)

    for m in range(l + 1):
        jump = deriv(m, xi) - deriv(m, xi - 1e-13)
        assert jump == pytest.approx(1.0 if m == l else 0.0, abs=1e-9)
    # the derivative relation itself, by finite differences away from xi
    if l >= 1:
        x = xi + 1.0
        fd = (model.basis_V(l, x + h, xi) - model.basis_V(l, x - h, xi)) / (2 * h)
        assert fd == pytest.approx(model.basis_V(l - 1, x, xi), abs=1e-5)


def test_basis_V_extended_precision():
    ctx = working_context(40)
    v = model.basis_V(2, ctx.mpf("1.3"), ctx.mpf("0.2"), ctx)
    assert float(v) == pytest.approx(model.basis_V(2, 1.3, 0.2), rel=1e-14)


# --- singular and exact coefficients -----------------------------------------


def single(xi, mags):
    return SingularPart((Jump(xi, tuple(mags)),), len(mags) - 1)


def test_singular_fourier_substitution():
    s = single(0.0, [2 * math.pi])
    assert model.singular_fourier(s, 0, 5) == pytest.approx(1 / 5j, abs=1e-15)


def test_singular_fourier_zero_magnitudes_and_k0():
    s = SingularPart((Jump(-1.0, (0.0, 0.0)), Jump(1.0, (0.0, 0.0))), 1)
    assert model.singular_fourier(s, 1, 3) == 0
    s = single(0.5, [1.0, 2.0])
    assert model.singular_fourier(s, 1, 0) == 0


def test_singular_fourier_against_quadrature():
    s = single(math.pi / 2, [1.0, 1.0])
    got = model.singular_fourier(s, 1, 2)
    # frozen from an mpmath quadrature of V_0 + V_1 (30 digits)
    ref = 0.0397887357729738339422209408431 + 0.0795774715459476678844418816863j
    assert got == pytest.approx(ref, rel=1e-12)
    assert got == pytest.approx(-(1 / 2j + 1 / (2j) ** 2) / (2 * math.pi), rel=1e-14)


def test_exact_fourier_smooth_zero_and_k0():
    s = single(0.3, [1.0, -0.5])
    f = TestFunction(s, SmoothPart(np.array([0.25]), 1))
    for k in (1, -4, 9):
        assert model.exact_fourier(f, k) == model.singular_fourier(s, 1, k)
    assert model.exact_fourier(f, 0) == 0.25


def test_exact_fourier_matches_quadrature():
    f = model.synth_random(2, 4, 40, seed=11)
    for k in (0, 1, 5, 17, -17, 40):
        q = quad_coefficient(f, k)
        c = model.exact_fourier(f, k)
        assert abs(c - q) <= 1e-8 * abs(c)


@given(st.integers(0, 10_000), st.integers(1, 200))
@settings(max_examples=40, deadline=None)
def test_window_conjugate_symmetry(seed, n):
    f = model.synth_random(2, 5, 50, seed)
    w = model.fourier_window(f, -n, n)
    v = w.as_array()
    assert np.array_equal(v[:n], np.conj(v[:n:-1]))
    direct = model.exact_fourier(f, -np.arange(1, n + 1))
    assert np.allclose(direct, np.conj(v[n + 1:]), rtol=1e-12, atol=0)


def test_window_extended_precision_agrees():
    f = model.synth_random(1, 3, 30, seed=2)
    ctx = working_context(30)
    hi = model.fourier_window(f, 5, 9, ctx=ctx)
    lo = model.fourier_window(f, 5, 9)
    assert np.allclose(hi.as_array(), lo.as_array(), rtol=1e-14)


def test_fourier_window_access():
    w = FourierWindow(-2, np.arange(5, dtype=complex), symmetric=True)
    assert w[2] == 4 and w.last_index == 2
    assert w.slice(0, 1).first_index == 0
    with pytest.raises(WindowRangeError):
        w[3]
    with pytest.raises(ConfigurationError):
        FourierWindow(0, np.ones(3), symmetric=True)


# --- evaluation -------------------------------------------------------------


def test_eval_constant_smooth_part():
    f = TestFunction(single(0.0, [0.0]), SmoothPart(np.array([1.0]), 0))
    assert np.allclose(model.eval(f, np.linspace(-3, 3, 11)), 1.0)


def test_eval_sawtooth_difference():
    f = TestFunction(single(0.0, [1.0]), SmoothPart(np.array([0.0]), 0))
    # V_0(x; 0) = 1/2 - x/(2 pi) on (0, 2 pi)
    diff = model.eval(f, 0.1) - model.eval(f, -0.1)
    assert diff == pytest.approx(1 - 0.2 / (2 * math.pi), abs=1e-14)


def test_eval_matches_partial_sum_away_from_jumps():
    f = model.synth_random(1, 3, 30, seed=5)
    x = f.singular.xis[0] + 1.5
    ks = np.arange(1, 20001)
    c = model.exact_fourier(f, ks)
    s = model.exact_fourier(f, 0).real + 2 * np.sum((c * np.exp(1j * ks * x)).real)
    assert s == pytest.approx(model.eval(f, x), abs=1e-4)


def test_jump_absorption_by_finite_differences():
    f = model.synth_random(1, 3, 30, seed=7)
    xi = f.singular.xis[0]
    mags = f.singular.jumps[0].magnitudes
    h = 1e-5
    for l in range(2):
        def dl(x):
            if l == 0:
                return model.eval(f, x)
            return (model.eval(f, x + h) - model.eval(f, x - h)) / (2 * h)
        jump = dl(xi + 2 * h) - dl(xi - 2 * h)
        assert jump == pytest.approx(mags[l], rel=1e-4, abs=1e-3)


# --- synthesis ----------------------------------------------------------------


def test_synth_deterministic_and_bounded():
    a = model.synth_random(3, 6, 100, seed=4)
    b = model.synth_random(3, 6, 100, seed=4)
    assert model.dumps_function(a) == model.dumps_function(b)
    k = np.arange(1, 101)
    scaled = np.abs(a.smooth.coeffs[1:]) * k ** 8.0
    assert np.all((scaled >= 0.1 - 1e-12) & (scaled <= 1 + 1e-12))
    a0 = np.abs([j.magnitudes[0] for j in a.singular.jumps])
    assert np.all((a0 >= 0.5) & (a0 <= 2.0))
    assert a.singular.min_separation() >= 1.0


def test_synth_single_jump_and_infeasible():
    assert model.synth_random(1, 2, 10, 0, bounds={"J3": 10.0}).singular.K == 1
    with pytest.raises(ConfigurationError):
        model.synth_random(7, 2, 10, 0, bounds={"J3": 1.0})


def test_smooth_part_bound_checked():
    with pytest.raises(ConfigurationError):
        SmoothPart(np.array([0, 2.0]), 1)


def test_singular_part_validation():
    with pytest.raises(ConfigurationError):
        SingularPart((Jump(0.5, (1.0,)), Jump(0.1, (1.0,))), 0)
    with pytest.raises(ConfigurationError):
        SingularPart((Jump(0.5, (1.0, 2.0)),), 0)
    with pytest.raises(ConfigurationError):
        SingularPart((Jump(4.0, (1.0,)),), 0)


def test_serialization_round_trip():
    f = model.synth_random(2, 3, 20, seed=9)
    text = model.dumps_function(f)
    g = model.loads_function(text)
    assert model.dumps_function(g) == text
    assert np.array_equal(g.smooth.coeffs, f.smooth.coeffs)
    assert '"schema": 1' in text
