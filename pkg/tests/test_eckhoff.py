import cmath
import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from jumpfourier import model
from jumpfourier.eckhoff import (ShiftMatrix, canonical_angle, eliminant, locate_jump,
                                 magnitude_inverse, predicted_spurious, resolve_jump, rk,
                                 rk_sequence, shift_apply, solve_magnitudes, vandermonde0_inverse,
                                 vandermonde_rows)
from jumpfourier.errors import ConditioningError, ConfigurationError, WindowRangeError
from jumpfourier.laguerre import laguerre_roots
from jumpfourier.model import FourierWindow, Jump, SingularPart, SmoothPart, TestFunction
from jumpfourier.precision import working_context


def pure_singular(xi, mags):
    s = SingularPart((Jump(xi, tuple(mags)),), len(mags) - 1)
    return TestFunction(s, SmoothPart(np.array([0.0]), len(mags) - 1))


def window_of(f, lo, hi, ctx=None):
    return model.fourier_window(f, lo, hi, ctx=ctx)


# --- r_k and the eliminant -------------------------------------------------------


def test_rk_simple_cases():
    w = FourierWindow(1, np.array([0.0, 1 / (2 * math.pi * 2j)]))
    assert rk(w, 0, 1) == 0
    assert rk(w, 0, 2) == pytest.approx(1.0)
    with pytest.raises(WindowRangeError):
        rk(w, 0, 5)
    with pytest.raises(ConfigurationError):
        rk(w, 0, 0)


def test_rk_on_pure_singular_data():
    d, xi, A = 2, 0.6, [1.1, -0.3, 0.8]
    f = pure_singular(xi, A)
    w = window_of(f, 30, 40)
    om = cmath.exp(-1j * xi)
    for k in (30, 35, 40):
        m = om ** k * sum((1j * k) ** (d - l) * A[l] for l in range(d + 1))
        assert rk(w, d, k) == pytest.approx(m, rel=1e-12)


def test_eliminant_order_zero():
    f = pure_singular(0.4, [1.0])
    w = window_of(f, 10, 11)
    q = eliminant(w, 0, 10)
    assert q.degree == 1
    assert q.coeffs[1] == rk(w, 0, 10) and q.coeffs[0] == -rk(w, 0, 11)


@pytest.mark.parametrize("d", range(0, 5))
def test_eliminant_equal_values_is_binomial(d):
    # equal r_k make the eliminant r (z - 1)^(d+1)
    ks = np.arange(5, 5 + d + 2)
    c = 1.0 / (2 * math.pi * (1j * ks) ** (d + 1))
    w = FourierWindow(5, c)
    q = eliminant(w, d, 5)
    expect = [math.comb(d + 1, j) * (-1) ** (d + 1 - j) for j in range(d + 2)]
    assert np.allclose(q.coeffs, expect, rtol=1e-13)


@pytest.mark.parametrize("k", [10, 100, 1000])
def test_eliminant_vanishes_at_omega(k):
    d, xi = 3, -2.1
    f = pure_singular(xi, [0.9, 0.5, -1.3, 0.4])
    q = eliminant(window_of(f, k, k + d + 1), d, k)
    om = cmath.exp(-1j * xi)
    assert abs(q(om)) <= 1e-10 * q.norm()


def test_zero_leading_coefficient():
    w = FourierWindow(4, np.array([0.0, 1.0, 1.0]))
    with pytest.raises(ConditioningError):
        eliminant(w, 1, 4)


# --- locating the jump -------------------------------------------------------------


def test_locate_exact_prony_type_data():
    f = pure_singular(1.0, [1.0])
    om, diag = locate_jump(window_of(f, 50, 51), 0, 50)
    assert abs(-cmath.phase(om) - 1.0) <= 1e-10
    assert diag["predicted_spurious"] == []


def test_predicted_spurious():
    om = cmath.exp(-0.3j)
    assert predicted_spurious(om, 1, 40) == [pytest.approx(om / (1 - 2 / 40))]
    assert predicted_spurious(om, 0, 40) == []
    for d in range(1, 8):
        for y in predicted_spurious(om, d, 10 * d + 20):
            assert abs(y) >= 1


@pytest.mark.parametrize("d", [1, 2, 3])
def test_spurious_roots_approach_prediction(d):
    ctx = working_context(50)
    f = model.synth_random(1, 2 * d + 1, 3000, seed=1)
    errs = []
    Ms = (100, 400, 1600)
    for M in Ms:
        om, diag = locate_jump(window_of(f, M, M + d + 1, ctx), d, M, ctx)
        others = [z for z in diag["root_set"].roots if z != om]
        errs.append(max(min(float(abs(z - y)) for z in others) for y in diag["predicted_spurious"]))
        # the located root keeps a distance of order 1/M from the spurious ones
        assert min(float(abs(om - y)) for y in diag["predicted_spurious"]) * M >= laguerre_roots(d)[0] / 2
    slope = np.polyfit(np.log(Ms), np.log(errs), 1)[0]
    assert slope == pytest.approx(-2, abs=0.2)


def test_located_root_is_on_the_spurious_ray():
    ctx = working_context(40)
    f = model.synth_random(1, 7, 600, seed=3)
    M, d = 500, 3
    om, diag = locate_jump(window_of(f, M, M + d + 1, ctx), d, M, ctx)
    for y in diag["predicted_spurious"]:
        # y is a real multiple of omega larger than one
        ratio = complex(y / om)
        assert abs(ratio.imag) < 1e-14 and ratio.real > 1


# --- shift matrix and magnitudes -----------------------------------------------------


def test_shift_matrix_first_row_d4():
    for k in (1, 3, 17):
        assert ShiftMatrix(4, k).to_rows()[0] == [1, -k, k ** 2, -k ** 3, k ** 4]


def test_shift_matrix_structure():
    S = ShiftMatrix(5, 7).to_rows()
    assert all(S[m][m] == 1 for m in range(6))
    assert all(S[m][n] == 0 for m in range(6) for n in range(m))
    assert ShiftMatrix(4, 0).to_rows() == [[int(m == n) for n in range(5)] for m in range(5)]


@pytest.mark.parametrize("d", range(0, 6))
@pytest.mark.parametrize("k", [1, 10, 1000, 10_000])
def test_shift_row_action(d, k):
    S = ShiftMatrix(d, k)
    for t in range(d + 1):
        v = [(k + t) ** n for n in range(d + 1)]
        assert shift_apply(S, v, row=True) == [t ** n for n in range(d + 1)]


def test_shift_apply_dimension():
    with pytest.raises(ConfigurationError):
        shift_apply(ShiftMatrix(2, 3), [1, 2])


@pytest.mark.parametrize("d", range(0, 7))
def test_vandermonde_inverse_exact(d):
    inv0 = vandermonde0_inverse(d)
    V0 = vandermonde_rows(0, d)
    for i in range(d + 1):
        for j in range(d + 1):
            assert sum(V0[i][m] * inv0[m][j] for m in range(d + 1)) == (i == j)
    for k in (1, 10, 100):
        Vk = vandermonde_rows(k, d)
        Ik = magnitude_inverse(k, d)
        for i in range(d + 1):
            for j in range(d + 1):
                assert sum(Vk[i][m] * Ik[m][j] for m in range(d + 1)) == Fraction(int(i == j))


@pytest.mark.parametrize("d", range(0, 4))
def test_magnitudes_on_exact_data(d):
    # data rounding is amplified by about M^(2d); d >= 2 needs more than double
    ctx = working_context(30) if d >= 2 else None
    xi = 0.9
    A = [1.3, -0.7, 0.45, -1.1][: d + 1]
    f = pure_singular(xi, A)
    M = 100
    w = window_of(f, M, M + d + 1, ctx)
    om = ctx.expj(-ctx.mpf(xi)) if ctx else cmath.exp(-1j * xi)
    mags = [float(a) for a in solve_magnitudes(w, om, d, M, ctx)]
    assert np.allclose(mags, A, rtol=1e-9, atol=0)


def test_magnitudes_order_zero_formula():
    f = model.synth_random(1, 3, 200, seed=2)
    M = 64
    w = window_of(f, M, M + 1)
    om = cmath.exp(-1j * f.singular.xis[0])
    mag, = solve_magnitudes(w, om, 0, M)
    assert mag == pytest.approx((rk(w, 0, M) * om ** (-M)).real, rel=1e-12)


def test_factorized_matches_direct_solve_extended():
    import mpmath

    ctx = working_context(30)
    d = 3
    f = model.synth_random(1, 2 * d + 1, 200, seed=d)
    xi = ctx.mpf(f.singular.xis[0])
    om = ctx.expj(-xi)
    for M in (20, 60, 100):
        w = window_of(f, M, M + d + 1, ctx)
        rhs = mpmath.matrix([rk(w, d, M + j, ctx) * om ** (-(M + j)) for j in range(d + 1)])
        V = mpmath.matrix(vandermonde_rows(M, d))
        with mpmath.workdps(30):
            B = mpmath.lu_solve(V, rhs)
        A_direct = [float(ctx.re(B[n] / ctx.mpc(0, 1) ** n)) for n in range(d + 1)][::-1]
        A_fact = [float(a) for a in solve_magnitudes(w, om, d, M, ctx)]
        assert np.allclose(A_fact, A_direct, rtol=1e-6, atol=1e-9)


@pytest.mark.parametrize("d", range(1, 3))
def test_factorized_matches_direct_solve(d):
    f = model.synth_random(1, 2 * d + 1, 200, seed=d)
    xi = f.singular.xis[0]
    for M in (20, 60, 100):
        w = window_of(f, M, M + d + 1)
        om = cmath.exp(-1j * xi)
        rhs = np.array([rk(w, d, M + j) * om ** (-(M + j)) for j in range(d + 1)])
        V = np.array(vandermonde_rows(M, d), dtype=float)
        B = np.linalg.solve(V, rhs)
        A_direct = [(B[n] / 1j ** n).real for n in range(d + 1)][::-1]
        A_fact = solve_magnitudes(w, om, d, M)
        assert np.allclose(A_fact, A_direct, rtol=1e-6, atol=1e-9)


def test_factorized_solve_survives_huge_M():
    d, M = 3, 20_000
    ctx = working_context(60)
    A = [0.8, 0.3, -0.5, 1.2]
    f = pure_singular(0.2, A)
    w = window_of(f, M, M + d + 1, ctx)
    mags = solve_magnitudes(w, ctx.expj(-ctx.mpf(0.2)), d, M, ctx)
    assert all(math.isfinite(float(m)) for m in mags)
    assert np.allclose([float(m) for m in mags], A, rtol=1e-12)


def test_magnitude_guards():
    f = pure_singular(0.2, [1.0, 0.5])
    w = window_of(f, 50, 52)
    with pytest.raises(ConditioningError):
        solve_magnitudes(w, 3.0, 1, 50)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        _, diag = solve_magnitudes(w, 1.5 * cmath.exp(-0.2j), 1, 50, return_diagnostics=True)
    assert diag["clamped"] and any(issubclass(c.category, RuntimeWarning) for c in caught)


@pytest.mark.parametrize("d", range(0, 5))
def test_exact_on_polynomial_data_extended(d):
    # in 50 digits the algebra is exact up to rounding for M up to 1e4
    ctx = working_context(50)
    A = [1.0, -0.6, 0.9, 0.35, -1.4][: d + 1]
    xi = -1.7
    f = pure_singular(xi, A)
    for M in (10, 1000, 10_000):
        est = resolve_jump(window_of(f, M, M + d + 1, ctx), d, M, ctx)
        assert abs(float(est.xi) - xi) <= 1e-8
        assert np.allclose([float(a) for a in est.magnitudes], A, rtol=0, atol=1e-8)


def test_double_precision_polynomial_data_moderate_M():
    A = [1.0, -0.6, 0.9]
    f = pure_singular(2.5, A)
    for M in (10, 100):
        est = resolve_jump(window_of(f, M, M + 3), 2, M)
        assert abs(est.xi - 2.5) <= 1e-8
        assert np.allclose(est.magnitudes, A, atol=1e-8)


def test_resolve_jump_diagnostics_and_canonical_angle():
    f = pure_singular(-math.pi + 1e-3, [1.0, 0.2])
    est = resolve_jump(window_of(f, 40, 42), 1, 40)
    assert -math.pi <= est.xi < math.pi
    assert {"root_set", "predicted_spurious", "magnitude_residual", "magnitudes_complex"} <= set(est.diagnostics)
    assert canonical_angle(math.pi) == -math.pi
    assert canonical_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


def test_rk_sequence_range():
    f = pure_singular(0.1, [1.0])
    with pytest.raises(WindowRangeError):
        rk_sequence(window_of(f, 5, 6), 2, 5)
