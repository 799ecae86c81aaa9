import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from peakinterp.quadrature import QuadratureError, adaptive_cubature, initial_cells


@given(st.lists(st.floats(-3, 3), min_size=14, max_size=14))
def test_gauss_rule_exact_for_degree_13(coeffs):
    poly = np.polynomial.Polynomial(coeffs)
    exact = poly.integ()(1.0) - poly.integ()(-0.5)
    res = adaptive_cubature(lambda x: poly(x[:, 0]), [-0.5], [1.0], abs_tol=1e-9)
    assert res.value == pytest.approx(exact, abs=1e-10 * (1 + sum(map(abs, coeffs))))


def test_gaussian_in_two_dimensions():
    res = adaptive_cubature(lambda x: np.exp(-np.sum(x**2, axis=1)), [-1, -2], [2, 1], abs_tol=1e-11)
    ref = 0.25 * np.pi * (special.erf(2) + special.erf(1)) ** 2
    assert res.converged
    assert res.value == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("delta", [0.1, 0.01, 0.001])
def test_lorentzian_spike(delta):
    res = adaptive_cubature(lambda x: delta / (x[:, 0] ** 2 + delta**2), [-1], [1], abs_tol=1e-9,
                            split_at=[0.0])
    assert res.value == pytest.approx(2 * math.atan(1 / delta), abs=1e-8)


def test_complex_integrand_against_scipy():
    f = lambda t: np.exp(1j * 3 * t) / (1.1 - np.cos(t))
    res = adaptive_cubature(lambda x: f(x[:, 0]), [-1], [2], abs_tol=1e-10)
    re = integrate.quad(lambda t: f(t).real, -1, 2, epsabs=1e-13)[0]
    im = integrate.quad(lambda t: f(t).imag, -1, 2, epsabs=1e-13)[0]
    assert abs(res.value - complex(re, im)) < 1e-9


def test_bit_reproducible():
    f = lambda x: np.sin(7 * x[:, 0] * x[:, 1]) / (0.01 + x[:, 0] ** 2)
    a = adaptive_cubature(f, [-1, -1], [1, 1], abs_tol=1e-8)
    b = adaptive_cubature(f, [-1, -1], [1, 1], abs_tol=1e-8)
    assert a.value == b.value and a.evaluations == b.evaluations


def test_failure_is_reported():
    f = lambda x: 1e-4 / (x[:, 0] ** 2 + 1e-8)
    res = adaptive_cubature(f, [-1], [1], abs_tol=1e-12, max_evaluations=500)
    assert not res.converged
    with pytest.raises(QuadratureError) as exc:
        adaptive_cubature(f, [-1], [1], abs_tol=1e-12, max_evaluations=500, raise_on_failure=True)
    assert exc.value.result.evaluations >= 500


def test_initial_cells_cover_box():
    lo, w = initial_cells([0, 0], [1, 2], split_at=[0.3, 0.5], splits=2)
    assert np.prod(w, axis=1).sum() == pytest.approx(2.0)
    assert any(np.allclose(c, [0.3, 0.5]) for c in lo)
