import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from peakinterp.polynomial import Polynomial, evaluate_many


def monomial_rows(nvars, max_terms=6, max_exp=3):
    row = st.tuples(*[st.integers(0, max_exp)] * nvars, st.integers(-5, 5).filter(bool))
    return st.lists(row, min_size=1, max_size=max_terms)


def direct_eval(rows, x):
    return sum(r[-1] * np.prod([x[i] ** e for i, e in enumerate(r[:-1])]) for r in rows)


def test_roundtrip_and_merge():
    p = Polynomial.from_list([[2, 0, 1.0], [0, 1, -3.0], [2, 0, 2.0]], 2)
    assert p.to_list() == [[0, 1, -3.0], [2, 0, 3.0]]
    assert Polynomial.from_list(p.to_list(), 2) == p
    assert p.degree == 2


def test_cancellation_gives_zero():
    x = Polynomial.variable(0, 1)
    assert (x - x).is_zero


def test_known_values():
    x, y = Polynomial.variable(0, 2), Polynomial.variable(1, 2)
    p = x**2 * y + 3 * y - 1
    assert p(np.array([2.0, 5.0])) == pytest.approx(4 * 5 + 15 - 1)
    np.testing.assert_allclose(p.gradient(np.array([2.0, 5.0])), [2 * 2 * 5, 4 + 3])
    np.testing.assert_allclose(p.hessian(np.array([2.0, 5.0])), [[10, 4], [4, 0]])


@given(monomial_rows(3), st.lists(st.floats(-1.5, 1.5), min_size=3, max_size=3))
def test_evaluation_matches_direct_sum(rows, x):
    p = Polynomial.from_list([list(r) for r in rows], 3)
    x = np.array(x)
    assert p(x) == pytest.approx(direct_eval(rows, x), abs=1e-9, rel=1e-12)


@given(monomial_rows(2), monomial_rows(2), st.lists(st.floats(-1, 1), min_size=2, max_size=2))
def test_ring_operations(a, b, x):
    p = Polynomial.from_list([list(r) for r in a], 2)
    q = Polynomial.from_list([list(r) for r in b], 2)
    x = np.array(x)
    assert (p * q)(x) == pytest.approx(p(x) * q(x), abs=1e-9)
    assert (p + q)(x) == pytest.approx(p(x) + q(x), abs=1e-9)
    assert p * q == q * p


@given(monomial_rows(2), st.lists(st.floats(-1, 1), min_size=2, max_size=2))
def test_derivatives_against_finite_differences(rows, x):
    p = Polynomial.from_list([list(r) for r in rows], 2)
    x = np.array(x)
    h = 1e-5
    fd = [(p(x + h * e) - p(x - h * e)) / (2 * h) for e in np.eye(2)]
    np.testing.assert_allclose(p.gradient(x), fd, atol=1e-6)
    H = p.hessian(x)
    np.testing.assert_array_equal(H, H.T)
    fdH = np.array([(p.gradient(x + h * e) - p.gradient(x - h * e)) / (2 * h) for e in np.eye(2)])
    np.testing.assert_allclose(H, fdH, atol=1e-5)


def test_batched_evaluation(rng):
    x, y = Polynomial.variable(0, 2), Polynomial.variable(1, 2)
    polys = [x * y, x**3 - y, Polynomial.constant(2.0, 2)]
    pts = rng.standard_normal((7, 2))
    out = evaluate_many(polys, pts)
    assert out.shape == (7, 3)
    for k, p in enumerate(polys):
        np.testing.assert_allclose(out[:, k], [p(q) for q in pts])


def test_higher_order_diff():
    x = Polynomial.variable(0, 1)
    assert (x**4).diff(0, 3) == 24 * x
    assert (x**2).diff(0, 3).is_zero
