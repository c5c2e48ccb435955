import math

import numpy as np
import pytest

from src.exceptions import ConvergenceError, DegreeCapError, InvalidIntervalError, NoSignChangeError
from src.games.davie_reeds import h_gap
from src.numerics.special_functions import (
    Phi,
    Phi_inv,
    find_root,
    hermite_he,
    hermite_partial_integral,
    hermite_table,
    integrate,
    phi,
)

pytestmark = pytest.mark.unit

C_STAR = 0.25573


@pytest.mark.parametrize(
    "x,expected,tol",
    [(0.0, 0.3989422804014327, 1e-15), (C_STAR, 0.19748 / (2 * C_STAR), 2e-4)],
)
def test_phi_values(x, expected, tol):
    assert phi(x) == pytest.approx(expected, abs=tol)


def test_phi_at_one_matches_dr_domain_edge():
    assert 2 * phi(1.0) == pytest.approx(0.4839, abs=1e-4)


def test_phi_accepts_arrays():
    x = np.array([-1.0, 0.0, 1.0])
    np.testing.assert_allclose(phi(x), np.exp(-x * x / 2) / math.sqrt(2 * math.pi))


def test_Phi_values():
    assert Phi(0.0) == 0.5
    assert 2 * Phi(C_STAR) - 1 == pytest.approx(0.20184, abs=5e-5)
    assert Phi(8.0) == pytest.approx(1.0, abs=1e-15)


def test_Phi_lower_tail_keeps_relative_accuracy():
    # erfc keeps the far tail accurate where 1 - Phi(x) would cancel
    assert Phi(-10.0) == pytest.approx(7.619853024160527e-24, rel=1e-12)


def test_Phi_inv_round_trips_through_Phi():
    p = np.array([1e-6, 0.1, 0.5, 0.9])
    np.testing.assert_allclose(Phi(Phi_inv(p)), p, rtol=1e-12)


@pytest.mark.parametrize("k,x,expected", [(0, 7.3, 1.0), (1, 2.0, 2.0), (3, 2.0, 2.0), (4, 1.0, -2.0)])
def test_hermite_values(k, x, expected):
    assert hermite_he(k, x) == pytest.approx(expected)


def test_he2_square_bounded_on_strip():
    x = np.linspace(-C_STAR, C_STAR, 101)
    assert np.all(hermite_he(2, x) ** 2 / 2 <= 1.0)


def test_hermite_degree_cap():
    hermite_he(64, 0.5)
    with pytest.raises(DegreeCapError):
        hermite_he(65, 0.5)
    with pytest.raises(DegreeCapError):
        hermite_he(-1, 0.5)


def test_hermite_table_matches_recurrence():
    x = np.linspace(-3, 3, 7)
    table = hermite_table(8, x)
    for k in range(9):
        np.testing.assert_allclose(table[k], hermite_he(k, x), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("j", range(7))
@pytest.mark.parametrize("k", range(7))
def test_hermite_orthogonality_by_quadrature(j, k):
    gram = integrate(lambda x: hermite_he(j, x) * hermite_he(k, x) * phi(x), -math.inf, math.inf, 1e-9)
    expected = float(math.factorial(k)) if j == k else 0.0
    assert gram.value == pytest.approx(expected, abs=1e-8)


def test_partial_integral_examples():
    assert hermite_partial_integral(1, 0.0, math.inf) == pytest.approx(phi(0.0), abs=1e-15)
    expected = (C_STAR**2 - 1) * phi(C_STAR)
    assert hermite_partial_integral(3, C_STAR, math.inf) == pytest.approx(expected, abs=1e-14)
    assert hermite_partial_integral(3, C_STAR, math.inf) == pytest.approx(-0.36086, abs=1e-4)
    assert hermite_partial_integral(3, -0.7, 0.7) == pytest.approx(0.0, abs=1e-15)
    assert hermite_partial_integral(0, -math.inf, math.inf) == 1.0


def test_partial_integral_rejects_reversed_interval():
    with pytest.raises(InvalidIntervalError):
        hermite_partial_integral(2, 1.0, 0.0)


def test_partial_integral_matches_quadrature(rng):
    for _ in range(100):
        a, b = np.sort(rng.normal(scale=2.0, size=2))
        k = int(rng.integers(0, 7))
        oracle = integrate(lambda x: hermite_he(k, x) * phi(x), a, b, 1e-11).value
        assert hermite_partial_integral(k, a, b) == pytest.approx(oracle, abs=1e-8)


def test_partial_integral_far_right_tail():
    # Phi(10) - Phi(9) is 0.0 in double precision
    mass = hermite_partial_integral(0, 9.0, 10.0)
    assert mass == pytest.approx(1.1285122074236e-19, rel=1e-9)
    assert mass == pytest.approx(hermite_partial_integral(0, -10.0, -9.0), rel=1e-12)
    assert hermite_partial_integral(0, 9.0, math.inf) == pytest.approx(1.1285884059538e-19, rel=1e-9)


def test_integrate_total_mass_and_he3_normalization():
    assert integrate(phi, -math.inf, math.inf).value == pytest.approx(1.0, abs=1e-12)
    he3 = integrate(lambda x: hermite_he(3, x) ** 2 / 6 * phi(x), -9, 9, 1e-10)
    assert he3.value == pytest.approx(1.0, abs=1e-10)
    tail = integrate(lambda x: (x**3 - 3 * x) * phi(x), C_STAR, 9.0)
    assert tail.value == pytest.approx(hermite_partial_integral(3, C_STAR, math.inf), abs=1e-10)


def test_integrate_keeps_finite_limits_past_truncation():
    assert integrate(lambda x: 1.0, 0.0, 20.0).value == pytest.approx(20.0, abs=1e-12)
    assert integrate(lambda x: 1.0, -15.0, -12.0).value == pytest.approx(3.0, abs=1e-12)
    assert integrate(lambda x: 1.0, 0.0, math.inf).value == pytest.approx(9.0, abs=1e-12)
    assert integrate(lambda x: 1.0, -math.inf, -12.0).value == 0.0


def test_integrate_rejects_reversed_interval():
    with pytest.raises(InvalidIntervalError):
        integrate(phi, 1.0, 0.0)


def test_integrate_reports_unreachable_tolerance():
    with pytest.raises(ConvergenceError):
        integrate(lambda x: 1.0 / math.sqrt(abs(x - 0.3)) if x != 0.3 else 0.0, 0.0, 1.0, 1e-15)


def test_find_root_examples():
    assert find_root(lambda x: x * x - 2, 1, 2, 1e-12) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert find_root(h_gap, 0.0, 1.0, 1e-10) == pytest.approx(C_STAR, abs=1e-5)
    target = (phi(0.0) + phi(C_STAR)) / 2
    assert find_root(lambda b: phi(b) - target, 0.0, C_STAR) == pytest.approx(0.18009, abs=2e-4)


def test_find_root_requires_sign_change():
    with pytest.raises(NoSignChangeError):
        find_root(lambda x: x * x + 1, -1, 1)


def test_hermite_matches_explicit_polynomials(rng):
    x = rng.uniform(-5, 5, size=50)
    np.testing.assert_allclose(hermite_he(2, x), x**2 - 1, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(hermite_he(3, x), x**3 - 3 * x, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(hermite_he(4, x), x**4 - 6 * x**2 + 3, rtol=1e-12, atol=1e-11)
    for k in range(1, 10):
        recurrence = x * hermite_he(k, x) - k * hermite_he(k - 1, x)
        np.testing.assert_allclose(hermite_he(k + 1, x), recurrence, rtol=1e-12, atol=1e-9)


def test_Phi_derivative_is_phi():
    x = np.linspace(-4, 4, 1000)
    h = 1e-5
    np.testing.assert_allclose((Phi(x + h) - Phi(x - h)) / (2 * h), phi(x), atol=1e-6)
    np.testing.assert_allclose(Phi(-x), 1 - Phi(x), atol=1e-15)
