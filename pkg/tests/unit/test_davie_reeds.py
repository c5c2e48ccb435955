import math

import numpy as np
import pytest

from src.exceptions import DomainError
from src.games.davie_reeds import (
    dr_value_for_lambda,
    f_objective,
    f_prime,
    f_second,
    h_gap,
    landscape,
    landscape_csv,
    ratio,
    ratio_prime,
    second_derivative_ceiling,
    sign_changes,
)
from src.numerics.special_functions import Phi, phi

pytestmark = pytest.mark.unit


def test_h_gap_endpoints():
    assert h_gap(0.0) == pytest.approx(2 / math.pi - 1, abs=1e-12)
    assert h_gap(0.0) == pytest.approx(-0.36338, abs=1e-5)
    assert h_gap(1.0) == pytest.approx(0.59958, abs=1e-5)
    assert h_gap(0.25573) == pytest.approx(0.0, abs=1e-4)


def test_constants_match_published_values(constants):
    assert constants.c_star == pytest.approx(0.25573, abs=5e-5)
    assert constants.lambda_star == pytest.approx(0.19748, abs=5e-5)
    assert constants.c_plus == pytest.approx(2.0582, abs=1e-3)
    assert constants.val_dr == pytest.approx(0.4786, abs=1e-4)
    assert constants.k_dr == pytest.approx(1.6769, abs=1e-4)


def test_internal_identities(constants):
    p = phi(constants.c_star)
    assert constants.lambda_star == pytest.approx(2 * constants.c_star * p, abs=1e-12)
    assert h_gap(constants.c_star) == pytest.approx(0.0, abs=1e-12)
    assert constants.val_dr == pytest.approx(4 * p * p * (1 - constants.lambda_star), abs=1e-12)
    assert constants.k_dr == pytest.approx(1 / (4 * p * p), abs=1e-12)
    assert constants.lambda_star == pytest.approx(
        2 * constants.c_plus * phi(constants.c_plus), abs=1e-12
    )


def test_constants_serialize(constants):
    data = constants.to_dict()
    assert set(data) == {"c_star", "lambda_star", "c_plus", "val_dr", "k_dr"}


def test_objective_landmarks(constants):
    lam = constants.lambda_star
    assert f_objective(0.0, lam) == pytest.approx(0.4391, abs=1e-4)
    assert f_objective(0.5, lam) == pytest.approx(0.4496, abs=1e-4)
    assert f_prime(constants.c_star, lam) == pytest.approx(0.0, abs=1e-9)
    assert f_prime(constants.c_plus, lam) == pytest.approx(0.0, abs=1e-9)


def test_derivatives_match_finite_differences(constants, rng):
    lam = constants.lambda_star
    h = 1e-5
    c = rng.uniform(0.0, 3.0, size=100)
    numeric = (f_objective(c + h, lam) - f_objective(c - h, lam)) / (2 * h)
    np.testing.assert_allclose(f_prime(c, lam), numeric, rtol=0, atol=1e-6)
    # second derivative through the centered difference of F'
    numeric2 = (f_prime(c + h, lam) - f_prime(c - h, lam)) / (2 * h)
    np.testing.assert_allclose(f_second(c, lam), numeric2, rtol=0, atol=1e-6)


def test_concavity_on_left_half(constants):
    grid = np.linspace(0.0, 0.5, 2001)
    second = f_second(grid, constants.lambda_star)
    assert np.all(second < -0.49)
    assert np.all(second <= second_derivative_ceiling())


def test_interior_maximum_is_c_star(constants):
    grid = np.linspace(0.0, 1.0, 100001)
    values = f_objective(grid, constants.lambda_star)
    assert grid[np.argmax(values)] == pytest.approx(constants.c_star, abs=2e-5)
    assert values.max() <= constants.val_dr + 1e-15


def test_ratio_minimized_at_c_star(constants):
    assert ratio(constants.c_star) == pytest.approx(1 / constants.k_dr, abs=1e-12)
    assert ratio(constants.c_star) == pytest.approx(0.59634, abs=1e-4)
    assert ratio_prime(constants.c_star) == pytest.approx(0.0, abs=1e-8)
    for c in (0.05, 0.2, 0.3, 0.6, 0.9):
        assert ratio(c) > ratio(constants.c_star)


def test_ratio_prime_matches_finite_difference():
    h = 1e-6
    for c in (0.1, 0.4, 0.8):
        numeric = (ratio(c + h) - ratio(c - h)) / (2 * h)
        assert ratio_prime(c) == pytest.approx(numeric, abs=1e-7)


@pytest.mark.parametrize("c", [-0.1, 1.0, 1.5])
def test_ratio_domain(c):
    with pytest.raises(DomainError):
        ratio(c)
    with pytest.raises(DomainError):
        ratio_prime(c)


def test_lambda_family_peaks_at_lambda_star(constants):
    best = dr_value_for_lambda(constants.lambda_star)
    assert best["c_minus"] == pytest.approx(constants.c_star, abs=1e-10)
    assert best["value"] == pytest.approx(constants.val_dr, abs=1e-12)
    assert best["ratio"] == pytest.approx(constants.k_dr, abs=1e-12)
    for lam in (0.1, 0.15, 0.25, 0.3):
        assert dr_value_for_lambda(lam)["ratio"] < best["ratio"]


def test_lambda_family_domain():
    with pytest.raises(DomainError):
        dr_value_for_lambda(0.0)
    with pytest.raises(DomainError):
        dr_value_for_lambda(2 * phi(1.0) + 1e-6)


def test_landscape_table(constants):
    table = landscape(0.0, 4.0, 401)
    assert list(table.columns) == ["C", "F", "Fprime"]
    assert len(table) == 401
    assert table["F"].iloc[0] == pytest.approx(0.4391, abs=1e-4)
    assert sign_changes(table["Fprime"]) == 2


def test_landscape_degenerate_range():
    table = landscape(1.0, 1.0, 2)
    assert table.iloc[0].tolist() == table.iloc[1].tolist()
    with pytest.raises(DomainError):
        landscape(0.0, 1.0, 1)


def test_landscape_csv_is_deterministic(tmp_path):
    out = tmp_path / "landscape.csv"
    text = landscape_csv(landscape(0.0, 4.0, 11), out)
    assert out.read_text() == text
    assert text.splitlines()[0] == "C,F,Fprime"
    assert text == landscape_csv(landscape(0.0, 4.0, 11))


def test_objective_uses_tail_probability(constants):
    c = 1.3
    expected = 4 * phi(c) ** 2 - constants.lambda_star * (4 * Phi(-c) - 1)
    assert f_objective(c, constants.lambda_star) == pytest.approx(expected, abs=1e-15)


def test_h_gap_has_a_single_root_on_unit_interval():
    grid = np.linspace(0.0, 1.0, 10001)
    assert sign_changes(h_gap(grid)) == 1


def test_ratio_prime_changes_sign_across_c_star():
    assert ratio_prime(0.1) * ratio_prime(0.4) < 0
